#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gflow/expr.hpp"
#include "gflow/sampling.hpp"
#include "gflow/signature.hpp"

namespace gflow {

// Homogeneous formal power series in the graded coordinates, truncated at a
// weight cap, with scalar expressions over the base coordinates (and possibly
// a time symbol) as coefficients. Zero coefficients are pruned eagerly.
class GradedFunction {
public:
    GradedFunction(SignaturePtr sig, int degree, int weight_cap)
        : sig_(std::move(sig)), degree_(degree), weight_cap_(weight_cap) {}

    static GradedFunction zero(SignaturePtr sig, int degree, int weight_cap) {
        return GradedFunction(std::move(sig), degree, weight_cap);
    }

    static GradedFunction from_scalar(SignaturePtr sig, ScalarExpr body, int weight_cap) {
        GradedFunction f(std::move(sig), 0, weight_cap);
        f.set_coefficient(MultiIndex::zero(*f.sig_), std::move(body));
        return f;
    }

    static GradedFunction one(SignaturePtr sig, int weight_cap) {
        return from_scalar(std::move(sig), ScalarExpr(1.0), weight_cap);
    }

    // the coordinate z^lambda as a function
    static GradedFunction coordinate(SignaturePtr sig, std::size_t coord_index,
                                     int weight_cap) {
        const Coordinate& c = sig->coordinate(coord_index);
        if (c.degree == 0)
            return from_scalar(std::move(sig), ScalarExpr::variable(c.name), weight_cap);
        std::size_t mu = 0;
        for (; mu < sig->graded_count(); ++mu)
            if (sig->graded_coordinate(mu) == coord_index) break;
        GradedFunction f(sig, c.degree, weight_cap);
        f.set_coefficient(MultiIndex::unit(*sig, mu), ScalarExpr(1.0));
        return f;
    }

    static GradedFunction monomial(SignaturePtr sig, const MultiIndex& p,
                                   ScalarExpr coefficient, int weight_cap) {
        GradedFunction f(sig, p.degree(*sig), weight_cap);
        f.set_coefficient(p, std::move(coefficient));
        return f;
    }

    const SignaturePtr& signature_ptr() const { return sig_; }
    const GradedSignature& signature() const { return *sig_; }
    int degree() const { return degree_; }
    int weight_cap() const { return weight_cap_; }
    const std::map<MultiIndex, ScalarExpr>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    void set_coefficient(const MultiIndex& p, ScalarExpr c) {
        if (!p.valid(*sig_))
            throw DegreeError("invalid multi-index for signature (odd exponent > 1?)");
        if (p.degree(*sig_) != degree_)
            throw DegreeError("monomial degree " + std::to_string(p.degree(*sig_)) +
                              " does not match function degree " + std::to_string(degree_));
        if (p.weight() > weight_cap_ || c.is_zero()) {
            terms_.erase(p);
            return;
        }
        terms_[p] = std::move(c);
    }

    void add_coefficient(const MultiIndex& p, const ScalarExpr& c) {
        auto it = terms_.find(p);
        if (it == terms_.end()) set_coefficient(p, c);
        else set_coefficient(p, it->second + c);
    }

    ScalarExpr coefficient(const MultiIndex& p) const {
        auto it = terms_.find(p);
        return it == terms_.end() ? ScalarExpr(0.0) : it->second;
    }

    // coefficient at the empty graded monomial; nonzero only for degree 0
    ScalarExpr body() const { return coefficient(MultiIndex::zero(*sig_)); }

    GradedFunction operator+(const GradedFunction& g) const {
        require_compatible(g);
        if (degree_ != g.degree_ && !terms_.empty() && !g.terms_.empty())
            throw DegreeError("sum of functions of different degrees");
        GradedFunction r(sig_, terms_.empty() ? g.degree_ : degree_, weight_cap_);
        r.terms_ = terms_;
        for (const auto& [p, c] : g.terms_) r.add_coefficient(p, c);
        return r;
    }

    GradedFunction operator-() const { return scalar_mul(ScalarExpr(-1.0)); }
    GradedFunction operator-(const GradedFunction& g) const { return *this + (-g); }

    GradedFunction scalar_mul(const ScalarExpr& a) const {
        GradedFunction r(sig_, degree_, weight_cap_);
        for (const auto& [p, c] : terms_) r.set_coefficient(p, a * c);
        return r;
    }

    GradedFunction operator*(const GradedFunction& g) const {
        require_compatible(g);
        GradedFunction r(sig_, degree_ + g.degree_, weight_cap_);
        for (const auto& [pa, ca] : terms_) {
            for (const auto& [pb, cb] : g.terms_) {
                MultiIndex p = pa + pb;
                if (p.weight() > weight_cap_ || !p.valid(*sig_)) continue;
                int sign = koszul_merge_sign(*sig_, pa, pb);
                r.add_coefficient(p, ScalarExpr(static_cast<double>(sign)) * ca * cb);
            }
        }
        return r;
    }

    GradedFunction pow(int n) const {
        GradedFunction r = one(sig_, weight_cap_);
        for (int i = 0; i < n; ++i) r = r * *this;
        return r;
    }

    std::set<std::string> coefficient_variables() const {
        std::set<std::string> out;
        for (const auto& [p, c] : terms_) c.collect_variables(out);
        return out;
    }

    // numeric coefficients at a base-point assignment
    std::map<MultiIndex, double> eval_coefficients(const Assignment& at) const {
        std::map<MultiIndex, double> out;
        for (const auto& [p, c] : terms_) out[p] = c.eval(at);
        return out;
    }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::string out;
        for (const auto& [p, c] : terms_) {
            if (!out.empty()) out += " + ";
            if (p.is_zero()) {
                out += c.str();
            } else if (c.is_one()) {
                out += p.str(*sig_);
            } else {
                bool parens = c.kind() == ScalarExpr::Kind::Sum;
                out += parens ? "(" + c.str() + ")" : c.str();
                out += "*" + p.str(*sig_);
            }
        }
        return out;
    }

private:
    void require_compatible(const GradedFunction& g) const {
        if (*sig_ != *g.sig_)
            throw SignatureMismatch("graded functions live on different signatures");
        if (weight_cap_ != g.weight_cap_)
            throw SignatureMismatch("graded functions carry different weight caps");
    }

    SignaturePtr sig_;
    int degree_;
    int weight_cap_;
    std::map<MultiIndex, ScalarExpr> terms_;
};

// max |f_p - g_p| over all monomials and sample assignments
inline double max_coefficient_difference(const GradedFunction& f, const GradedFunction& g,
                                         const std::vector<Assignment>& points) {
    std::set<MultiIndex> keys;
    for (const auto& [p, c] : f.terms()) keys.insert(p);
    for (const auto& [p, c] : g.terms()) keys.insert(p);
    double worst = 0.0;
    for (const auto& p : keys) {
        ScalarExpr d = f.coefficient(p) - g.coefficient(p);
        for (const auto& at : points) {
            double v = std::abs(d.eval(at));
            if (v > worst) worst = v;
        }
    }
    return worst;
}

inline bool equal_sampled(const GradedFunction& f, const GradedFunction& g,
                          const std::vector<Assignment>& points, double tol) {
    return max_coefficient_difference(f, g, points) <= tol;
}

inline bool is_zero_sampled(const GradedFunction& f, const std::vector<Assignment>& points,
                            double tol) {
    for (const auto& [p, c] : f.terms())
        for (const auto& at : points)
            if (std::abs(c.eval(at)) > tol) return false;
    return true;
}

// sample assignments binding every coefficient variable of the given functions
template <typename... Fs>
std::vector<Assignment> sample_points_for(const Config& cfg, const Fs&... fs) {
    std::set<std::string> vars;
    (
        [&] {
            auto v = fs.coefficient_variables();
            vars.insert(v.begin(), v.end());
        }(),
        ...);
    std::vector<std::string> names(vars.begin(), vars.end());
    return sample_assignments(names, cfg.sample_points, cfg);
}

} // namespace gflow
