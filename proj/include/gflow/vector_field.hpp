#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gflow/graded_function.hpp"

namespace gflow {

// Left partial derivative with respect to the coordinate at coord_index.
// Base coordinates differentiate the coefficients; graded coordinates lower
// the exponent and pick up the Koszul sign of the factors passed over.
inline GradedFunction partial(const GradedFunction& f, std::size_t coord_index) {
    const GradedSignature& sig = f.signature();
    const Coordinate& c = sig.coordinate(coord_index);
    if (c.degree == 0) {
        GradedFunction r(f.signature_ptr(), f.degree(), f.weight_cap());
        for (const auto& [p, coeff] : f.terms()) r.set_coefficient(p, coeff.diff(c.name));
        return r;
    }
    std::size_t mu = 0;
    for (; mu < sig.graded_count(); ++mu)
        if (sig.graded_coordinate(mu) == coord_index) break;
    GradedFunction r(f.signature_ptr(), f.degree() - c.degree, f.weight_cap());
    for (const auto& [p, coeff] : f.terms()) {
        if (p[mu] == 0) continue;
        MultiIndex q = p;
        q[mu] -= 1;
        double factor = partial_sign(sig, p, mu) * p[mu];
        r.add_coefficient(q, ScalarExpr(factor) * coeff);
    }
    return r;
}

inline GradedFunction partial(const GradedFunction& f, const std::string& coord_name) {
    return partial(f, f.signature().index_of(coord_name));
}

// Degree-zero vector field on the base manifold: one scalar expression per
// base coordinate.
struct OrdinaryVectorField {
    SignaturePtr sig;
    std::vector<ScalarExpr> components; // one per base coordinate, in order
};

// Graded derivation X = sum_lambda X^lambda d_lambda, stored by components.
// The component at coordinate z^lambda has degree |X| + |z^lambda|.
class VectorField {
public:
    VectorField(SignaturePtr sig, int degree, std::vector<GradedFunction> components)
        : sig_(std::move(sig)), degree_(degree), components_(std::move(components)) {
        if (components_.size() != sig_->size())
            throw DegreeError("vector field needs one component per coordinate");
        for (std::size_t i = 0; i < components_.size(); ++i) {
            if (components_[i].signature() != *sig_)
                throw SignatureMismatch("component lives on a different signature");
            int want = degree_ + sig_->coordinate(i).degree;
            if (components_[i].degree() != want && !components_[i].empty())
                throw DegreeError("component for '" + sig_->coordinate(i).name +
                                  "' has degree " + std::to_string(components_[i].degree()) +
                                  ", expected " + std::to_string(want));
        }
    }

    static VectorField zero(SignaturePtr sig, int degree, int weight_cap) {
        std::vector<GradedFunction> comps;
        comps.reserve(sig->size());
        for (std::size_t i = 0; i < sig->size(); ++i)
            comps.push_back(GradedFunction::zero(sig, degree + sig->coordinate(i).degree,
                                                 weight_cap));
        return VectorField(sig, degree, std::move(comps));
    }

    // Euler field: E(z^lambda) = |z^lambda| z^lambda, so E(f) = |f| f.
    static VectorField euler(SignaturePtr sig, int weight_cap) {
        std::vector<GradedFunction> comps;
        for (std::size_t i = 0; i < sig->size(); ++i) {
            auto z = GradedFunction::coordinate(sig, i, weight_cap);
            comps.push_back(z.scalar_mul(ScalarExpr(sig->coordinate(i).degree)));
        }
        return VectorField(sig, 0, std::move(comps));
    }

    const SignaturePtr& signature_ptr() const { return sig_; }
    const GradedSignature& signature() const { return *sig_; }
    int degree() const { return degree_; }
    int weight_cap() const { return components_.front().weight_cap(); }

    const GradedFunction& component(std::size_t i) const { return components_[i]; }
    const GradedFunction& component(const std::string& name) const {
        return components_[sig_->index_of(name)];
    }
    const std::vector<GradedFunction>& components() const { return components_; }

    VectorField scalar_mul(const ScalarExpr& a) const {
        std::vector<GradedFunction> comps;
        comps.reserve(components_.size());
        for (const auto& c : components_) comps.push_back(c.scalar_mul(a));
        return VectorField(sig_, degree_, std::move(comps));
    }

    VectorField operator+(const VectorField& other) const {
        if (degree_ != other.degree_)
            throw DegreeError("sum of vector fields of different degrees");
        std::vector<GradedFunction> comps;
        comps.reserve(components_.size());
        for (std::size_t i = 0; i < components_.size(); ++i)
            comps.push_back(components_[i] + other.components_[i]);
        return VectorField(sig_, degree_, std::move(comps));
    }

private:
    SignaturePtr sig_;
    int degree_;
    std::vector<GradedFunction> components_;
};

// X(f) = sum_lambda X^lambda * d_lambda(f)
inline GradedFunction apply(const VectorField& X, const GradedFunction& f) {
    if (X.signature() != f.signature())
        throw SignatureMismatch("vector field and function live on different signatures");
    GradedFunction r =
        GradedFunction::zero(f.signature_ptr(), X.degree() + f.degree(), f.weight_cap());
    for (std::size_t i = 0; i < X.signature().size(); ++i) {
        if (X.component(i).empty()) continue;
        r = r + X.component(i) * partial(f, i);
    }
    return r;
}

inline GradedFunction apply_iterated(const VectorField& X, GradedFunction f, int times) {
    for (int i = 0; i < times; ++i) f = apply(X, f);
    return f;
}

// [X,Y]^lambda = X(Y^lambda) - (-1)^{|X||Y|} Y(X^lambda)
inline VectorField bracket(const VectorField& X, const VectorField& Y) {
    if (X.signature() != Y.signature())
        throw SignatureMismatch("bracket of fields on different signatures");
    int sign = (X.degree() * Y.degree()) % 2 != 0 ? -1 : 1;
    std::vector<GradedFunction> comps;
    comps.reserve(X.signature().size());
    for (std::size_t i = 0; i < X.signature().size(); ++i) {
        GradedFunction c = apply(X, Y.component(i)) -
                           apply(Y, X.component(i)).scalar_mul(ScalarExpr(sign));
        comps.push_back(std::move(c));
    }
    return VectorField(X.signature_ptr(), X.degree() + Y.degree(), std::move(comps));
}

inline bool is_zero_sampled(const VectorField& X, const std::vector<Assignment>& points,
                            double tol) {
    for (const auto& c : X.components())
        if (!is_zero_sampled(c, points, tol)) return false;
    return true;
}

inline std::vector<Assignment> sample_points_for_field(const Config& cfg,
                                                       const VectorField& X) {
    std::set<std::string> vars;
    for (const auto& c : X.components()) {
        auto v = c.coefficient_variables();
        vars.insert(v.begin(), v.end());
    }
    std::vector<std::string> names(vars.begin(), vars.end());
    return sample_assignments(names, cfg.sample_points, cfg);
}

// An odd vector field generates a flow exactly when it squares to zero.
inline bool is_homological(const VectorField& X, const Config& cfg) {
    if (X.degree() % 2 == 0)
        throw DegreeError("homologicity is a predicate on odd-degree fields");
    VectorField XX = bracket(X, X);
    return is_zero_sampled(XX, sample_points_for_field(cfg, XX), cfg.sample_tol);
}

// For |X| = 0: the ordinary field acting on bodies, X_0^i = body(X^i).
inline OrdinaryVectorField underlying_vector_field(const VectorField& X) {
    if (X.degree() != 0)
        throw DegreeError("underlying vector field requires degree 0");
    OrdinaryVectorField out{X.signature_ptr(), {}};
    out.components.reserve(X.signature().base_count());
    for (std::size_t i = 0; i < X.signature().base_count(); ++i)
        out.components.push_back(X.component(X.signature().base_coordinate(i)).body());
    return out;
}

} // namespace gflow
