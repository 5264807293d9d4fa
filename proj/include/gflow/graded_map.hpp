#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gflow/vector_field.hpp"

namespace gflow {

struct DegreeMismatch : DegreeError {
    using DegreeError::DegreeError;
};

// Base-coordinate exponent vector I for Taylor terms, with I! and d_I.
struct BaseMultiIndex {
    std::vector<int> exps;

    int weight() const {
        int w = 0;
        for (int e : exps) w += e;
        return w;
    }

    double factorial() const {
        double f = 1.0;
        for (int e : exps)
            for (int i = 2; i <= e; ++i) f *= i;
        return f;
    }
};

// Graded smooth map given by pullback data: one graded function over the
// source per target coordinate, of that coordinate's degree. The map acts on
// functions contravariantly through pullback().
class GradedMap {
public:
    GradedMap(SignaturePtr source, SignaturePtr target,
              std::vector<GradedFunction> pullbacks)
        : source_(std::move(source)), target_(std::move(target)),
          pullbacks_(std::move(pullbacks)) {
        if (pullbacks_.size() != target_->size())
            throw SignatureMismatch("need one pullback per target coordinate");
        for (std::size_t i = 0; i < pullbacks_.size(); ++i) {
            if (pullbacks_[i].signature() != *source_)
                throw SignatureMismatch("pullback data must live on the source");
            int want = target_->coordinate(i).degree;
            if (pullbacks_[i].degree() != want && !pullbacks_[i].empty())
                throw DegreeError("pullback of '" + target_->coordinate(i).name +
                                  "' must have degree " + std::to_string(want));
        }
    }

    static GradedMap identity(SignaturePtr sig, int weight_cap) {
        std::vector<GradedFunction> pbs;
        pbs.reserve(sig->size());
        for (std::size_t i = 0; i < sig->size(); ++i)
            pbs.push_back(GradedFunction::coordinate(sig, i, weight_cap));
        return GradedMap(sig, sig, std::move(pbs));
    }

    // p1 : source -> target where the source extends the target by extra
    // coordinates (e.g. M x R[-k] -> M); pullback views f on the product.
    static GradedMap projection(SignaturePtr source, SignaturePtr target, int weight_cap) {
        std::vector<GradedFunction> pbs;
        pbs.reserve(target->size());
        for (std::size_t i = 0; i < target->size(); ++i) {
            std::size_t j = source->index_of(target->coordinate(i).name);
            pbs.push_back(GradedFunction::coordinate(source, j, weight_cap));
        }
        return GradedMap(source, target, std::move(pbs));
    }

    // Section valued at t0 of a product target = source + one time coordinate.
    // A time coordinate of nonzero degree admits only t0 = 0.
    static GradedMap section_at(SignaturePtr source, SignaturePtr target,
                                const std::string& time_name, double t0, int weight_cap) {
        std::vector<GradedFunction> pbs;
        pbs.reserve(target->size());
        for (std::size_t i = 0; i < target->size(); ++i) {
            const Coordinate& c = target->coordinate(i);
            if (c.name == time_name) {
                if (c.degree == 0) {
                    pbs.push_back(
                        GradedFunction::from_scalar(source, ScalarExpr(t0), weight_cap));
                } else {
                    if (t0 != 0.0)
                        throw NonzeroValueForGradedTime(
                            "a nonzero-degree time coordinate can only be set to 0");
                    pbs.push_back(GradedFunction::zero(source, c.degree, weight_cap));
                }
            } else {
                std::size_t j = source->index_of(c.name);
                pbs.push_back(GradedFunction::coordinate(source, j, weight_cap));
            }
        }
        return GradedMap(source, target, std::move(pbs));
    }

    const SignaturePtr& source_ptr() const { return source_; }
    const SignaturePtr& target_ptr() const { return target_; }
    const GradedSignature& source() const { return *source_; }
    const GradedSignature& target() const { return *target_; }
    int weight_cap() const { return pullbacks_.front().weight_cap(); }

    const GradedFunction& coordinate_pullback(std::size_t target_index) const {
        return pullbacks_[target_index];
    }
    const GradedFunction& coordinate_pullback(const std::string& name) const {
        return pullbacks_[target_->index_of(name)];
    }

    // bodies of the degree-zero pullbacks: the underlying smooth map,
    // expressed in the source base coordinates
    std::map<std::string, ScalarExpr> underlying() const {
        std::map<std::string, ScalarExpr> out;
        for (std::size_t i = 0; i < target_->base_count(); ++i) {
            std::size_t ci = target_->base_coordinate(i);
            out[target_->coordinate(ci).name] = pullbacks_[ci].body();
        }
        return out;
    }

private:
    SignaturePtr source_;
    SignaturePtr target_;
    std::vector<GradedFunction> pullbacks_;
};

namespace detail {

// all base multi-indices I with w(I) <= max_weight, skipping slots where the
// purely graded part vanishes (their Taylor factors would be zero)
inline void enumerate_base_indices(const std::vector<bool>& active, int max_weight,
                                   std::vector<BaseMultiIndex>& out) {
    BaseMultiIndex cur;
    cur.exps.assign(active.size(), 0);
    auto rec = [&](auto&& self, std::size_t i, int left) -> void {
        if (i == active.size()) {
            out.push_back(cur);
            return;
        }
        int cap = active[i] ? left : 0;
        for (int e = 0; e <= cap; ++e) {
            cur.exps[i] = e;
            self(self, i + 1, left - e);
        }
        cur.exps[i] = 0;
    };
    rec(rec, 0, max_weight);
}

} // namespace detail

// Pullback of f through phi: write f = sum_r f_r xi^r over the target; each
// smooth coefficient is Taylor-expanded around the underlying map in the
// purely graded parts of the base-coordinate pullbacks,
//   phi*(f_r) = sum_I (1/I!) (d_I f_r o phi_0) xbar^I,
// and each xi^r becomes the ordered product of the graded-coordinate
// pullbacks. Weight truncation bounds the Taylor sum: xbar has weight >= 1,
// so indices with w(I) above the cap contribute nothing.
inline GradedFunction pullback(const GradedMap& phi, const GradedFunction& f) {
    const GradedSignature& T = phi.target();
    const GradedSignature& S = phi.source();
    if (f.signature() != T)
        throw SignatureMismatch("function does not live on the map's target");
    if (f.weight_cap() != phi.weight_cap())
        throw SignatureMismatch("function and map carry different weight caps");
    const int W = phi.weight_cap();
    SignaturePtr Sp = phi.source_ptr();

    // substitution x^i -> body of its pullback, and the purely graded parts
    std::map<std::string, ScalarExpr> body_subst;
    std::vector<GradedFunction> xbar;
    std::vector<bool> active(T.base_count(), false);
    xbar.reserve(T.base_count());
    for (std::size_t i = 0; i < T.base_count(); ++i) {
        const auto& xi_star = phi.coordinate_pullback(T.base_coordinate(i));
        ScalarExpr b = xi_star.body();
        body_subst[T.base_name(i)] = b;
        GradedFunction bar = xi_star - GradedFunction::from_scalar(Sp, b, W);
        active[i] = !bar.empty();
        xbar.push_back(std::move(bar));
    }

    std::vector<BaseMultiIndex> taylor_indices;
    detail::enumerate_base_indices(active, W, taylor_indices);

    // cached ordered powers of the graded-coordinate pullbacks
    auto xi_power = [&](const MultiIndex& r) {
        GradedFunction prod = GradedFunction::one(Sp, W);
        for (std::size_t mu = 0; mu < r.size(); ++mu) {
            const auto& xi_star = phi.coordinate_pullback(T.graded_coordinate(mu));
            for (int e = 0; e < r[mu]; ++e) prod = prod * xi_star;
        }
        return prod;
    };

    GradedFunction result = GradedFunction::zero(Sp, f.degree(), W);
    for (const auto& [r, f_r] : f.terms()) {
        // phi*(f_r): Taylor expansion around the underlying map
        GradedFunction taylor = GradedFunction::zero(Sp, 0, W);
        for (const auto& I : taylor_indices) {
            ScalarExpr d = f_r;
            for (std::size_t i = 0; i < I.exps.size(); ++i)
                for (int e = 0; e < I.exps[i]; ++e) d = d.diff(T.base_name(i));
            if (d.is_zero()) continue;
            ScalarExpr coeff = d.substitute(body_subst) * ScalarExpr(1.0 / I.factorial());
            GradedFunction term = GradedFunction::from_scalar(Sp, coeff, W);
            for (std::size_t i = 0; i < I.exps.size(); ++i)
                for (int e = 0; e < I.exps[i]; ++e) term = term * xbar[i];
            taylor = taylor + term;
        }
        if (r.is_zero()) {
            result = result + taylor;
        } else {
            result = result + taylor * xi_power(r);
        }
    }
    return result;
}

// (psi o phi)*(z) = phi*(psi*(z))
inline GradedMap compose(const GradedMap& psi, const GradedMap& phi) {
    if (psi.source() != phi.target())
        throw SignatureMismatch("compose: target of inner map must be source of outer");
    std::vector<GradedFunction> pbs;
    pbs.reserve(psi.target().size());
    for (std::size_t i = 0; i < psi.target().size(); ++i)
        pbs.push_back(pullback(phi, psi.coordinate_pullback(i)));
    return GradedMap(phi.source_ptr(), psi.target_ptr(), std::move(pbs));
}

// X ~_phi Y: phi* o Y = X o phi*. Checking on coordinate functions suffices
// since both sides are derivations along phi.
inline bool related(const GradedMap& phi, const VectorField& X, const VectorField& Y,
                    const Config& cfg) {
    if (X.degree() != Y.degree())
        throw DegreeMismatch("related fields must have equal degrees");
    if (X.signature() != phi.source() || Y.signature() != phi.target())
        throw SignatureMismatch("related: X lives on the source, Y on the target");
    for (std::size_t i = 0; i < phi.target().size(); ++i) {
        GradedFunction lhs = apply(X, phi.coordinate_pullback(i));
        GradedFunction rhs = pullback(phi, Y.component(i));
        auto points = sample_points_for(cfg, lhs, rhs);
        if (!equal_sampled(lhs, rhs, points, cfg.sample_tol)) return false;
    }
    return true;
}

// View a function on M as a function on an extension of M (pullback along
// the projection), with an explicit weight cap for the extended computation.
inline GradedFunction lift_to(const GradedFunction& f, const SignaturePtr& ext,
                              int weight_cap) {
    const GradedSignature& S = f.signature();
    std::vector<std::size_t> slot_map(S.graded_count());
    for (std::size_t mu = 0; mu < S.graded_count(); ++mu) {
        const std::string& name = S.graded_name(mu);
        std::size_t j = ext->index_of(name);
        std::size_t target_mu = 0;
        for (; target_mu < ext->graded_count(); ++target_mu)
            if (ext->graded_coordinate(target_mu) == j) break;
        slot_map[mu] = target_mu;
    }
    GradedFunction out(ext, f.degree(), weight_cap);
    for (const auto& [p, c] : f.terms()) {
        MultiIndex q = MultiIndex::zero(*ext);
        for (std::size_t mu = 0; mu < p.size(); ++mu) q[slot_map[mu]] = p[mu];
        out.add_coefficient(q, c);
    }
    return out;
}

} // namespace gflow
