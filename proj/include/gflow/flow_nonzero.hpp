#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gflow/graded_map.hpp"

namespace gflow {

// Termination bound for the exponential series of a degree-k field: a
// nonzero homogeneous function at weight <= W has degree within
// [W*min(0,deg), W*max(0,deg)], so X^l(z) must vanish once |z| + l*k leaves
// that window. Deterministic, no detection of consecutive zeros needed.
inline int nonzero_flow_termination_bound(const GradedSignature& sig, int k, int W) {
    int d_plus = 0, d_minus = 0;
    for (std::size_t mu = 0; mu < sig.graded_count(); ++mu) {
        d_plus = std::max(d_plus, sig.graded_degree(mu));
        d_minus = std::min(d_minus, sig.graded_degree(mu));
    }
    int L = 0;
    for (std::size_t i = 0; i < sig.size(); ++i) {
        int d = sig.coordinate(i).degree;
        int cap;
        if (k > 0) cap = (W * d_plus - (d + k)) / k + 1;
        else cap = ((d - k) - W * d_minus) / (-k) + 1;
        L = std::max(L, cap);
    }
    return std::max(L, 0);
}

// Flow of a vector field of nonzero degree k: the signature gains a time
// coordinate tau of degree -k and the pullback of each coordinate is a
// polynomial in tau with graded functions as strata.
class NonzeroFlow {
public:
    NonzeroFlow(VectorField X, SignaturePtr ext, std::string time_name, int ext_cap,
                GradedMap theta, int realized_power)
        : X_(std::move(X)), ext_(std::move(ext)), time_name_(std::move(time_name)),
          ext_cap_(ext_cap), theta_(std::move(theta)), L_(realized_power) {}

    const VectorField& generator() const { return X_; }
    const SignaturePtr& extended_signature() const { return ext_; }
    const std::string& time_name() const { return time_name_; }
    std::size_t time_slot() const {
        std::size_t j = ext_->index_of(time_name_);
        for (std::size_t mu = 0; mu < ext_->graded_count(); ++mu)
            if (ext_->graded_coordinate(mu) == j) return mu;
        throw DegreeError("time coordinate is not graded");
    }
    int extended_cap() const { return ext_cap_; }
    int degree() const { return X_.degree(); }
    int max_time_power() const { return L_; }

    // theta as a graded smooth map D = M x R[-k] -> M
    const GradedMap& as_map() const { return theta_; }

    // theta*(f) for f on M, assembled stratum by stratum:
    //   theta*(f) = sum_l (1/l!) p1*(X^l(f)) tau^l
    // (for odd k only l = 0,1 survive).
    GradedFunction pullback(const GradedFunction& f) const;

private:
    VectorField X_;
    SignaturePtr ext_;
    std::string time_name_;
    int ext_cap_;
    GradedMap theta_;
    int L_;
};

// theta*(f) assembled on an arbitrary extension of X's signature carrying a
// time coordinate of degree -|X|. Strata are computed on the base signature
// at its own cap and only then lifted, so they agree with iterated apply.
inline GradedFunction nonzero_flow_pullback_on(const VectorField& X,
                                               const GradedFunction& f,
                                               const SignaturePtr& ext,
                                               const std::string& time_name,
                                               int ext_cap) {
    const int k = X.degree();
    const int W = X.weight_cap();
    GradedFunction tau = GradedFunction::coordinate(ext, ext->index_of(time_name), ext_cap);
    GradedFunction out = lift_to(f, ext, ext_cap);
    GradedFunction xl = f;
    double inv_factorial = 1.0;
    int bound = nonzero_flow_termination_bound(X.signature(), k, W);
    for (int l = 1; l <= bound; ++l) {
        xl = apply(X, xl);
        if (xl.empty()) break;
        inv_factorial /= l;
        GradedFunction stratum =
            lift_to(xl, ext, ext_cap).scalar_mul(ScalarExpr(inv_factorial));
        if (k % 2 != 0) {
            out = out + tau * stratum; // two-term form, time on the left
            break;                     // tau^2 = 0
        }
        out = out + stratum * tau.pow(l);
    }
    return out;
}

inline GradedFunction NonzeroFlow::pullback(const GradedFunction& f) const {
    return nonzero_flow_pullback_on(X_, f, ext_, time_name_, ext_cap_);
}

namespace detail {

inline NonzeroFlow build_nonzero_flow(const VectorField& X, const std::string& time_name) {
    const int k = X.degree();
    const int W = X.weight_cap();
    SignaturePtr ext = extend_signature(X.signature(), time_name, -k);
    int bound = nonzero_flow_termination_bound(X.signature(), k, W);
    if (k % 2 != 0) bound = std::min(bound, 1);
    const int ext_cap = W + std::max(bound, 1);

    int realized = 0;
    std::vector<GradedFunction> pullbacks;
    pullbacks.reserve(X.signature().size());
    for (std::size_t i = 0; i < X.signature().size(); ++i) {
        GradedFunction z = GradedFunction::coordinate(X.signature_ptr(), i, W);
        GradedFunction acc = nonzero_flow_pullback_on(X, z, ext, time_name, ext_cap);
        // realized tau power, read off the assembled pullback
        std::size_t tau_slot = 0;
        for (std::size_t mu = 0; mu < ext->graded_count(); ++mu)
            if (ext->graded_name(mu) == time_name) tau_slot = mu;
        for (const auto& [p, c] : acc.terms())
            realized = std::max(realized, p[tau_slot]);
        pullbacks.push_back(std::move(acc));
    }
    GradedMap theta(ext, X.signature_ptr(), std::move(pullbacks));
    return NonzeroFlow(X, ext, time_name, ext_cap, std::move(theta), realized);
}

} // namespace detail

// Two-term flow of an odd homological field, theta*(f) = f + tau X(f).
// Without [X,X] = 0 the formula fails the flow axioms, so refuse.
inline NonzeroFlow flow_odd(const VectorField& X, const Config& cfg,
                            const std::string& time_name = "tau") {
    if (X.degree() % 2 == 0)
        throw DegreeError("flow_odd needs a field of odd degree");
    if (!is_homological(X, cfg))
        throw NotHomological("odd field with [X,X] != 0 generates no flow");
    return detail::build_nonzero_flow(X, time_name);
}

// Terminating exponential flow of a field of even nonzero degree.
inline NonzeroFlow flow_even(const VectorField& X, const std::string& time_name = "tau") {
    if (X.degree() == 0 || X.degree() % 2 != 0)
        throw DegreeError("flow_even needs a field of even nonzero degree");
    return detail::build_nonzero_flow(X, time_name);
}

// h_l extraction through the operators of the time factor: apply
// (1 (x) d_tau) l times, then the zero section. Returns X^l(f).
inline GradedFunction component_function(const NonzeroFlow& flow, const GradedFunction& f,
                                         int ell) {
    if (ell < 0) throw DegreeError("component index must be non-negative");
    GradedFunction h = flow.pullback(f);
    std::size_t tau_index = flow.extended_signature()->index_of(flow.time_name());
    for (int i = 0; i < ell; ++i) h = partial(h, tau_index);
    GradedMap s0 = GradedMap::section_at(flow.generator().signature_ptr(),
                                         flow.extended_signature(), flow.time_name(), 0.0,
                                         flow.extended_cap());
    GradedFunction on_m = pullback(s0, h);
    // return at the ambient weight cap
    GradedFunction out(flow.generator().signature_ptr(), on_m.degree(),
                       flow.generator().weight_cap());
    for (const auto& [p, c] : on_m.terms())
        if (p.weight() <= out.weight_cap()) out.set_coefficient(p, c);
    return out;
}

} // namespace gflow
