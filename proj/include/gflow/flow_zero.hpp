#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gflow/jet.hpp"
#include "gflow/ode.hpp"

namespace gflow {

struct FlowDomainEstimate {
    double t_minus = 0.0;
    double t_plus = 0.0;
    bool blowup_backward = false;
    bool blowup_forward = false;

    bool contains(double t) const { return t >= t_minus && t <= t_plus; }
};

// State layout of the pivotal system: for each coordinate z^lambda all
// multi-indices of degree |z^lambda| with weight <= W, flattened.
struct PivotalLayout {
    std::vector<std::vector<MultiIndex>> indices;
    std::vector<std::map<MultiIndex, std::size_t>> slot;
    std::vector<std::size_t> offsets;
    std::size_t total = 0;

    static PivotalLayout build(const GradedSignature& sig, int W) {
        PivotalLayout lay;
        lay.indices.resize(sig.size());
        lay.slot.resize(sig.size());
        lay.offsets.resize(sig.size());
        for (std::size_t i = 0; i < sig.size(); ++i) {
            lay.offsets[i] = lay.total;
            lay.indices[i] = enumerate_multiindices(sig, sig.coordinate(i).degree, W);
            for (std::size_t k = 0; k < lay.indices[i].size(); ++k)
                lay.slot[i][lay.indices[i][k]] = lay.total + k;
            lay.total += lay.indices[i].size();
        }
        return lay;
    }

    int weight_of(std::size_t flat) const {
        for (std::size_t i = 0; i < offsets.size(); ++i) {
            std::size_t end =
                (i + 1 < offsets.size()) ? offsets[i + 1] : total;
            if (flat >= offsets[i] && flat < end)
                return indices[i][flat - offsets[i]].weight();
        }
        return 0;
    }
};

// Integrate the underlying ordinary field from a base point. The reached
// interval estimates the maximal existence interval; blow-up or step
// underflow stop a direction and set its flag.
struct UnderlyingFlowResult {
    DenseTrajectory trajectory;
    FlowDomainEstimate domain;
};

inline UnderlyingFlowResult integrate_underlying(const OrdinaryVectorField& X0,
                                                 const std::vector<double>& x0,
                                                 double t_lo, double t_hi,
                                                 const Config& cfg) {
    const GradedSignature& sig = *X0.sig;
    if (x0.size() != sig.base_count())
        throw EvaluationError("initial point dimension does not match the signature");
    auto rhs = [&X0, &sig](double, const std::vector<double>& y, std::vector<double>& dy) {
        Assignment at;
        for (std::size_t i = 0; i < sig.base_count(); ++i) at[sig.base_name(i)] = y[i];
        for (std::size_t i = 0; i < X0.components.size(); ++i)
            dy[i] = X0.components[i].eval(at);
    };
    UnderlyingFlowResult out{integrate_ode(rhs, x0, t_lo, t_hi, cfg), {}};
    out.domain.t_minus = out.trajectory.t_min();
    out.domain.t_plus = out.trajectory.t_max();
    out.domain.blowup_backward = out.trajectory.blowup_backward;
    out.domain.blowup_forward = out.trajectory.blowup_forward;
    return out;
}

// Jointly integrated coefficient system of the flow of a degree-zero field,
// at one base initial point: every theta^lambda_p(x0, t) with weight <= W.
class FlowJet {
public:
    FlowJet(VectorField X, std::vector<double> x0, std::vector<double> seed,
            PivotalLayout layout, DenseTrajectory traj, Config cfg)
        : X_(std::move(X)), x0_(std::move(x0)), seed_(std::move(seed)),
          layout_(std::move(layout)), traj_(std::move(traj)), cfg_(cfg) {
        domain_.t_minus = traj_.t_min();
        domain_.t_plus = traj_.t_max();
        domain_.blowup_backward = traj_.blowup_backward;
        domain_.blowup_forward = traj_.blowup_forward;
    }

    const VectorField& generator() const { return X_; }
    const SignaturePtr& signature_ptr() const { return X_.signature_ptr(); }
    const GradedSignature& signature() const { return X_.signature(); }
    const std::vector<double>& base_point() const { return x0_; }
    const std::vector<double>& seed_state() const { return seed_; }
    const PivotalLayout& layout() const { return layout_; }
    const DenseTrajectory& trajectory() const { return traj_; }
    const FlowDomainEstimate& domain() const { return domain_; }
    const Config& config() const { return cfg_; }

    std::vector<double> state_at(double t) const {
        if (!domain_.contains(t))
            throw OutOfIntegratedRange("t outside the integrated flow interval");
        return traj_.value(t);
    }

    double coefficient(std::size_t coord_index, const MultiIndex& p, double t) const {
        auto state = state_at(t);
        auto it = layout_.slot[coord_index].find(p);
        if (it == layout_.slot[coord_index].end()) return 0.0;
        return state[it->second];
    }

    // image of the base point under the underlying flow at time t
    std::vector<double> underlying_at(double t) const {
        auto state = state_at(t);
        const GradedSignature& sig = signature();
        std::vector<double> out(sig.base_count());
        for (std::size_t i = 0; i < sig.base_count(); ++i) {
            MultiIndex zero = MultiIndex::zero(sig);
            out[i] = state[layout_.slot[sig.base_coordinate(i)].at(zero)];
        }
        return out;
    }

    // the flow at time t as a numeric graded map M -> M
    JetMap map_at(double t) const {
        auto state = state_at(t);
        const GradedSignature& sig = signature();
        JetMap m{signature_ptr(), signature_ptr(), X_.weight_cap(), {}, {}};
        m.pullbacks.reserve(sig.size());
        for (std::size_t i = 0; i < sig.size(); ++i) {
            NumericJet jet{signature_ptr(), sig.coordinate(i).degree, {}};
            for (std::size_t k = 0; k < layout_.indices[i].size(); ++k)
                jet.add(layout_.indices[i][k], state[layout_.offsets[i] + k]);
            m.pullbacks.push_back(std::move(jet));
        }
        auto base = underlying_at(t);
        for (std::size_t i = 0; i < sig.base_count(); ++i)
            m.image[sig.base_name(i)] = base[i];
        return m;
    }

private:
    VectorField X_;
    std::vector<double> x0_;
    std::vector<double> seed_;
    PivotalLayout layout_;
    DenseTrajectory traj_;
    FlowDomainEstimate domain_;
    Config cfg_;
};

namespace detail {

// Persistent tables of d_I X^lambda_r for the pivotal right-hand side.
struct PivotalRhs {
    const VectorField& X;
    const PivotalLayout& layout;
    Config cfg;
    // per coordinate: term keys of X^lambda and derivative expression tables
    std::vector<std::vector<MultiIndex>> term_keys;
    std::vector<std::map<std::pair<MultiIndex, std::vector<int>>, ScalarExpr>> tables;

    PivotalRhs(const VectorField& x, const PivotalLayout& lay, const Config& c)
        : X(x), layout(lay), cfg(c) {
        const GradedSignature& sig = X.signature();
        term_keys.resize(sig.size());
        tables.resize(sig.size());
        std::vector<bool> all_active(sig.base_count(), true);
        std::vector<BaseMultiIndex> taylor;
        enumerate_base_indices(all_active, X.weight_cap(), taylor);
        for (std::size_t l = 0; l < sig.size(); ++l) {
            for (const auto& [r, c_expr] : X.component(l).terms()) {
                term_keys[l].push_back(r);
                for (const auto& I : taylor) {
                    ScalarExpr d = c_expr;
                    for (std::size_t i = 0; i < I.exps.size(); ++i)
                        for (int n = 0; n < I.exps[i]; ++n)
                            d = d.diff(sig.base_name(i));
                    tables[l][{r, I.exps}] = std::move(d);
                }
            }
        }
    }

    JetMap map_from_state(const std::vector<double>& y) const {
        const GradedSignature& sig = X.signature();
        JetMap m{X.signature_ptr(), X.signature_ptr(), X.weight_cap(), {}, {}};
        m.pullbacks.reserve(sig.size());
        for (std::size_t i = 0; i < sig.size(); ++i) {
            NumericJet jet{X.signature_ptr(), sig.coordinate(i).degree, {}};
            for (std::size_t k = 0; k < layout.indices[i].size(); ++k)
                jet.add(layout.indices[i][k], y[layout.offsets[i] + k]);
            m.pullbacks.push_back(std::move(jet));
        }
        for (std::size_t i = 0; i < sig.base_count(); ++i) {
            MultiIndex zero = MultiIndex::zero(sig);
            m.image[sig.base_name(i)] =
                y[layout.slot[sig.base_coordinate(i)].at(zero)];
        }
        return m;
    }

    void operator()(double, const std::vector<double>& y, std::vector<double>& dy) const {
        const GradedSignature& sig = X.signature();
        JetMap m = map_from_state(y);
        for (std::size_t l = 0; l < sig.size(); ++l) {
            auto provider = [this, l, &m](const MultiIndex& r,
                                          const std::vector<int>& I) -> double {
                auto it = tables[l].find({r, I});
                if (it == tables[l].end()) return 0.0;
                return it->second.eval(m.image);
            };
            NumericJet rate = assemble_pullback(m, X.component(l).degree(),
                                                term_keys[l], provider);
            for (std::size_t k = 0; k < layout.indices[l].size(); ++k)
                dy[layout.offsets[l] + k] = rate.coefficient(layout.indices[l][k]);
        }
    }
};

// The weight-w rates may depend only on weights <= w (the paper's induction
// makes the system triangular); verified once per solve at the seed state.
inline void assert_triangular(const PivotalRhs& rhs, const std::vector<double>& y0,
                              int W) {
    std::vector<double> full(y0.size()), cut(y0.size());
    rhs(0.0, y0, full);
    for (int w = 0; w < W; ++w) {
        std::vector<double> y = y0;
        for (std::size_t s = 0; s < y.size(); ++s)
            if (rhs.layout.weight_of(s) > w) y[s] = 0.0;
        rhs(0.0, y, cut);
        for (std::size_t s = 0; s < y.size(); ++s)
            if (rhs.layout.weight_of(s) <= w && cut[s] != full[s])
                throw Error("pivotal system lost triangularity at weight " +
                            std::to_string(w));
    }
}

} // namespace detail

// identity seed: theta^i_0 = x0^i, theta^mu_{p(mu)} = 1, all else 0
inline std::vector<double> identity_seed(const GradedSignature& sig,
                                         const PivotalLayout& layout,
                                         const std::vector<double>& x0) {
    std::vector<double> y0(layout.total, 0.0);
    for (std::size_t i = 0; i < sig.base_count(); ++i)
        y0[layout.slot[sig.base_coordinate(i)].at(MultiIndex::zero(sig))] = x0[i];
    for (std::size_t mu = 0; mu < sig.graded_count(); ++mu) {
        std::size_t ci = sig.graded_coordinate(mu);
        y0[layout.slot[ci].at(MultiIndex::unit(sig, mu))] = 1.0;
    }
    return y0;
}

// Solve the full coupled coefficient system d/dt theta^lambda_p =
// [theta*(X^lambda)]_p with the given seed (defaults to the identity map) by
// one joint adaptive integration.
inline FlowJet solve_pivotal_seeded(const VectorField& X, const std::vector<double>& seed,
                                    double t_lo, double t_hi, const Config& cfg) {
    if (X.degree() != 0)
        throw DegreeError("the pivotal system integrates degree-zero fields");
    PivotalLayout layout = PivotalLayout::build(X.signature(), X.weight_cap());
    if (seed.size() != layout.total)
        throw EvaluationError("seed state has the wrong dimension");
    detail::PivotalRhs rhs(X, layout, cfg);
    detail::assert_triangular(rhs, seed, X.weight_cap());

    std::vector<double> x0(X.signature().base_count());
    for (std::size_t i = 0; i < x0.size(); ++i) {
        MultiIndex zero = MultiIndex::zero(X.signature());
        x0[i] = seed[layout.slot[X.signature().base_coordinate(i)].at(zero)];
    }

    auto traj = integrate_ode([&rhs](double t, const std::vector<double>& y,
                                     std::vector<double>& dy) { rhs(t, y, dy); },
                              seed, t_lo, t_hi, cfg);
    return FlowJet(X, std::move(x0), seed, std::move(layout), std::move(traj), cfg);
}

inline FlowJet solve_pivotal(const VectorField& X, const std::vector<double>& x0,
                             double t_lo, double t_hi, const Config& cfg) {
    PivotalLayout layout = PivotalLayout::build(X.signature(), X.weight_cap());
    return solve_pivotal_seeded(X, identity_seed(X.signature(), layout, x0), t_lo, t_hi,
                                cfg);
}

// numeric jet of theta*(f) at (x0, t)
inline NumericJet flow_pullback_at(const FlowJet& jet, const GradedFunction& f, double t) {
    return numeric_pullback(jet.map_at(t), f);
}

// --- fundamental matrices and the sequential cross-check --------------------

struct MatrixPath {
    int degree_j = 0;
    std::vector<std::size_t> slots; // graded slots of degree j, defining row order
    DenseTrajectory traj;           // n x n entries, row-major

    std::vector<double> at(double t) const { return traj.value(t); }
};

namespace detail {

inline std::vector<double> invert_dense(std::vector<double> a, std::size_t n) {
    std::vector<double> inv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (a[piv * n + col] == 0.0) throw IllConditioned("singular fundamental matrix");
        if (piv != col)
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(a[piv * n + c], a[col * n + c]);
                std::swap(inv[piv * n + c], inv[col * n + c]);
            }
        double d = a[col * n + col];
        for (std::size_t c = 0; c < n; ++c) {
            a[col * n + c] /= d;
            inv[col * n + c] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            double m = a[r * n + col];
            if (m == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a[r * n + c] -= m * a[col * n + c];
                inv[r * n + c] -= m * inv[col * n + c];
            }
        }
    }
    return inv;
}

inline double inf_norm_matrix(const std::vector<double>& a, std::size_t n) {
    double worst = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < n; ++c) s += std::abs(a[r * n + c]);
        worst = std::max(worst, s);
    }
    return worst;
}

} // namespace detail

// Fundamental solution Phi_j of d/dt Phi = A_j(x,t) Phi, Phi(0) = 1, with
// [A_j]^mu_lambda = X^mu_{p(lambda)} evaluated along the underlying
// trajectory. Flags ill-conditioning beyond cfg.cond_limit.
inline MatrixPath fundamental_matrix(const VectorField& X, int degree_j,
                                     const DenseTrajectory& base_traj, double t_lo,
                                     double t_hi, const Config& cfg) {
    const GradedSignature& sig = X.signature();
    auto slots = sig.graded_slots_of_degree(degree_j);
    if (slots.empty())
        throw DegreeError("no graded coordinates of degree " + std::to_string(degree_j));
    const std::size_t n = slots.size();

    // entries of A_j as expressions in the base coordinates
    std::vector<ScalarExpr> entries(n * n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            MultiIndex p_lambda = MultiIndex::unit(sig, slots[c]);
            entries[r * n + c] =
                X.component(sig.graded_coordinate(slots[r])).coefficient(p_lambda);
        }

    auto rhs = [&](double t, const std::vector<double>& phi, std::vector<double>& dphi) {
        auto base = base_traj.value(t);
        Assignment at;
        for (std::size_t i = 0; i < sig.base_count(); ++i) at[sig.base_name(i)] = base[i];
        std::vector<double> A(n * n);
        for (std::size_t e = 0; e < n * n; ++e) A[e] = entries[e].eval(at);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) s += A[r * n + k] * phi[k * n + c];
                dphi[r * n + c] = s;
            }
    };

    std::vector<double> phi0(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) phi0[i * n + i] = 1.0;
    MatrixPath out{degree_j, slots,
                   integrate_ode(rhs, phi0, std::max(t_lo, base_traj.t_min()),
                                 std::min(t_hi, base_traj.t_max()), cfg)};

    for (const auto& node : out.traj.nodes) {
        auto inv = detail::invert_dense(node.y, n);
        double cond =
            detail::inf_norm_matrix(node.y, n) * detail::inf_norm_matrix(inv, n);
        if (cond > cfg.cond_limit)
            throw IllConditioned("fundamental matrix condition number " +
                                 std::to_string(cond));
    }
    return out;
}

struct CrosscheckReport {
    double worst_weight1 = 0.0;
    std::string worst_weight1_where;
    double worst_weight2 = -1.0; // negative: no weight-2 base coefficients present
    std::string worst_weight2_where;

    void require(double tol) const {
        if (worst_weight1 > tol)
            throw MismatchBeyondTolerance("weight-1 cross-check off by " +
                                          std::to_string(worst_weight1) + " at " +
                                          worst_weight1_where);
        if (worst_weight2 > tol)
            throw MismatchBeyondTolerance("weight-2 cross-check off by " +
                                          std::to_string(worst_weight2) + " at " +
                                          worst_weight2_where);
    }
};

// Sequential construction of the paper's proof, kept as an independent check
// of the joint integrator. Weight 1: theta^mu_{p(nu)} = sum_lambda
// [Phi_{|mu|}]^mu_lambda phi^lambda_{p(nu)}. Weight 2 (base coordinates):
// Duhamel integral against Phi_0.
inline CrosscheckReport crosscheck_weight_one(const FlowJet& jet, const Config& cfg) {
    const GradedSignature& sig = jet.signature();
    const auto& layout = jet.layout();
    CrosscheckReport report;

    // the sequential path is integrated tighter than the joint one, so the
    // comparison error is dominated by the joint solve itself
    Config tight = cfg;
    tight.ode_abs_tol = cfg.ode_abs_tol * 1e-2;
    tight.ode_rel_tol = cfg.ode_rel_tol * 1e-2;
    tight.max_step = std::min(cfg.max_step, 0.02);

    // underlying trajectory reused from the jet itself
    auto base_traj_full = jet.trajectory();
    DenseTrajectory base_traj;
    base_traj.blowup_backward = base_traj_full.blowup_backward;
    base_traj.blowup_forward = base_traj_full.blowup_forward;
    for (const auto& node : base_traj_full.nodes) {
        DenseTrajectory::Node slim;
        slim.t = node.t;
        for (std::size_t i = 0; i < sig.base_count(); ++i) {
            std::size_t s = layout.slot[sig.base_coordinate(i)].at(MultiIndex::zero(sig));
            slim.y.push_back(node.y[s]);
            slim.f.push_back(node.f[s]);
        }
        base_traj.nodes.push_back(std::move(slim));
    }

    // weight 1: graded coordinates against the fundamental matrices, compared
    // at the joint trajectory's own nodes (exact states, no interpolation)
    for (int j : sig.graded_degrees()) {
        MatrixPath phi = fundamental_matrix(jet.generator(), j, base_traj,
                                            base_traj.t_min(), base_traj.t_max(), tight);
        const auto& slots = phi.slots;
        const std::size_t n = slots.size();
        for (const auto& node : jet.trajectory().nodes) {
            auto phi_t = phi.at(node.t);
            for (std::size_t r = 0; r < n; ++r) {
                std::size_t mu_ci = sig.graded_coordinate(slots[r]);
                for (std::size_t c = 0; c < n; ++c) {
                    // closed form with seed phi: sum_l Phi^mu_l seed^l_{p(nu)}
                    double closed = 0.0;
                    MultiIndex p_nu = MultiIndex::unit(sig, slots[c]);
                    for (std::size_t l = 0; l < n; ++l) {
                        std::size_t lam_ci = sig.graded_coordinate(slots[l]);
                        auto it = layout.slot[lam_ci].find(p_nu);
                        if (it == layout.slot[lam_ci].end()) continue;
                        closed += phi_t[r * n + l] * jet.seed_state()[it->second];
                    }
                    auto slot_it = layout.slot[mu_ci].find(p_nu);
                    if (slot_it == layout.slot[mu_ci].end()) continue;
                    double joint = node.y[slot_it->second];
                    double diff = std::abs(closed - joint);
                    if (diff > report.worst_weight1) {
                        report.worst_weight1 = diff;
                        report.worst_weight1_where = sig.coordinate(mu_ci).name + "_" +
                                                     p_nu.str(sig) + " at t=" +
                                                     std::to_string(node.t);
                    }
                }
            }
        }
    }

    // weight 2, base coordinates: theta^i_p = sum_k [Phi_0]^i_k c^k_p with
    // c^k_p(t) = sum_l int_0^t y^l_p(s) [Phi_0^{-1}(s)]^k_l ds and
    // y^l_p = [theta*(X^l)]_p - sum_k [A_0]^l_k theta^k_p  (identity seed
    // contributes nothing at weight 2)
    std::vector<MultiIndex> w2;
    for (const auto& p : enumerate_multiindices(sig, 0, jet.generator().weight_cap()))
        if (p.weight() == 2) w2.push_back(p);
    if (!w2.empty() && sig.base_count() > 0) {
        const std::size_t n0 = sig.base_count();
        // Phi_0 from A_0 = d_k X^i_0 along the base trajectory
        std::vector<ScalarExpr> a0(n0 * n0);
        for (std::size_t r = 0; r < n0; ++r)
            for (std::size_t c = 0; c < n0; ++c)
                a0[r * n0 + c] = jet.generator()
                                     .component(sig.base_coordinate(r))
                                     .coefficient(MultiIndex::zero(sig))
                                     .diff(sig.base_name(c));
        auto rhs0 = [&](double t, const std::vector<double>& phi,
                        std::vector<double>& dphi) {
            auto base = base_traj.value(t);
            Assignment at;
            for (std::size_t i = 0; i < n0; ++i) at[sig.base_name(i)] = base[i];
            std::vector<double> A(n0 * n0);
            for (std::size_t e = 0; e < n0 * n0; ++e) A[e] = a0[e].eval(at);
            for (std::size_t r = 0; r < n0; ++r)
                for (std::size_t c = 0; c < n0; ++c) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < n0; ++k)
                        s += A[r * n0 + k] * phi[k * n0 + c];
                    dphi[r * n0 + c] = s;
                }
        };
        std::vector<double> id(n0 * n0, 0.0);
        for (std::size_t i = 0; i < n0; ++i) id[i * n0 + i] = 1.0;
        DenseTrajectory phi0 =
            integrate_ode(rhs0, id, base_traj.t_min(), base_traj.t_max(), tight);

        detail::PivotalRhs rhs(jet.generator(), layout, cfg);
        auto y_inhom = [&](double s, const MultiIndex& p, std::vector<double>& y_out) {
            auto state = jet.state_at(s);
            std::vector<double> rate(layout.total);
            rhs(s, state, rate);
            auto base = base_traj.value(s);
            Assignment at;
            for (std::size_t i = 0; i < n0; ++i) at[sig.base_name(i)] = base[i];
            for (std::size_t l = 0; l < n0; ++l) {
                double full = rate[layout.slot[sig.base_coordinate(l)].at(p)];
                double linear = 0.0;
                for (std::size_t k = 0; k < n0; ++k)
                    linear += a0[l * n0 + k].eval(at) *
                              state[layout.slot[sig.base_coordinate(k)].at(p)];
                y_out[l] = full - linear;
            }
        };

        // composite Simpson over a uniform refinement of the reached interval
        for (const auto& p : w2) {
            for (double t_end : {base_traj.t_max() * 0.5, base_traj.t_max(),
                                 base_traj.t_min() * 0.5, base_traj.t_min()}) {
                if (t_end == 0.0) continue;
                const int segments = 128; // even
                double h = t_end / segments;
                std::vector<double> c_acc(n0, 0.0);
                std::vector<double> integrand(n0), y_val(n0);
                auto eval_integrand = [&](double s, std::vector<double>& out) {
                    y_inhom(s, p, y_val);
                    auto phi_s = phi0.value(s);
                    auto inv = detail::invert_dense(phi_s, n0);
                    for (std::size_t k = 0; k < n0; ++k) {
                        double acc = 0.0;
                        for (std::size_t l = 0; l < n0; ++l)
                            acc += y_val[l] * inv[k * n0 + l];
                        out[k] = acc;
                    }
                };
                std::vector<double> sum(n0, 0.0), tmp(n0);
                for (int seg = 0; seg <= segments; ++seg) {
                    eval_integrand(seg * h, tmp);
                    double w = (seg == 0 || seg == segments) ? 1.0
                               : (seg % 2 == 1)              ? 4.0
                                                             : 2.0;
                    for (std::size_t k = 0; k < n0; ++k) sum[k] += w * tmp[k];
                }
                for (std::size_t k = 0; k < n0; ++k) c_acc[k] = sum[k] * h / 3.0;

                auto phi_t = phi0.value(t_end);
                for (std::size_t i = 0; i < n0; ++i) {
                    double closed = 0.0;
                    for (std::size_t k = 0; k < n0; ++k)
                        closed += phi_t[i * n0 + k] *
                                  (jet.seed_state()[layout.slot[sig.base_coordinate(k)]
                                                        .at(p)] +
                                   c_acc[k]);
                    double joint = jet.coefficient(sig.base_coordinate(i), p, t_end);
                    double diff = std::abs(closed - joint);
                    if (diff > report.worst_weight2) {
                        report.worst_weight2 = diff;
                        report.worst_weight2_where = sig.base_name(i) + "_" + p.str(sig) +
                                                     " at t=" + std::to_string(t_end);
                    }
                }
            }
        }
    }
    return report;
}

} // namespace gflow
