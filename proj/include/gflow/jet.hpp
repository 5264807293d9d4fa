#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "gflow/graded_map.hpp"

namespace gflow {

// Homogeneous graded function with numeric coefficients: the value of a
// coefficient family at one base point (and time). Same Koszul algebra as
// GradedFunction, over doubles.
struct NumericJet {
    SignaturePtr sig;
    int degree = 0;
    std::map<MultiIndex, double> terms;

    double coefficient(const MultiIndex& p) const {
        auto it = terms.find(p);
        return it == terms.end() ? 0.0 : it->second;
    }

    void add(const MultiIndex& p, double v) {
        if (v == 0.0) return;
        auto [it, fresh] = terms.try_emplace(p, 0.0);
        it->second += v;
        if (it->second == 0.0) terms.erase(it);
    }
};

inline NumericJet jet_add(const NumericJet& a, const NumericJet& b) {
    NumericJet r = a;
    for (const auto& [p, v] : b.terms) r.add(p, v);
    return r;
}

inline NumericJet jet_scale(const NumericJet& a, double s) {
    NumericJet r{a.sig, a.degree, {}};
    for (const auto& [p, v] : a.terms) r.add(p, s * v);
    return r;
}

inline NumericJet jet_mul(const NumericJet& a, const NumericJet& b, int weight_cap) {
    NumericJet r{a.sig, a.degree + b.degree, {}};
    for (const auto& [pa, va] : a.terms)
        for (const auto& [pb, vb] : b.terms) {
            MultiIndex p = pa + pb;
            if (p.weight() > weight_cap || !p.valid(*a.sig)) continue;
            r.add(p, koszul_merge_sign(*a.sig, pa, pb) * va * vb);
        }
    return r;
}

inline double jet_max_abs(const NumericJet& a) {
    double m = 0.0;
    for (const auto& [p, v] : a.terms) m = std::max(m, std::abs(v));
    return m;
}

inline double jet_max_difference(const NumericJet& a, const NumericJet& b) {
    double m = 0.0;
    for (const auto& [p, v] : a.terms) m = std::max(m, std::abs(v - b.coefficient(p)));
    for (const auto& [p, v] : b.terms) m = std::max(m, std::abs(v - a.coefficient(p)));
    return m;
}

// Left partial with respect to a graded slot, on numbers.
inline NumericJet jet_partial_graded(const NumericJet& a, std::size_t mu) {
    NumericJet r{a.sig, a.degree - a.sig->graded_degree(mu), {}};
    for (const auto& [p, v] : a.terms) {
        if (p[mu] == 0) continue;
        MultiIndex q = p;
        q[mu] -= 1;
        r.add(q, partial_sign(*a.sig, p, mu) * p[mu] * v);
    }
    return r;
}

// Numeric graded map at a fixed source base point: coordinate pullbacks as
// numeric jets plus the image base point. This is one "column" of a flow at
// a given time, or any composition of such.
struct JetMap {
    SignaturePtr source;
    SignaturePtr target;
    int weight_cap = 0;
    std::vector<NumericJet> pullbacks;   // one per target coordinate
    std::map<std::string, double> image; // target base point (theta_0 of x0)
};

// Numeric graded function together with base-direction Taylor data at a
// point: term -> (multi-order I over base coordinates -> value of d_I coeff).
// Needed when a numeric function is itself pulled back through another map.
struct JetFunction {
    SignaturePtr sig;
    int degree = 0;
    int order = 0; // derivative data available for w(I) <= order
    std::map<MultiIndex, std::map<std::vector<int>, double>> terms;
};

// numeric value of a graded function at a base-point assignment
inline NumericJet jet_of(const GradedFunction& f, const Assignment& at) {
    NumericJet j{f.signature_ptr(), f.degree(), {}};
    for (const auto& [p, c] : f.terms()) j.add(p, c.eval(at));
    return j;
}

// a symbolic graded map frozen at a source base point
inline JetMap numeric_map_of(const GradedMap& phi, const Assignment& source_point) {
    JetMap m{phi.source_ptr(), phi.target_ptr(), phi.weight_cap(), {}, {}};
    const GradedSignature& T = phi.target();
    m.pullbacks.reserve(T.size());
    for (std::size_t i = 0; i < T.size(); ++i)
        m.pullbacks.push_back(jet_of(phi.coordinate_pullback(i), source_point));
    for (std::size_t i = 0; i < T.base_count(); ++i) {
        std::size_t ci = T.base_coordinate(i);
        m.image[T.base_name(i)] = phi.coordinate_pullback(ci).body().eval(source_point);
    }
    return m;
}

// Highest base-derivative order a pullback through this map can request:
// zero when the base pullbacks carry no graded corrections, otherwise
// bounded by the cap over the lightest correction.
inline int taylor_order_required(const JetMap& m) {
    const GradedSignature& T = *m.target;
    int min_w = 0;
    for (std::size_t i = 0; i < T.base_count(); ++i) {
        const NumericJet& jet = m.pullbacks[T.base_coordinate(i)];
        for (const auto& [p, v] : jet.terms) {
            if (p.is_zero()) continue;
            int w = p.weight();
            if (min_w == 0 || w < min_w) min_w = w;
        }
    }
    return min_w == 0 ? 0 : m.weight_cap / min_w;
}

namespace detail {

// d_I f_r evaluated at the image point, for expression coefficients
inline std::function<double(const MultiIndex&, const std::vector<int>&)>
expression_provider(const GradedFunction& f, const GradedSignature& target,
                    const std::map<std::string, double>& image,
                    std::map<std::pair<MultiIndex, std::vector<int>>, ScalarExpr>& cache) {
    return [&f, &target, &image, &cache](const MultiIndex& r, const std::vector<int>& I) {
        auto key = std::make_pair(r, I);
        auto it = cache.find(key);
        if (it == cache.end()) {
            ScalarExpr d = f.coefficient(r);
            for (std::size_t i = 0; i < I.size(); ++i)
                for (int n = 0; n < I[i]; ++n) d = d.diff(target.base_name(i));
            it = cache.emplace(key, std::move(d)).first;
        }
        return it->second.eval(image);
    };
}

} // namespace detail

// Core of the numeric pullback: the explicit coefficient formula
//   [theta*(f)]_p = sum_{q <= p} eps^{(p-q,q)}_p
//                   sum_{r: w(r) <= w(q)} [thetabar*(f_r)]_{p-q} [xi^r_*]_q
// with the Taylor part
//   [thetabar*(f_r)]_s = sum_{I: w(I) <= w(s)} (1/I!) (d_I f_r)(theta_0) [xbar^I_*]_s.
// The coefficient derivative values come from `provider(r, I)`.
inline NumericJet assemble_pullback(
    const JetMap& map, int f_degree, const std::vector<MultiIndex>& f_terms,
    const std::function<double(const MultiIndex&, const std::vector<int>&)>& provider) {
    const GradedSignature& T = *map.target;
    const GradedSignature& S = *map.source;
    const int W = map.weight_cap;

    // purely graded parts of base-coordinate pullbacks
    std::vector<NumericJet> xbar;
    std::vector<bool> active(T.base_count(), false);
    for (std::size_t i = 0; i < T.base_count(); ++i) {
        NumericJet b = map.pullbacks[T.base_coordinate(i)];
        b.terms.erase(MultiIndex::zero(S));
        active[i] = !b.terms.empty();
        xbar.push_back(std::move(b));
    }

    std::vector<BaseMultiIndex> taylor_indices;
    detail::enumerate_base_indices(active, W, taylor_indices);

    // [xbar^I_*] products, shared across all r
    std::vector<NumericJet> xbar_pow(taylor_indices.size());
    for (std::size_t k = 0; k < taylor_indices.size(); ++k) {
        NumericJet prod{map.source, 0, {{MultiIndex::zero(S), 1.0}}};
        for (std::size_t i = 0; i < taylor_indices[k].exps.size(); ++i)
            for (int n = 0; n < taylor_indices[k].exps[i]; ++n)
                prod = jet_mul(prod, xbar[i], W);
        xbar_pow[k] = std::move(prod);
    }

    // ordered powers [xi^r_*], memoized per multi-index r
    std::map<MultiIndex, NumericJet> xi_pow;
    auto xi_power = [&](const MultiIndex& r) -> const NumericJet& {
        auto it = xi_pow.find(r);
        if (it != xi_pow.end()) return it->second;
        NumericJet prod{map.source, 0, {{MultiIndex::zero(S), 1.0}}};
        for (std::size_t mu = 0; mu < r.size(); ++mu)
            for (int n = 0; n < r[mu]; ++n)
                prod = jet_mul(prod, map.pullbacks[T.graded_coordinate(mu)], W);
        return xi_pow.emplace(r, std::move(prod)).first->second;
    };

    NumericJet out{map.source, f_degree, {}};
    for (const auto& r : f_terms) {
        // thetabar*(f_r) as a numeric jet; vanished xbar powers never ask the
        // provider for a derivative, so nilpotency bounds the order needed
        NumericJet taylor{map.source, 0, {}};
        for (std::size_t k = 0; k < taylor_indices.size(); ++k) {
            if (xbar_pow[k].terms.empty()) continue;
            double v = provider(r, taylor_indices[k].exps);
            if (v == 0.0) continue;
            NumericJet term = jet_scale(xbar_pow[k], v / taylor_indices[k].factorial());
            taylor = jet_add(taylor, term);
        }
        out = jet_add(out, jet_mul(taylor, xi_power(r), W));
    }
    return out;
}

// Pullback of an expression-coefficient function through a numeric map.
inline NumericJet numeric_pullback(const JetMap& map, const GradedFunction& f) {
    if (f.signature() != *map.target)
        throw SignatureMismatch("function does not live on the jet map's target");
    std::vector<MultiIndex> keys;
    keys.reserve(f.terms().size());
    for (const auto& [r, c] : f.terms()) keys.push_back(r);
    std::map<std::pair<MultiIndex, std::vector<int>>, ScalarExpr> cache;
    auto provider = detail::expression_provider(f, *map.target, map.image, cache);
    return assemble_pullback(map, f.degree(), keys, provider);
}

// Pullback of a numeric function (with Taylor data at the map's image point)
// through a numeric map. Requests beyond the stored derivative order fail
// unless the corresponding xbar power vanishes.
inline NumericJet numeric_pullback_jet(const JetMap& map, const JetFunction& g) {
    if (*g.sig != *map.target)
        throw SignatureMismatch("jet function does not live on the jet map's target");
    std::vector<MultiIndex> keys;
    keys.reserve(g.terms.size());
    for (const auto& [r, data] : g.terms) keys.push_back(r);
    auto provider = [&g](const MultiIndex& r, const std::vector<int>& I) -> double {
        int w = 0;
        for (int e : I) w += e;
        const auto& data = g.terms.at(r);
        auto it = data.find(I);
        if (it != data.end()) return it->second;
        if (w > g.order)
            throw UnsupportedConfiguration(
                "composition needs base-derivative order " + std::to_string(w) +
                " but only " + std::to_string(g.order) + " is available");
        return 0.0;
    };
    return assemble_pullback(map, g.degree, keys, provider);
}

} // namespace gflow
