#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gflow/graded_map.hpp"
#include "gflow/vector_field.hpp"

namespace gflow::testing {

// --- deterministic generators ----------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    int uniform_int(int lo, int hi) { // inclusive
        return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    double coefficient() {
        // small half-integers keep brackets exactly zero or O(1)
        static constexpr double pool[] = {-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0, 3.0};
        return pool[eng_() % (sizeof(pool) / sizeof(pool[0]))];
    }

    bool chance(double p) {
        return static_cast<double>(eng_() % 1000000) < p * 1000000.0;
    }

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

inline ScalarExpr random_expr(Rng& rng, const std::vector<std::string>& vars, int depth) {
    if (depth <= 0 || rng.chance(0.3)) {
        if (rng.chance(0.4) || vars.empty()) return ScalarExpr(rng.coefficient());
        return ScalarExpr::variable(vars[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<int>(vars.size()) - 1))]);
    }
    switch (rng.uniform_int(0, 4)) {
    case 0:
        return random_expr(rng, vars, depth - 1) + random_expr(rng, vars, depth - 1);
    case 1:
        return random_expr(rng, vars, depth - 1) * random_expr(rng, vars, depth - 1);
    case 2:
        return ScalarExpr::power(random_expr(rng, vars, depth - 1), rng.uniform_int(1, 3));
    case 3:
        return ScalarExpr::exp(ScalarExpr(0.3) * random_expr(rng, vars, depth - 1));
    default:
        return ScalarExpr::sin(random_expr(rng, vars, depth - 1));
    }
}

// polynomial coefficients only (safe for substitution oracles)
inline ScalarExpr random_poly(Rng& rng, const std::vector<std::string>& vars, int depth) {
    if (depth <= 0 || rng.chance(0.35)) {
        if (rng.chance(0.4) || vars.empty()) return ScalarExpr(rng.coefficient());
        return ScalarExpr::variable(vars[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<int>(vars.size()) - 1))]);
    }
    if (rng.chance(0.5))
        return random_poly(rng, vars, depth - 1) + random_poly(rng, vars, depth - 1);
    return random_poly(rng, vars, depth - 1) * random_poly(rng, vars, depth - 1);
}

// Random homogeneous function with term weights <= max_weight (defaults to
// the cap). Laws that chain several products/derivatives need instances whose
// weights stay well below the ambient cap, or truncation shadows the law.
inline GradedFunction random_function(Rng& rng, const SignaturePtr& sig, int degree,
                                      int weight_cap, bool poly_coeffs = false,
                                      int max_weight = -1) {
    if (max_weight < 0) max_weight = weight_cap;
    GradedFunction f(sig, degree, weight_cap);
    auto base = sig->base_names();
    for (const auto& p : enumerate_multiindices(*sig, degree, max_weight)) {
        if (rng.chance(0.45)) continue;
        ScalarExpr c = poly_coeffs ? random_poly(rng, base, 2) : random_expr(rng, base, 2);
        f.add_coefficient(p, c);
    }
    return f;
}

inline VectorField random_field(Rng& rng, const SignaturePtr& sig, int degree,
                                int weight_cap, int max_weight = -1) {
    std::vector<GradedFunction> comps;
    comps.reserve(sig->size());
    for (std::size_t i = 0; i < sig->size(); ++i)
        comps.push_back(random_function(rng, sig, degree + sig->coordinate(i).degree,
                                        weight_cap, false, max_weight));
    return VectorField(sig, degree, std::move(comps));
}

// --- independent oracles ----------------------------------------------------

// central finite difference of eval in variable v
inline double fd_derivative(const ScalarExpr& e, const Assignment& at,
                            const std::string& v, double h = 1e-4) {
    Assignment hi = at, lo = at;
    hi[v] += h;
    lo[v] -= h;
    return (e.eval(hi) - e.eval(lo)) / (2.0 * h);
}

// brute-force multi-index enumeration: filter every exponent tuple
inline std::vector<MultiIndex> brute_force_indices(const GradedSignature& sig, int degree,
                                                   int max_weight) {
    std::vector<MultiIndex> out;
    std::size_t n = sig.graded_count();
    std::vector<int> cur(n, 0);
    auto rec = [&](auto&& self, std::size_t mu) -> void {
        if (mu == n) {
            MultiIndex p{std::vector<int>(cur)};
            if (p.weight() <= max_weight && p.valid(sig) && p.degree(sig) == degree)
                out.push_back(p);
            return;
        }
        for (int e = 0; e <= max_weight; ++e) {
            cur[mu] = e;
            self(self, mu + 1);
        }
        cur[mu] = 0;
    };
    rec(rec, 0);
    std::sort(out.begin(), out.end());
    return out;
}

// Koszul sign by explicit bubble sort of the concatenated factor word
inline int bubble_sort_sign(const GradedSignature& sig, const MultiIndex& a,
                            const MultiIndex& b) {
    std::vector<std::size_t> word;
    for (std::size_t mu = 0; mu < a.size(); ++mu)
        for (int e = 0; e < a[mu]; ++e) word.push_back(mu);
    for (std::size_t mu = 0; mu < b.size(); ++mu)
        for (int e = 0; e < b[mu]; ++e) word.push_back(mu);
    int sign = 1;
    for (std::size_t i = 0; i + 1 < word.size(); ++i)
        for (std::size_t j = 0; j + 1 < word.size() - i; ++j)
            if (word[j] > word[j + 1]) {
                if (sig.graded_degree(word[j]) % 2 != 0 &&
                    sig.graded_degree(word[j + 1]) % 2 != 0)
                    sign = -sign;
                std::swap(word[j], word[j + 1]);
            }
    return sign;
}

// --- common signatures ------------------------------------------------------

inline SignaturePtr sig_two_odd() {
    return make_signature({{"x", 0}, {"xi1", 1}, {"xi2", 1}});
}

// odd pair of opposite degrees: xi1*xi2 is a degree-0 monomial
inline SignaturePtr sig_pair() {
    return make_signature({{"x", 0}, {"xi1", 1}, {"xi2", -1}});
}

inline SignaturePtr sig_mixed() {
    // 3 odd and 2 even graded coordinates over 2 base coordinates
    return make_signature({{"x", 0},
                           {"y", 0},
                           {"xi1", 1},
                           {"xi2", 1},
                           {"xi3", -1},
                           {"z", 2},
                           {"w", -2}});
}

inline SignaturePtr sig_euler() {
    return make_signature({{"x", 0}, {"xi1", 1}, {"xi2", 1}, {"z", 2}});
}

} // namespace gflow::testing
