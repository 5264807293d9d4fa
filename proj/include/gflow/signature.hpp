#pragma once

#include <algorithm>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gflow/errors.hpp"

namespace gflow {

struct Coordinate {
    std::string name;
    int degree = 0;
};

// Ordered coordinate system of a graded domain. The order is canonical: all
// monomials and Koszul signs are taken relative to it.
class GradedSignature {
public:
    explicit GradedSignature(std::vector<Coordinate> coordinates)
        : coords_(std::move(coordinates)) {
        if (coords_.empty())
            throw ValidationError("signature needs at least one coordinate");
        std::set<std::string> seen;
        for (std::size_t i = 0; i < coords_.size(); ++i) {
            if (!seen.insert(coords_[i].name).second)
                throw ValidationError("duplicate coordinate name '" + coords_[i].name + "'");
            if (coords_[i].degree == 0) base_.push_back(i);
            else graded_.push_back(i);
        }
    }

    std::size_t size() const { return coords_.size(); }
    const Coordinate& coordinate(std::size_t i) const { return coords_[i]; }
    const std::vector<Coordinate>& coordinates() const { return coords_; }

    std::size_t base_count() const { return base_.size(); }     // n_0
    std::size_t graded_count() const { return graded_.size(); } // n_*

    // coordinate index of the i-th base / mu-th graded coordinate
    std::size_t base_coordinate(std::size_t i) const { return base_[i]; }
    std::size_t graded_coordinate(std::size_t mu) const { return graded_[mu]; }

    int graded_degree(std::size_t mu) const { return coords_[graded_[mu]].degree; }
    const std::string& base_name(std::size_t i) const { return coords_[base_[i]].name; }
    const std::string& graded_name(std::size_t mu) const { return coords_[graded_[mu]].name; }

    bool has(const std::string& name) const {
        return std::any_of(coords_.begin(), coords_.end(),
                           [&](const Coordinate& c) { return c.name == name; });
    }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < coords_.size(); ++i)
            if (coords_[i].name == name) return i;
        throw ValidationError("unknown coordinate '" + name + "'");
    }

    std::vector<std::string> base_names() const {
        std::vector<std::string> out;
        out.reserve(base_.size());
        for (auto i : base_) out.push_back(coords_[i].name);
        return out;
    }

    // distinct nonzero degrees present, ascending
    std::vector<int> graded_degrees() const {
        std::set<int> degs;
        for (auto i : graded_) degs.insert(coords_[i].degree);
        return {degs.begin(), degs.end()};
    }

    // graded slots of a given degree (the paper's P_j)
    std::vector<std::size_t> graded_slots_of_degree(int j) const {
        std::vector<std::size_t> out;
        for (std::size_t mu = 0; mu < graded_.size(); ++mu)
            if (graded_degree(mu) == j) out.push_back(mu);
        return out;
    }

    bool operator==(const GradedSignature& other) const {
        if (coords_.size() != other.coords_.size()) return false;
        for (std::size_t i = 0; i < coords_.size(); ++i)
            if (coords_[i].name != other.coords_[i].name ||
                coords_[i].degree != other.coords_[i].degree)
                return false;
        return true;
    }
    bool operator!=(const GradedSignature& other) const { return !(*this == other); }

private:
    std::vector<Coordinate> coords_;
    std::vector<std::size_t> base_;   // indices of degree-zero coordinates
    std::vector<std::size_t> graded_; // indices of nonzero-degree coordinates
};

using SignaturePtr = std::shared_ptr<const GradedSignature>;

inline SignaturePtr make_signature(std::vector<Coordinate> coords) {
    return std::make_shared<GradedSignature>(std::move(coords));
}

// Signature of a product M x R[-k]: the time coordinate is appended last.
inline SignaturePtr extend_signature(const GradedSignature& sig,
                                     const std::string& time_name, int time_degree) {
    auto coords = sig.coordinates();
    coords.push_back({time_name, time_degree});
    return make_signature(std::move(coords));
}

// Exponent vector over the nonzero-degree coordinates of a signature.
// Odd-degree coordinates square to zero, so their exponents stay in {0,1}.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> exponents) : p_(std::move(exponents)) {}

    static MultiIndex zero(const GradedSignature& sig) {
        return MultiIndex(std::vector<int>(sig.graded_count(), 0));
    }

    // the paper's p(mu): 1 in slot mu, 0 elsewhere
    static MultiIndex unit(const GradedSignature& sig, std::size_t mu) {
        MultiIndex p = zero(sig);
        p.p_[mu] = 1;
        return p;
    }

    std::size_t size() const { return p_.size(); }
    int operator[](std::size_t mu) const { return p_[mu]; }
    int& operator[](std::size_t mu) { return p_[mu]; }
    const std::vector<int>& exponents() const { return p_; }

    int weight() const {
        int w = 0;
        for (int e : p_) w += e;
        return w;
    }

    int degree(const GradedSignature& sig) const {
        int d = 0;
        for (std::size_t mu = 0; mu < p_.size(); ++mu)
            d += p_[mu] * sig.graded_degree(mu);
        return d;
    }

    bool valid(const GradedSignature& sig) const {
        if (p_.size() != sig.graded_count()) return false;
        for (std::size_t mu = 0; mu < p_.size(); ++mu) {
            if (p_[mu] < 0) return false;
            if (p_[mu] > 1 && (sig.graded_degree(mu) % 2 != 0)) return false;
        }
        return true;
    }

    bool is_zero() const {
        return std::all_of(p_.begin(), p_.end(), [](int e) { return e == 0; });
    }

    bool dominates(const MultiIndex& q) const {
        for (std::size_t mu = 0; mu < p_.size(); ++mu)
            if (q.p_[mu] > p_[mu]) return false;
        return true;
    }

    MultiIndex operator+(const MultiIndex& q) const {
        MultiIndex r = *this;
        for (std::size_t mu = 0; mu < p_.size(); ++mu) r.p_[mu] += q.p_[mu];
        return r;
    }

    MultiIndex operator-(const MultiIndex& q) const {
        if (!dominates(q))
            throw IndexNotDominated("multi-index subtraction requires q <= p");
        MultiIndex r = *this;
        for (std::size_t mu = 0; mu < p_.size(); ++mu) r.p_[mu] -= q.p_[mu];
        return r;
    }

    bool operator==(const MultiIndex& q) const { return p_ == q.p_; }
    bool operator!=(const MultiIndex& q) const { return p_ != q.p_; }
    bool operator<(const MultiIndex& q) const {
        return std::lexicographical_compare(p_.begin(), p_.end(), q.p_.begin(), q.p_.end());
    }

    std::string str(const GradedSignature& sig) const {
        std::string out;
        for (std::size_t mu = 0; mu < p_.size(); ++mu) {
            if (p_[mu] == 0) continue;
            if (!out.empty()) out += "*";
            out += sig.graded_name(mu);
            if (p_[mu] > 1) out += "^" + std::to_string(p_[mu]);
        }
        return out.empty() ? "1" : out;
    }

private:
    std::vector<int> p_;
};

// All multi-indices of the given degree with weight <= max_weight, in
// lexicographic order over the signature's coordinate order.
inline std::vector<MultiIndex> enumerate_multiindices(const GradedSignature& sig,
                                                      int degree, int max_weight) {
    std::vector<MultiIndex> out;
    MultiIndex current = MultiIndex::zero(sig);
    const std::size_t n = sig.graded_count();

    auto rec = [&](auto&& self, std::size_t mu, int weight_left, int deg_so_far) -> void {
        if (mu == n) {
            if (deg_so_far == degree) out.push_back(current);
            return;
        }
        int cap = (sig.graded_degree(mu) % 2 != 0) ? std::min(1, weight_left) : weight_left;
        for (int e = 0; e <= cap; ++e) {
            current[mu] = e;
            self(self, mu + 1, weight_left - e, deg_so_far + e * sig.graded_degree(mu));
        }
        current[mu] = 0;
    };
    if (max_weight >= 0) rec(rec, 0, max_weight, 0);
    std::sort(out.begin(), out.end());
    return out;
}

// Koszul sign of merging the monomial words xi^a then xi^b into xi^(a+b):
// each crossing of two odd factors contributes -1.
inline int koszul_merge_sign(const GradedSignature& sig, const MultiIndex& a,
                             const MultiIndex& b) {
    int swaps = 0;
    for (std::size_t nu = 0; nu < b.size(); ++nu) {
        if (b[nu] == 0 || sig.graded_degree(nu) % 2 == 0) continue;
        int odd_after = 0; // odd factors of a that xi^nu must cross
        for (std::size_t mu = nu + 1; mu < a.size(); ++mu)
            if (a[mu] != 0 && sig.graded_degree(mu) % 2 != 0) odd_after += a[mu];
        swaps += b[nu] * odd_after;
    }
    return swaps % 2 == 0 ? 1 : -1;
}

// Sign epsilon with xi^(p-q) * xi^q = epsilon * xi^p.
inline int split_sign(const GradedSignature& sig, const MultiIndex& p, const MultiIndex& q) {
    return koszul_merge_sign(sig, p - q, q);
}

// Sign picked up by the left derivative d/d(xi^mu) passing over the factors
// preceding slot mu in xi^p. Meaningful only when p[mu] > 0.
inline int partial_sign(const GradedSignature& sig, const MultiIndex& p, std::size_t mu) {
    if (sig.graded_degree(mu) % 2 == 0) return 1;
    int crossings = 0;
    for (std::size_t nu = 0; nu < mu; ++nu)
        if (p[nu] != 0 && sig.graded_degree(nu) % 2 != 0) crossings += p[nu];
    return crossings % 2 == 0 ? 1 : -1;
}

} // namespace gflow
