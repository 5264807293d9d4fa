#include <catch2/catch_amalgamated.hpp>

#include "gflow/graded_map.hpp"
#include "helpers.hpp"

using namespace gflow;
namespace gt = gflow::testing;

namespace {
Config cfg;

// naive substitution oracle for polynomial coefficients: multiply out
// f = sum_r f_r xi^r with every variable replaced by its pullback function,
// using only the graded algebra (no Taylor machinery)
GradedFunction substitute_oracle(const GradedMap& phi, const GradedFunction& f) {
    const GradedSignature& T = phi.target();
    SignaturePtr Sp = phi.source_ptr();
    const int W = phi.weight_cap();

    auto expand_poly = [&](const ScalarExpr& e) -> GradedFunction {
        auto rec = [&](auto&& self, const ScalarExpr& node) -> GradedFunction {
            switch (node.kind()) {
            case ScalarExpr::Kind::Constant:
                return GradedFunction::from_scalar(Sp, node, W);
            case ScalarExpr::Kind::Variable:
                return phi.coordinate_pullback(node.node().name);
            case ScalarExpr::Kind::Sum: {
                GradedFunction acc = GradedFunction::zero(Sp, 0, W);
                for (const auto& a : node.node().args) acc = acc + self(self, a);
                return acc;
            }
            case ScalarExpr::Kind::Product: {
                GradedFunction acc = GradedFunction::one(Sp, W);
                for (const auto& a : node.node().args) acc = acc * self(self, a);
                return acc;
            }
            case ScalarExpr::Kind::Power: {
                GradedFunction b = self(self, node.node().args.front());
                REQUIRE(node.node().exponent >= 0);
                return b.pow(node.node().exponent);
            }
            default:
                FAIL("oracle only supports polynomial coefficients");
                return GradedFunction::zero(Sp, 0, W);
            }
        };
        return rec(rec, e);
    };

    GradedFunction out = GradedFunction::zero(Sp, f.degree(), W);
    for (const auto& [r, f_r] : f.terms()) {
        GradedFunction term = expand_poly(f_r);
        for (std::size_t mu = 0; mu < r.size(); ++mu)
            for (int e = 0; e < r[mu]; ++e)
                term = term * phi.coordinate_pullback(T.graded_name(mu));
        out = out + term;
    }
    return out;
}

} // namespace

TEST_CASE("identity pullback is the identity") {
    auto sig = gt::sig_mixed();
    auto id = GradedMap::identity(sig, 4);
    gt::Rng rng(3);
    for (int d : {-1, 0, 1, 2}) {
        auto f = gt::random_function(rng, sig, d, 4);
        CHECK(equal_sampled(pullback(id, f), f, sample_points_for(cfg, f), 1e-9));
    }
}

TEST_CASE("Taylor expansion around the underlying map") {
    // phi*(x) = x + xi1 xi2 (degree 0), f = x^2: pullback = x^2 + 2x xi1 xi2
    auto sig = gt::sig_pair();
    auto x = ScalarExpr::variable("x");
    GradedFunction px(sig, 0, 4);
    px.set_coefficient(MultiIndex::zero(*sig), x);
    px.set_coefficient(MultiIndex{{1, 1}}, ScalarExpr(1.0));
    std::vector<GradedFunction> pbs{px, GradedFunction::coordinate(sig, 1, 4),
                                    GradedFunction::coordinate(sig, 2, 4)};
    GradedMap phi(sig, sig, pbs);

    auto f = GradedFunction::from_scalar(sig, ScalarExpr::power(x, 2), 4);
    auto r = pullback(phi, f);
    Assignment at{{"x", 1.5}};
    CHECK(r.coefficient(MultiIndex::zero(*sig)).eval(at) == Catch::Approx(2.25));
    CHECK(r.coefficient(MultiIndex{{1, 1}}).eval(at) == Catch::Approx(3.0));
    CHECK(r.terms().size() == 2); // (xi1 xi2)^2 = 0
}

TEST_CASE("projection views a function on the product") {
    auto sig = gt::sig_two_odd();
    auto ext = extend_signature(*sig, "t", 0);
    auto p1 = GradedMap::projection(ext, sig, 4);
    gt::Rng rng(9);
    auto f = gt::random_function(rng, sig, 1, 4);
    auto lifted = pullback(p1, f);
    CHECK(lifted.signature() == *ext);
    // coefficients are unchanged expressions, independent of t
    for (const auto& [p, c] : lifted.terms()) CHECK(c.variables().count("t") == 0);
}

TEST_CASE("pullback agrees with naive substitution on polynomial data") {
    auto sig = gt::sig_mixed();
    gt::Rng rng(15);
    auto points = sample_assignments({"x", "y"}, 10, cfg);
    for (int trial = 0; trial < 6; ++trial) {
        // random polynomial endomap: degree-respecting pullback data
        std::vector<GradedFunction> pbs;
        for (std::size_t i = 0; i < sig->size(); ++i)
            pbs.push_back(
                gt::random_function(rng, sig, sig->coordinate(i).degree, 4, true));
        // keep underlying map sane: body of base pullbacks = the variable + poly
        for (std::size_t b = 0; b < sig->base_count(); ++b) {
            std::size_t ci = sig->base_coordinate(b);
            GradedFunction& px = pbs[ci];
            GradedFunction fixed(sig, 0, 4);
            fixed.set_coefficient(MultiIndex::zero(*sig),
                                  ScalarExpr::variable(sig->base_name(b)));
            for (const auto& [p, c] : px.terms())
                if (!p.is_zero()) fixed.add_coefficient(p, c);
            pbs[ci] = fixed;
        }
        GradedMap phi(sig, sig, pbs);
        auto f = gt::random_function(rng, sig, rng.uniform_int(-1, 2), 4, true);
        auto got = pullback(phi, f);
        auto want = substitute_oracle(phi, f);
        CHECK(max_coefficient_difference(got, want, points) <= 1e-9);
    }
}

TEST_CASE("composition worked examples and functoriality") {
    auto sig = gt::sig_two_odd();
    auto id = GradedMap::identity(sig, 4);

    // affine shifts of the base coordinate compose additively
    auto shift = [&](double a) {
        std::vector<GradedFunction> pbs{
            GradedFunction::from_scalar(sig,
                                        ScalarExpr::variable("x") + ScalarExpr(a), 4),
            GradedFunction::coordinate(sig, 1, 4), GradedFunction::coordinate(sig, 2, 4)};
        return GradedMap(sig, sig, pbs);
    };
    auto s1 = shift(1.0), s2 = shift(2.5);
    auto s12 = compose(s1, s2);
    CHECK(s12.coordinate_pullback("x").body().eval({{"x", 0.0}}) == 3.5);

    CHECK(compose(id, s1).coordinate_pullback("x").body().eval({{"x", 1.0}}) == 2.0);
    CHECK(compose(s1, id).coordinate_pullback("x").body().eval({{"x", 1.0}}) == 2.0);

    // contravariant functoriality on random polynomial maps
    gt::Rng rng(21);
    auto points = sample_assignments({"x"}, 10, cfg);
    for (int trial = 0; trial < 4; ++trial) {
        std::vector<GradedFunction> pbs1, pbs2;
        for (std::size_t i = 0; i < sig->size(); ++i) {
            pbs1.push_back(
                gt::random_function(rng, sig, sig->coordinate(i).degree, 4, true));
            pbs2.push_back(
                gt::random_function(rng, sig, sig->coordinate(i).degree, 4, true));
        }
        GradedMap phi(sig, sig, pbs1), psi(sig, sig, pbs2);
        auto f = gt::random_function(rng, sig, rng.uniform_int(0, 2), 4, true);
        auto lhs = pullback(compose(psi, phi), f);
        auto rhs = pullback(phi, pullback(psi, f));
        CHECK(max_coefficient_difference(lhs, rhs, points) <= 1e-9);
    }
}

TEST_CASE("pullback is an algebra morphism") {
    auto sig = gt::sig_mixed();
    gt::Rng rng(33);
    auto points = sample_assignments({"x", "y"}, 10, cfg);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<GradedFunction> pbs;
        for (std::size_t i = 0; i < sig->size(); ++i)
            pbs.push_back(
                gt::random_function(rng, sig, sig->coordinate(i).degree, 4, true));
        GradedMap phi(sig, sig, pbs);
        auto f = gt::random_function(rng, sig, rng.uniform_int(0, 1), 4, true);
        auto g = gt::random_function(rng, sig, rng.uniform_int(-1, 1), 4, true);
        auto lhs = pullback(phi, f * g);
        auto rhs = pullback(phi, f) * pullback(phi, g);
        CHECK(max_coefficient_difference(lhs, rhs, points) <= 1e-9);
        CHECK(pullback(phi, GradedFunction::one(sig, 4)).body().is_one());
        CHECK(pullback(phi, f).degree() == f.degree());
    }
}

TEST_CASE("body compatibility with the underlying map") {
    auto sig = gt::sig_two_odd();
    gt::Rng rng(45);
    std::vector<GradedFunction> pbs;
    for (std::size_t i = 0; i < sig->size(); ++i)
        pbs.push_back(gt::random_function(rng, sig, sig->coordinate(i).degree, 4, true));
    GradedMap phi(sig, sig, pbs);
    auto f = gt::random_function(rng, sig, 0, 4, true);
    auto under = phi.underlying();
    ScalarExpr lhs = pullback(phi, f).body();
    ScalarExpr rhs = f.body().substitute({{"x", under.at("x")}});
    for (const auto& at : sample_assignments({"x"}, 10, cfg))
        CHECK(lhs.eval(at) == Catch::Approx(rhs.eval(at)).margin(1e-9));
}

TEST_CASE("sections substitute the time coordinate") {
    auto sig = gt::sig_two_odd();

    // degree-0 time: s_{t0}*(exp(t) xi1) = exp(t0) xi1
    auto ext = extend_signature(*sig, "t", 0);
    auto s = GradedMap::section_at(sig, ext, "t", 0.7, 4);
    GradedFunction f(ext, 1, 4);
    f.set_coefficient(MultiIndex{{1, 0}}, ScalarExpr::exp(ScalarExpr::variable("t")));
    auto r = pullback(s, f);
    CHECK(r.coefficient(MultiIndex{{1, 0}}).eval({}) == Catch::Approx(std::exp(0.7)));

    // zero-section axiom: p1 o s0 = id
    auto s0 = GradedMap::section_at(sig, ext, "t", 0.0, 4);
    auto p1 = GradedMap::projection(ext, sig, 4);
    auto idc = compose(p1, s0);
    gt::Rng rng(51);
    auto g = gt::random_function(rng, sig, 1, 4);
    CHECK(equal_sampled(pullback(idc, g), g, sample_points_for(cfg, g), 1e-9));

    // graded time: tau -> 0 kills tau terms; nonzero value is rejected
    auto exto = extend_signature(*sig, "tau", -1);
    CHECK_THROWS_AS(GradedMap::section_at(sig, exto, "tau", 0.5, 4),
                    NonzeroValueForGradedTime);
    auto so = GradedMap::section_at(sig, exto, "tau", 0.0, 4);
    GradedFunction h(exto, 0, 4);
    h.set_coefficient(MultiIndex{{1, 0, 1}}, ScalarExpr(2.0)); // xi1 tau
    CHECK(pullback(so, h).empty());
}

TEST_CASE("related vector fields") {
    auto sig = gt::sig_mixed();
    gt::Rng rng(63);
    auto X = gt::random_field(rng, sig, 1, 4);
    auto id = GradedMap::identity(sig, 4);
    CHECK(related(id, X, X, cfg));

    // 1 (x) d_t on M x R is p1-related to 0
    auto ext = extend_signature(*sig, "t", 0);
    auto p1 = GradedMap::projection(ext, sig, 4);
    std::vector<GradedFunction> comps;
    for (std::size_t i = 0; i < ext->size(); ++i)
        comps.push_back(ext->coordinate(i).name == "t"
                            ? GradedFunction::one(ext, 4)
                            : GradedFunction::zero(ext, ext->coordinate(i).degree, 4));
    VectorField ddt(ext, 0, comps);
    CHECK(related(p1, ddt, VectorField::zero(sig, 0, 4), cfg));

    // Euler flow map at fixed t is E-related to E (closed form exp(t deg))
    auto esig = gt::sig_euler();
    auto E = VectorField::euler(esig, 4);
    auto et = ScalarExpr::exp(ScalarExpr::variable("t"));
    std::vector<GradedFunction> pbs;
    for (std::size_t i = 0; i < esig->size(); ++i) {
        int d = esig->coordinate(i).degree;
        ScalarExpr factor = 1.0;
        for (int j = 0; j < d; ++j) factor = factor * et;
        pbs.push_back(GradedFunction::coordinate(esig, i, 4).scalar_mul(factor));
    }
    GradedMap theta_t(esig, esig, pbs);
    CHECK(related(theta_t, E, E, cfg));

    CHECK_THROWS_AS(related(id, X, gt::random_field(rng, sig, 0, 4), cfg),
                    DegreeMismatch);
}
