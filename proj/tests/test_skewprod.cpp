#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "blend/errors.hpp"
#include "blend/skewprod.hpp"

using namespace blend;

namespace {

Polynomial1D blender_p(cplx m) { return Polynomial1D({0.0, 1.0 / m, 1.0}); }

SkewProduct d3(cplx m, double kappa = 1e6, cplx eps = 1e-6) {
    return SkewProduct::make(blender_p(m), 3, kappa, eps);
}

double maxdiff(const Point2& a, const Point2& b) { return std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1])); }

// Sup over |x| <= 1 of |(1 + 2x/c^{d-1})^{1/d} - 1| / 2 and of the branch
// derivative; both peak where 2x/c^{d-1} = -2/|c|^{d-1}.
double containment_oracle(int d, double ak) {
    double r = 2.0 / std::pow(ak, (d - 1.0) / d);
    return 0.5 * (1.0 - std::pow(1.0 - r, 1.0 / d));
}
double derivative_oracle(int d, double ak) {
    double cd1 = std::pow(ak, (d - 1.0) / d);
    return std::pow(1.0 - 2.0 / cd1, 1.0 / d - 1.0) / (d * cd1);
}

}  // namespace

TEST_CASE("construction recovers the fixed point and multiplier") {
    const cplx m = std::polar(0.99, 0.2);
    SkewProduct s = d3(m);
    CHECK(std::abs(s.z0) < 1e-15);
    CHECK(std::abs(s.m - m) < 1e-14);
    CHECK(std::abs(std::pow(s.c, 3) + s.kappa) < 1e-9 * std::abs(s.kappa));
    CHECK(s.delta == doctest::Approx(100.0 * 1e-6 / (0.8 * 0.01)).epsilon(1e-12));
    CHECK(choose_delta(s) == s.delta);
    // Base translations point along zeta_j.
    for (int j = 1; j <= 3; ++j) {
        cplx t = s.base_branch(j).t / s.zeta(j);
        CHECK(std::abs(t.imag()) < 1e-15);
        CHECK(t.real() > 0.0);
    }
    CHECK_THROWS_AS(d3(0.5), HypothesisViolation);
    CHECK_THROWS_AS(SkewProduct::make(blender_p(0.995), 2, 1e7, 1e-8), HypothesisViolation);
    SkewProduct z = SkewProduct::make(blender_p(m), 3, 1e6, 0.0);
    CHECK_THROWS_AS(z.to_rescaled(0.0, 0.0), EpsZero);
    CHECK_THROWS_AS(choose_delta(3, 1e6, 0.0, m), EpsZero);
}

TEST_CASE("rescaled maps agree with the original map") {
    SkewProduct s = d3(std::polar(0.99, 0.2));
    const Point2 pt{cplx(0.03, -0.02), cplx(0.4, 0.1)};
    Point2 orig = s.from_rescaled(pt[0], pt[1]);
    Point2 back = s.to_rescaled(orig[0], orig[1]);
    CHECK(maxdiff(back, pt) < 1e-14);
    Point2 f = s.forward(orig[0], orig[1]);
    Point2 viaOrig = s.to_rescaled(f[0], f[1]);
    Point2 viaResc = s.forward_rescaled(pt[0], pt[1]);
    CHECK(std::abs(viaOrig[0] - viaResc[0]) < 1e-10);
    CHECK(std::abs(viaOrig[1] - viaResc[1]) < 1e-10 * std::abs(viaOrig[1]));
}

TEST_CASE("inverse branches invert the forward map") {
    SkewProduct s = d3(std::polar(0.99, 0.2));
    for (int j = 1; j <= 3; ++j) {
        for (cplx x : {cplx(0.0), cplx(0.5, 0.5), cplx(-1.0), cplx(0.1, -0.9)}) {
            CHECK(std::abs(s.qt(s.qt_inv(j, x)) - x) < 1e-9);
            const double h = 1e-4;
            cplx fd = (s.qt_inv(j, x + h) - s.qt_inv(j, x - h)) / (2.0 * h);
            CHECK(std::abs(fd - s.qt_inv_deriv(j, x)) < 1e-12);
            Point2 pre = s.branch_rescaled(j, 0.05 * x, x);
            Point2 img = s.forward_rescaled(pre[0], pre[1]);
            CHECK(std::abs(img[0] - 0.05 * x) < 1e-9);
            CHECK(std::abs(img[1] - x) < 1e-9);
        }
        cplx w = julia_inverse_branch(3, 1e6, s.zeta(j), cplx(30.0, 40.0));
        CHECK(std::abs(std::pow(w, 3) + 1e6 - cplx(30.0, 40.0)) < 1e-8);
    }
    CHECK_THROWS_AS(julia_inverse_branch(3, 1e6, 1.0, 1e3), OutOfDomain);
    CHECK_THROWS_AS(julia_inverse_branch(3, 1e6, cplx(0.0, 1.0), 1.0), InvalidArgument);
}

TEST_CASE("base branch is the affine part of the inverse branch") {
    SkewProduct s = d3(std::polar(0.99, 0.2));
    // The remainder is second order in the preimage step, i.e. O(delta) in rescaled units.
    for (int j = 1; j <= 3; ++j) {
        cplx wn = s.qt_inv(j, 0.0);
        for (cplx zt : {cplx(0.0), cplx(0.05, 0.05)}) {
            cplx exact = s.branch_z_rescaled(zt, wn);
            CHECK(std::abs(exact - s.base_branch(j)(zt)) < 4.0 * s.delta * 0.1 * 0.1);
        }
    }
}

TEST_CASE("fiber geometry matches the closed-form extremes") {
    Report r3 = verify_julia_geometry(3, 1e6);
    CHECK(r3.all_pass());
    const Clause* c = r3.find("containment radius (1/2)|kappa|^{-(d-1)/d}");
    REQUIRE(c != nullptr);
    CHECK(c->measured <= containment_oracle(3, 1e6) * (1.0 + 1e-12));
    CHECK(c->measured == doctest::Approx(containment_oracle(3, 1e6)).epsilon(1e-6));
    const Clause* dv = r3.find("derivative bound |kappa|^{-(d-1)/d}");
    CHECK(dv->measured == doctest::Approx(derivative_oracle(3, 1e6)).epsilon(1e-6));

    // d = 2: the containment bound is exceeded at second order in 1/|c|.
    Report r2 = verify_julia_geometry(2, 1e7);
    const Clause* c2 = r2.find("containment radius (1/2)|kappa|^{-(d-1)/d}");
    CHECK_FALSE(c2->pass);
    CHECK(c2->measured == doctest::Approx(containment_oracle(2, 1e7)).epsilon(1e-9));
    CHECK(r2.find("derivative bound |kappa|^{-(d-1)/d}")->pass);

    CHECK(min_kappa(3) == doctest::Approx(std::pow(2000.0, 1.5)));
    CHECK_FALSE(verify_julia_geometry(3, 5e4).find("min |kappa| gate")->pass);
    CHECK(verify_julia_geometry(3, min_kappa(3)).find("min |kappa| gate")->pass);
    CHECK_THROWS_AS(rescaled_inverse_ifs(SkewProduct::make(blender_p(0.99), 3, 5e4, 1e-6)), GeometryUnverified);
}

TEST_CASE("rescaled inverse system is a valid blender") {
    SkewProduct s = d3(std::polar(0.99, 0.2));
    BlenderIfs ifs = rescaled_inverse_ifs(s);
    REQUIRE(ifs.branches.size() == 3);
    Report r = validate_blender(ifs);
    CHECK(r.find("sampled C1 <= stated")->pass);
    for (int j = 1; j <= 3; ++j) {
        std::string tag = "branch " + std::to_string(j) + ": ";
        CHECK(r.find(tag + "d_omega phi < 1/2")->pass);
        CHECK(r.find(tag + "fiber maps into unit polydisk")->pass);
    }
}

TEST_CASE("Rouche comparison on a bidisk") {
    Map2 h = [](const Point2& x) { return Point2{2.0 * x[0], 2.0 * x[1]}; };
    Map2 small = [](const Point2&) { return Point2{cplx(0.3), cplx(0.0, 0.3)}; };
    Map2 large = [](const Point2&) { return Point2{cplx(1.5), cplx(0.0)}; };
    Polydisk box = Polydisk::unit(2);
    RoucheResult a = rouche_verify(h, small, box);
    CHECK(a.ok);
    CHECK(a.minDisplacement == doctest::Approx(1.0));
    CHECK(a.maxEta == doctest::Approx(0.3));
    CHECK_FALSE(rouche_verify(h, large, box).ok);
    CHECK_THROWS_AS(rouche_verify(h, small, box, 16), InvalidArgument);
}

TEST_CASE("core points are fixed by their branch word") {
    for (cplx m : {cplx(0.995), std::polar(0.995, kPi / 4)}) {
        SkewProduct s = d3(m);
        CorePoint core = find_core_point(s);
        CHECK(core.regime == (std::abs(m - 1.0) > 0.1 ? "far" : "near"));
        CHECK(core.residual < 1e-10);
        CHECK(core.clearance > 0.0);
        CHECK(maxdiff(apply_core_branch(s, core, core.point), core.point) < 1e-10);
        // Each inverse step is undone by one forward step; the forward map
        // expands the fiber too strongly to iterate the whole cycle.
        Point2 y = core.point;
        for (int sym : core.symbols) {
            Point2 pre = s.branch_rescaled(sym, y[0], y[1]);
            CHECK(maxdiff(s.forward_rescaled(pre[0], pre[1]), y) < 1e-9);
            y = pre;
        }
        CHECK(maxdiff(y, core.point) < 1e-10);
    }
}

TEST_CASE("strong unstable manifold converges and is invariant") {
    SkewProduct s = d3(std::polar(0.995, kPi / 4));
    CorePoint core = find_core_point(s);
    UnstableManifold u = unstable_manifold(s, core, 10);
    REQUIRE(u.distances.size() >= 2);
    for (std::size_t i = 1; i < u.distances.size(); ++i) CHECK(u.distances[i] < u.distances[i - 1]);
    CHECK(u.invarianceResidual < 1e-12);
    CHECK(u.graph.slopeBound < (1.0 - 0.995) / 100.0);
    // The graph passes through the core point.
    CHECK(std::abs(u.graph.eval(std::span<const cplx>(&core.point[1], 1)) - core.point[0]) < 1e-12);
}

TEST_CASE("parabolic splitting of -(1+l) z + z^2") {
    PolyFamily fam = [](cplx l) { return Polynomial1D({0.0, -(1.0 + l), 1.0}); };
    for (double l : {1e-2, 1e-3, 1e-4}) {
        ParabolicSplit s = parabolic_split(fam, 2, 1, l);
        REQUIRE(s.points.size() == 3);
        CHECK(std::abs(s.A + 2.0) < 1e-12);
        CHECK(std::abs(s.b - 2.0) < 1e-8);
        // Period-2 points solve z^2 - l z - l = 0.
        double disc = std::sqrt(l * l + 4.0 * l);
        double x1 = 0.5 * (l + disc), x2 = 0.5 * (l - disc);
        CHECK(std::abs(s.points[0]) < 1e-14);
        double big = std::max(std::abs(x1), std::abs(x2));
        CHECK(s.residual == doctest::Approx(l * big).epsilon(1e-6));
        CHECK(s.gap == doctest::Approx((2.0 + l) / big).epsilon(1e-9));
        for (int i = 1; i < 3; ++i) CHECK(std::abs(s.multipliers[i] - (1.0 - 4.0 * l - l * l)) < 1e-10);
        CHECK(std::abs(s.multipliers[0] - (1.0 + l) * (1.0 + l)) < 1e-12);
    }
    double slope = fit_split_exponent(fam, 2, 1, {1e-2, 1e-3, 1e-4, 1e-5});
    CHECK(slope == doctest::Approx(1.5).epsilon(0.02));
    PolyFamily q1 = [](cplx l) { return Polynomial1D({0.0, 1.0 + l, 1.0}); };
    ParabolicSplit one = parabolic_split(q1, 1, 1, 1e-2);
    CHECK(std::abs(one.points[1] + 1e-2) < 1e-14);
    CHECK(one.residual < 1e-9);
    CHECK_THROWS_AS(parabolic_split(q1, 2, 1, 1e-2), HypothesisViolation);
}

TEST_CASE("Henon covering gate") {
    Polynomial1D w5 = Polynomial1D::monomial(5);
    // beta = 1/4, a = 3/20, gate = eps^{1/10}.
    CHECK_THROWS_AS(henon_covering_check(1.0, w5, w5, 1e-4, 50), HypothesisViolation);
    HenonOptions o;
    o.enforceGate = false;
    Report r = henon_covering_check(1.0, w5, w5, 1e-4, 50, o);
    const Clause* g = r.find("eps^(beta-a) < 1/10");
    CHECK(g->measured == doctest::Approx(std::pow(1e-4, 0.1)));
    CHECK_FALSE(g->pass);
    CHECK(r.find("h+ preimage count = d^2")->pass);
    CHECK(r.find("h- preimage residual")->pass);
    CHECK(henon_covering_check(1.0, w5, w5, 1e-12, 50).find("eps^(beta-a) < 1/10")->pass);
}
