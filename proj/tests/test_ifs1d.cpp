#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "blend/errors.hpp"
#include "blend/ifs1d.hpp"
#include "blend/rng.hpp"

using namespace blend;

namespace {

std::string clause_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const HypothesisViolation& e) {
        return e.clause;
    }
    return "";
}

// Best clearance over branches at z, computed straight from the inverse maps.
double best_clearance(const Ifs1D& ifs, cplx z, const Disk& target) {
    double best = -1e300;
    for (const auto& b : ifs.branches) best = std::max(best, target.radius - std::abs(b.inverse(z) - target.center));
    return best;
}

}  // namespace

TEST_CASE("default lemma instance covers D(0,1/10)") {
    auto cert = certify_lemma_ifs(3, 0.99, {0.8, 0.8, 0.8});
    CHECK(cert.holds);
    CHECK(cert.soundnessSlack > 0.0);
    CHECK(cert.margin > 0.0);
    CHECK(cert.lipschitz == doctest::Approx(1.0 / 0.99));
    CHECK_FALSE(cert.counterexample.has_value());
}

TEST_CASE("covering agrees with dense random sampling") {
    const Disk target(0.0, 0.1);
    for (double ma : {0.981, 0.999}) {
        Ifs1D ifs = lemma_ifs(4, ma, std::vector<cplx>(4, cplx(0.75, 0.02)));
        auto cert = certify_covering(ifs, target, 64);
        REQUIRE(cert.holds);
        SplitMix64 rng(11);
        double worst = 1e300;
        for (int i = 0; i < 20000; ++i) {
            cplx z = std::polar(0.1 * std::sqrt(rng.uniform()), 2.0 * kPi * rng.uniform());
            worst = std::min(worst, best_clearance(ifs, z, target));
        }
        CHECK(worst > 0.0);
    }
}

TEST_CASE("small alpha leaves a verified hole") {
    const Disk target(0.0, 0.1);
    // Boundary points midway between two translations need alpha cos(pi/3) > 1/10.
    Ifs1D ifs = lemma_ifs(3, 0.999, {0.15, 0.15, 0.15});
    CHECK(best_clearance(ifs, std::polar(0.1, kPi / 3), target) < 0.0);
    auto cert = certify_covering(ifs, target, 64);
    CHECK_FALSE(cert.holds);
    REQUIRE(cert.counterexample.has_value());
    cplx z = *cert.counterexample;
    CHECK(std::abs(z) <= 0.1);
    CHECK(best_clearance(ifs, z, target) <= 0.0);
}

TEST_CASE("rotation by zero reproduces the lemma certificate") {
    auto a = certify_lemma_ifs(3, 0.99, {0.8, 0.8, 0.8});
    auto b = certify_rotated(3, 0.99, {0.8, 0.8, 0.8}, 0.0);
    CHECK(a.margin == b.margin);
    CHECK(a.leafCells == b.leafCells);
    CHECK(certify_rotated(3, 0.99, {0.8, 0.8, 0.8}, 0.7).holds);
}

TEST_CASE("lemma hypotheses name the failing clause") {
    CHECK(clause_of([] { check_lemma_ifs_hypotheses(3, 0.5, {0.8, 0.8, 0.8}); }) == "|m|");
    CHECK(clause_of([] { check_lemma_ifs_hypotheses(2, 0.99, {0.8, 0.8}); }) == "d");
    CHECK(clause_of([] { check_lemma_ifs_hypotheses(3, 0.99, {0.8, 0.8}); }) == "alphas");
    CHECK(clause_of([] { check_lemma_ifs_hypotheses(3, 0.99, {0.8, 0.5, 0.8}); }) == "|alpha_j|");
    CHECK(clause_of([] { check_lemma_ifs_hypotheses(3, 0.99, {0.8, std::polar(0.8, 0.2), 0.8}); }) == "arg alpha_j");
    CHECK(clause_of([] { check_lemma_ifs_hypotheses(3, 0.99, {0.8, 0.8, 0.8}); }).empty());
}

TEST_CASE("squared two-branch system") {
    auto cert = certify_lemma_ifs2(std::polar(0.995, kPi / 2), 0.95);
    CHECK(cert.holds);
    CHECK(clause_of([] { check_lemma_ifs2_hypotheses(0.995, 0.95); }) == "arg m");
    CHECK(clause_of([] { check_lemma_ifs2_hypotheses(std::polar(0.995, kPi / 2), 0.5); }) == "|alpha|");
}

TEST_CASE("compose_power word order") {
    const cplx m = std::polar(0.995, kPi / 2), a = 0.95;
    const cplx t = a * (1.0 - std::abs(m));
    Ifs1D sq = compose_power(two_branch_ifs(m, a), 2);
    REQUIRE(sq.size() == 4);
    // Words (+,+), (+,-), (-,+), (-,-); the first letter acts first.
    const cplx expect[4] = {(m + 1.0) * t, (m - 1.0) * t, (1.0 - m) * t, -(m + 1.0) * t};
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(sq.branches[i].m - m * m) < 1e-15);
        CHECK(std::abs(sq.branches[i].t - expect[i]) < 1e-15);
    }
    CHECK_THROWS_AS(compose_power(lemma_ifs(3, 0.99, {0.8, 0.8, 0.8}), 13), BranchExplosion);
}

TEST_CASE("grid guard") {
    CHECK_THROWS_AS(certify_covering(lemma_ifs(3, 0.99, {0.8, 0.8, 0.8}), Disk(0.0, 0.1), 8), InvalidGrid);
}

TEST_CASE("select_branch picks the largest clearance") {
    Ifs1D ifs = lemma_ifs(3, 0.99, {0.8, 0.8, 0.8});
    const Disk target(0.0, 0.1);
    for (cplx z0 : {cplx(0.05, 0.0), cplx(-0.03, 0.06), cplx(0.0, -0.09)}) {
        int j = select_branch(ifs, z0, 1e-4, target);
        double mine = preimage_clearance(ifs.branches[j], z0, 1e-4, target);
        CHECK(mine > 0.0);
        for (const auto& b : ifs.branches) CHECK(mine >= preimage_clearance(b, z0, 1e-4, target));
    }
    CHECK_THROWS_AS(select_branch(ifs, 0.2, 1e-4, target), NoBranch);
    CHECK_THROWS_AS(select_branch(ifs, 0.0, 0.095, target), NoBranch);
}

TEST_CASE("chaos game stays in the invariant disk and is reproducible") {
    Ifs1D ifs = lemma_ifs(3, 0.99, {0.8, 0.8, 0.8});
    auto a = sample_limit_set(ifs, 2000, 200, 42);
    auto b = sample_limit_set(ifs, 2000, 200, 42);
    auto c = sample_limit_set(ifs, 2000, 200, 43);
    CHECK(a == b);
    CHECK(a != c);
    // |t_j| / (1 - |m|) = 0.8 bounds the attractor.
    for (auto z : a) CHECK(std::abs(z) <= 0.8 + 1e-12);
}

TEST_CASE("certificate json carries the margins") {
    auto cert = certify_lemma_ifs(3, 0.99, {0.8, 0.8, 0.8}, 32);
    json j = certificate_json(cert);
    CHECK(j["holds"].get<bool>());
    CHECK(j.contains("margin"));
    CHECK(j.contains("soundnessSlack"));
}
