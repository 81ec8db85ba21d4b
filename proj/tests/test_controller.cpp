#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pincon/controller.hpp"
#include "pincon/harness.hpp"
#include "pincon/rng.hpp"

using namespace pincon;
using Catch::Approx;

namespace {

struct Example1 {
    Laplacian lap = build_laplacian(gen_ring(100, 1.0));
    SpectralData spec = compute_spectral(lap);
    PinPlan plan;

    Example1() {
        plan.r = 0;
        plan.s = 0.0;
        plan.strength = StrengthPolicy::constant(11.0);
        plan.gap = GapPolicy::fixed(1867.0);
        plan.epsilonOverride = 0.00999;
    }
};

SpectralData synthetic_spec(double xiR, double maxXi, double lambda2) {
    SpectralData sd;
    sd.xi = {xiR};
    sd.maxXi = maxXi;
    sd.lambda2 = lambda2;
    sd.rootSupport = {0};
    return sd;
}

} // namespace

TEST_CASE("admissible strength range", "[controller]") {
    Example1 ex;
    const auto [lo, hi] = admissible_strength_range(ex.spec, 7);
    CHECK(lo == 0.0);
    CHECK(hi == Approx(100.0).epsilon(1e-10));

    const SpectralData tree = compute_spectral(build_laplacian(gen_grown_tree(10, 100, 7)));
    const auto range = admissible_strength_range(tree, 0);
    CHECK(range.second == Approx(10.0).epsilon(1e-10));
    CHECK_THROWS_AS(admissible_strength_range(tree, 49), NotInRootError);
    CHECK_THROWS_AS(admissible_strength_range(tree, -1), DomainError);
}

TEST_CASE("default epsilon backs off from its supremum", "[controller]") {
    CHECK(default_epsilon(0.01, 11.0) == Approx(0.00999).margin(1e-12));
    CHECK(default_epsilon(0.1, 5.0) == Approx(0.0999).margin(1e-12));
    CHECK(default_epsilon(0.5, 1.9) == Approx(0.026289473684210498).margin(1e-12));
}

TEST_CASE("ratio bound C", "[controller]") {
    CHECK(ratio_bound_C(0.01, 11.0, 0.00999) == Approx(15.7641).margin(5e-4));
    // hand evaluation: numerator 4*0.02 + 1 = 1.08, denominator 0.16
    CHECK(ratio_bound_C(0.5, 1.0, 0.1) == Approx(6.75).margin(1e-12));
    // the printed value in the source example is 7.3280, which its own
    // formula does not produce; the formula value is kept
    CHECK(ratio_bound_C(0.1, 5.0, 0.09) == Approx(6580.8).margin(1e-9));
    CHECK_THROWS_AS(ratio_bound_C(0.1, 5.0, 0.2), DomainError);
}

TEST_CASE("minimal gap T on the ring scenario", "[controller]") {
    Example1 ex;
    const CertificateBasis basis{0.01, 0.00999, ratio_bound_C(0.01, 11.0, 0.00999), 1e-3};
    bool clamped = true;
    const double t = min_gap_T(ex.spec, basis, 0.5935, 0.4886, &clamped);
    CHECK_FALSE(clamped);
    CHECK(t == Approx(1866.2).margin(0.5));
    CHECK_THROWS_AS(min_gap_T(ex.spec, basis, 0.5935, 0.0), ZeroMeanError);
}

TEST_CASE("minimal gap clamps when every log vanishes", "[controller]") {
    // C = xi_r and eps^2 = xi_r with V0/xbar0^2 = 1 makes both log terms zero
    SpectralData sd = synthetic_spec(0.25, 0.25, 1.0);
    bool clamped = false;
    const double t = min_gap_T(sd, {0.25, 0.5, 0.25, 1e-3}, 1.0, 1.0, &clamped);
    CHECK(clamped);
    CHECK(t == 1e-3);
}

TEST_CASE("minimal gap under the tree-example convention", "[controller]") {
    // stated inputs: maxxi = 0.1, lambda2 = 0.03820, C = 6580.8, eps = 0.09;
    // formula evaluation gives 29.5948 (the source example prints 29.58-ish)
    SpectralData sd = synthetic_spec(0.1, 0.1, 0.03820);
    const double t = min_gap_T(sd, {0.1, 0.09, 6580.8, 1e-3}, 4.1677 * 1.0, 1.0);
    CHECK(t == Approx(29.594810790015341).margin(1e-9));
}

TEST_CASE("adaptive gap", "[controller]") {
    Example1 ex;
    const CertificateBasis basis{0.01, 0.00999, 15.764096485696067, 1e-3};
    // V = (eps^2/xi) xbar^2 exactly -> log of one -> floor
    const double xb = 0.7;
    const double vEq = basis.epsilon * basis.epsilon / basis.xiR * xb * xb;
    CHECK(adaptive_gap(ex.spec, basis, vEq, xb) == 1e-3);
    // stored initial aggregates
    CHECK(adaptive_gap(ex.spec, basis, 0.5935, 0.4886) ==
          Approx(1398.1540709083913).margin(1e-6));
    // synchronized flow: V = 0
    CHECK(adaptive_gap(ex.spec, basis, 0.0, xb) == 1e-3);
    CHECK_THROWS_AS(adaptive_gap(ex.spec, basis, 0.5, 0.0), ZeroMeanError);
}

TEST_CASE("validate_plan accepts the ring scenario", "[controller][validate]") {
    Example1 ex;
    const Certificate cert =
        validate_plan(ex.lap, ex.spec, ex.plan, InitialAggregates{0.5935, 0.4886}, 99);
    CHECK(cert.valid);
    CHECK(cert.reasons.empty());
    CHECK(cert.eta1 == 11.0);
    CHECK(cert.eta2 == 11.0);
    CHECK(cert.decayRatio == Approx(0.99989).margin(1e-9));
    CHECK(cert.bigC == Approx(15.7641).margin(5e-4));
    CHECK(cert.minGapT == Approx(1866.2).margin(0.5));
    CHECK(cert.graphHash == 99);
    CHECK_FALSE(cert.degenerateRoot);
    CHECK_FALSE(cert.tClamped);
}

TEST_CASE("validate_plan rejects inadmissible strength", "[controller][validate]") {
    Example1 ex;
    PinPlan plan = ex.plan;
    plan.strength = StrengthPolicy::constant(150.0);
    plan.epsilonOverride.reset();
    const Certificate cert = validate_plan(ex.lap, ex.spec, plan);
    CHECK_FALSE(cert.valid);
    REQUIRE(cert.reasons.size() == 1);
    CHECK(cert.reasons[0] == ReasonCode::StrengthOutOfRange);
    // b = 100 sits exactly on the open boundary 1/xi_r and is rejected too
    plan.strength = StrengthPolicy::constant(100.0);
    CHECK(validate_plan(ex.lap, ex.spec, plan).hasReason(ReasonCode::StrengthOutOfRange));
    plan.strength = StrengthPolicy::constant(99.9);
    CHECK(validate_plan(ex.lap, ex.spec, plan).valid == false); // gap 1867 < T for this b
}

TEST_CASE("validate_plan rejects pinning outside the root", "[controller][validate]") {
    const Laplacian lap = build_laplacian(gen_grown_tree(10, 100, 7));
    const SpectralData spec = compute_spectral(lap);
    PinPlan plan;
    plan.r = 49; // a leaf
    plan.strength = StrengthPolicy::constant(5.0);
    plan.gap = GapPolicy::fixed(15.0);
    const Certificate cert = validate_plan(lap, spec, plan);
    CHECK_FALSE(cert.valid);
    REQUIRE(cert.reasons.size() == 1);
    CHECK(cert.reasons[0] == ReasonCode::NotInRoot);
}

TEST_CASE("validate_plan records NoRoot", "[controller][validate]") {
    std::vector<WeightedDigraph::Edge> edges;
    for (int base : {0, 3})
        for (int i = 0; i < 3; ++i) edges.push_back({base + i, base + (i + 1) % 3, 1.0});
    const Laplacian lap = build_laplacian(WeightedDigraph::fromEdges(6, edges));
    PinPlan plan;
    plan.strength = StrengthPolicy::constant(1.0);
    plan.gap = GapPolicy::fixed(1.0);
    const Certificate cert = validate_plan(lap, SpectralData{}, plan);
    CHECK_FALSE(cert.valid);
    REQUIRE(cert.reasons.size() == 1);
    CHECK(cert.reasons[0] == ReasonCode::NoRoot);
}

TEST_CASE("validate_plan flags epsilon overrides outside the open interval",
          "[controller][validate]") {
    Example1 ex;
    PinPlan plan = ex.plan;
    plan.epsilonOverride = 0.02; // above min{xi_r, 1/eta2 - xi_r} = 0.01
    CHECK(validate_plan(ex.lap, ex.spec, plan).hasReason(ReasonCode::EpsilonOutOfRange));
    plan.epsilonOverride = 0.0;
    CHECK(validate_plan(ex.lap, ex.spec, plan).hasReason(ReasonCode::EpsilonOutOfRange));
}

TEST_CASE("validate_plan flags a fixed gap below T", "[controller][validate]") {
    const Laplacian lap = build_laplacian(gen_grown_tree(10, 100, 7));
    const SpectralData spec = compute_spectral(lap);
    PinPlan plan;
    plan.r = 0;
    plan.strength = StrengthPolicy::constant(5.0);
    plan.gap = GapPolicy::fixed(15.0);
    plan.epsilonOverride = 0.09;
    const Certificate cert =
        validate_plan(lap, spec, plan, InitialAggregates{0.6369, 0.3909});
    CHECK_FALSE(cert.valid);
    CHECK(cert.hasReason(ReasonCode::GapBelowMinimum));
    CHECK(cert.minGapT == Approx(29.5974).margin(2e-3));
    CHECK(cert.bigC == Approx(6580.8).margin(1e-6));
}

TEST_CASE("validate_plan records a zero initial weighted mean", "[controller][validate]") {
    Example1 ex;
    const Certificate cert =
        validate_plan(ex.lap, ex.spec, ex.plan, InitialAggregates{0.5, 0.0});
    CHECK_FALSE(cert.valid);
    CHECK(cert.hasReason(ReasonCode::ZeroMean));
}

TEST_CASE("degenerate root bypasses the gap formula", "[controller][validate]") {
    const Laplacian lap =
        build_laplacian(WeightedDigraph::fromEdges(3, {{0, 1, 1.0}, {0, 2, 1.0}}));
    const SpectralData spec = compute_spectral(lap);
    PinPlan plan;
    plan.r = 0;
    plan.strength = StrengthPolicy::constant(0.5); // (0, 1/xi_r) = (0, 1)
    plan.gap = GapPolicy::fixed(0.5);
    const Certificate cert = validate_plan(lap, spec, plan, InitialAggregates{0.0, 1.0});
    CHECK(cert.valid);
    CHECK(cert.degenerateRoot);
    CHECK(cert.tClamped);
    CHECK(cert.minGapT == cert.dtMin);
}

TEST_CASE("strength policies derive their bounds", "[controller]") {
    CHECK(StrengthPolicy::constant(3.0).bounds() == std::pair{3.0, 3.0});
    CHECK(StrengthPolicy::fromSequence({2.0, 0.5, 1.5}).bounds() == std::pair{0.5, 2.0});
    CHECK(StrengthPolicy::randomIn(1.0, 4.0, 9).bounds() == std::pair{1.0, 4.0});
    CHECK_THROWS_AS(StrengthPolicy::fromSequence({}), DomainError);
}

TEST_CASE("T is monotone in C and the initial ratio, antitone in lambda2",
          "[controller][property]") {
    SplitMix64 rng(61);
    int checked = 0;
    while (checked < 1000) {
        const double xiR = rng.uniformReal(0.02, 0.5);
        const double eta2 = rng.uniformReal(0.1, 0.95) / xiR;
        const double epsSup = std::min(xiR, 1.0 / eta2 - xiR);
        const double eps = rng.uniformReal(0.1, 0.9) * epsSup;
        const double lambda2v = rng.uniformReal(1e-4, 2.0);
        const double maxXi = rng.uniformReal(xiR, 1.0);
        const double c = ratio_bound_C(xiR, eta2, eps);
        const double v0 = rng.uniformReal(0.01, 10.0);
        const double xbar0 = rng.uniformReal(0.05, 2.0);
        SpectralData sd = synthetic_spec(xiR, maxXi, lambda2v);
        const CertificateBasis basis{xiR, eps, c, 1e-3};

        const double t = min_gap_T(sd, basis, v0, xbar0);
        const double tBiggerC = min_gap_T(sd, {xiR, eps, c * 1.5, 1e-3}, v0, xbar0);
        const double tBiggerRatio = min_gap_T(sd, basis, v0 * 2.0, xbar0);
        SpectralData faster = synthetic_spec(xiR, maxXi, lambda2v * 2.0);
        const double tFaster = min_gap_T(faster, basis, v0, xbar0);

        CHECK(tBiggerC >= t);
        CHECK(tBiggerRatio >= t);
        CHECK(tFaster <= t);

        const double decay = 1.0 - eta2 * (xiR - eps); // eta1 = eta2 here
        CHECK(decay > 0.0);
        CHECK(decay < 1.0);
        ++checked;
    }
}
