#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pincon/errors.hpp"
#include "pincon/graph.hpp"
#include "pincon/spectral.hpp"
#include "pincon/version.hpp"

namespace pincon {

// ---------------------------------------------------------------------------
// Pin plans
// ---------------------------------------------------------------------------

enum class StrengthPolicyKind { Constant, Sequence, RandomIn };

struct StrengthPolicy {
    StrengthPolicyKind kind = StrengthPolicyKind::Constant;
    double b = 1.0;                // Constant
    std::vector<double> sequence;  // Sequence; repeats its last value when exhausted
    double eta1 = 0.0, eta2 = 0.0; // RandomIn bounds
    std::uint64_t seed = 0;        // RandomIn

    static StrengthPolicy constant(double b) {
        StrengthPolicy p;
        p.kind = StrengthPolicyKind::Constant;
        p.b = b;
        return p;
    }
    static StrengthPolicy fromSequence(std::vector<double> values) {
        if (values.empty()) throw DomainError("StrengthPolicy: empty sequence");
        StrengthPolicy p;
        p.kind = StrengthPolicyKind::Sequence;
        p.sequence = std::move(values);
        return p;
    }
    static StrengthPolicy randomIn(double eta1, double eta2, std::uint64_t seed) {
        StrengthPolicy p;
        p.kind = StrengthPolicyKind::RandomIn;
        p.eta1 = eta1;
        p.eta2 = eta2;
        p.seed = seed;
        return p;
    }

    /// Derived strength bounds [eta1, eta2] covering every b_k the policy
    /// can emit.
    [[nodiscard]] std::pair<double, double> bounds() const {
        switch (kind) {
            case StrengthPolicyKind::Constant: return {b, b};
            case StrengthPolicyKind::Sequence: {
                auto [lo, hi] = std::minmax_element(sequence.begin(), sequence.end());
                return {*lo, *hi};
            }
            case StrengthPolicyKind::RandomIn: return {eta1, eta2};
        }
        return {0.0, 0.0};
    }
};

enum class GapPolicyKind { Fixed, Adaptive };

struct GapPolicy {
    GapPolicyKind kind = GapPolicyKind::Fixed;
    double dt = 1.0;      // Fixed
    double dtMin = 1e-3;  // floor for both policies

    static GapPolicy fixed(double dt, double dtMin = 1e-3) {
        return {GapPolicyKind::Fixed, dt, dtMin};
    }
    static GapPolicy adaptive(double dtMin = 1e-3) {
        return {GapPolicyKind::Adaptive, 0.0, dtMin};
    }
};

struct PinPlan {
    int r = 0;     // pinned vertex, 0-based
    double s = 0.0; // target consensus value
    StrengthPolicy strength;
    GapPolicy gap;
    std::optional<double> epsilonOverride; // default: 0.999 of the supremum
};

// ---------------------------------------------------------------------------
// Certificate arithmetic
// ---------------------------------------------------------------------------

/// Open interval (0, 1/xi_r) of admissible impulse strengths for pinning
/// vertex r.
inline std::pair<double, double> admissible_strength_range(const SpectralData& spec, int r) {
    if (r < 0 || r >= static_cast<int>(spec.xi.size()))
        throw DomainError("admissible_strength_range: vertex out of range");
    const double xiR = spec.xi[r];
    if (xiR <= 0.0)
        throw NotInRootError("admissible_strength_range: vertex " + std::to_string(r + 1) +
                             " has xi_r = 0; impulses there cannot steer the weighted mean");
    return {0.0, 1.0 / xiR};
}

/// Default epsilon: 0.999 of its supremum min{xi_r, 1/eta2 - xi_r}.
inline double default_epsilon(double xiR, double eta2) {
    return 0.999 * std::min(xiR, 1.0 / eta2 - xiR);
}

/// Post-impulse dispersion-to-mean ratio bound:
///   C = ([2 + 4 eta2^2 (1-xi)] eps^2 / xi + 4 eta2^2 xi (1-xi))
///       / [1 - eta2 (xi + eps)]^2
inline double ratio_bound_C(double xiR, double eta2, double epsilon) {
    const double base = 1.0 - eta2 * (xiR + epsilon);
    if (base <= 0.0)
        throw DomainError("ratio_bound_C: 1 - eta2 (xi_r + eps) must be positive");
    const double numer = (2.0 + 4.0 * eta2 * eta2 * (1.0 - xiR)) * epsilon * epsilon / xiR +
                         4.0 * eta2 * eta2 * xiR * (1.0 - xiR);
    return numer / (base * base);
}

/// The pieces of a certificate needed by the gap formulas.
struct CertificateBasis {
    double xiR = 0.0;
    double epsilon = 0.0;
    double bigC = 0.0;
    double dtMin = 1e-3;
};

/// Minimal inter-impulse gap
///   T = (max_i xi_i / lambda2) [max{ln C, ln(V0/xbar0^2)} + ln(xi_r/eps^2)],
/// clamped to dtMin when nonpositive. A single-vertex root bypasses the
/// formula entirely (the dispersion V vanishes on the root).
inline double min_gap_T(const SpectralData& spec, const CertificateBasis& basis,
                        double v0, double xbar0, bool* clamped = nullptr) {
    if (clamped) *clamped = false;
    if (xbar0 == 0.0)
        throw ZeroMeanError("min_gap_T: weighted mean of the initial state is zero");
    if (spec.degenerateRoot) {
        if (clamped) *clamped = true;
        return basis.dtMin;
    }
    const double lead = spec.maxXi / spec.lambda2;
    const double t = lead * (std::max(std::log(basis.bigC), std::log(v0 / (xbar0 * xbar0))) +
                             std::log(basis.xiR / (basis.epsilon * basis.epsilon)));
    if (!(t > basis.dtMin)) {
        if (clamped) *clamped = true;
        return basis.dtMin;
    }
    return t;
}

/// State-dependent gap rule evaluated at t_k^+:
///   dt_k >= (max_i xi_i / lambda2) ln((xi_r/eps^2) V / xbar^2),
/// floored at dtMin.
inline double adaptive_gap(const SpectralData& spec, const CertificateBasis& basis,
                           double vK, double xbarK) {
    if (xbarK == 0.0)
        throw ZeroMeanError("adaptive_gap: weighted mean is zero at the impulse instant");
    if (spec.degenerateRoot || vK == 0.0) return basis.dtMin;
    const double value = (spec.maxXi / spec.lambda2) *
                         std::log((basis.xiR / (basis.epsilon * basis.epsilon)) * vK /
                                  (xbarK * xbarK));
    return std::max(value, basis.dtMin);
}

// ---------------------------------------------------------------------------
// Plan validation
// ---------------------------------------------------------------------------

enum class ReasonCode {
    NoRoot,              // graph classification admits no pinned root
    NotInRoot,           // xi_r = 0 at the pinned vertex
    StrengthOutOfRange,  // bounds not inside (0, 1/xi_r) or ill-ordered
    EpsilonOutOfRange,   // eps outside (0, min{xi_r, 1/eta2 - xi_r})
    GapBelowMinimum,     // fixed gap shorter than T
    ZeroMean,            // xbar(0) = 0 supplied with the plan
};

inline const char* to_string(ReasonCode c) {
    switch (c) {
        case ReasonCode::NoRoot: return "NoRoot";
        case ReasonCode::NotInRoot: return "NotInRoot";
        case ReasonCode::StrengthOutOfRange: return "StrengthOutOfRange";
        case ReasonCode::EpsilonOutOfRange: return "EpsilonOutOfRange";
        case ReasonCode::GapBelowMinimum: return "GapBelowMinimum";
        case ReasonCode::ZeroMean: return "ZeroMean";
    }
    return "?";
}

/// Initial-state aggregates, when the plan is synthesized against a known
/// initial condition.
struct InitialAggregates {
    double v0 = 0.0;
    double xbar0 = 0.0;
};

struct Certificate {
    int r = 0;
    double s = 0.0;
    double xiR = 0.0;
    double eta1 = 0.0, eta2 = 0.0;
    double epsilon = 0.0;
    double bigC = 0.0;
    double minGapT = 0.0;
    double decayRatio = 0.0; // 1 - eta1 (xi_r - eps)
    bool valid = false;
    std::vector<ReasonCode> reasons;
    bool degenerateRoot = false;
    bool tClamped = false;

    // Provenance and echo.
    double lambda2 = 0.0;
    double maxXi = 0.0;
    double dtMin = 1e-3;
    std::optional<double> v0, xbar0;
    std::uint64_t graphHash = 0;
    double xiResidual = 0.0;
    std::string version = kVersion;
    StrengthPolicy strength;
    GapPolicy gapPolicy;

    [[nodiscard]] CertificateBasis basis() const { return {xiR, epsilon, bigC, dtMin}; }

    [[nodiscard]] bool hasReason(ReasonCode c) const {
        return std::find(reasons.begin(), reasons.end(), c) != reasons.end();
    }
};

/// Runs every hypothesis check of the pinning theorems against the plan
/// and returns the resulting certificate. Failures are encoded as reason
/// codes, never thrown, so sweeps can tabulate invalid regions.
inline Certificate validate_plan(const Laplacian& lap, const SpectralData& spec,
                                 const PinPlan& plan,
                                 std::optional<InitialAggregates> init = std::nullopt,
                                 std::uint64_t graphHash = 0) {
    Certificate cert;
    cert.r = plan.r;
    cert.s = plan.s;
    cert.strength = plan.strength;
    cert.gapPolicy = plan.gap;
    cert.dtMin = plan.gap.dtMin;
    cert.graphHash = graphHash;
    if (init) {
        cert.v0 = init->v0;
        cert.xbar0 = init->xbar0;
    }

    if (lap.classification == Connectivity::NoRoot) {
        cert.reasons.push_back(ReasonCode::NoRoot);
        return cert;
    }
    if (plan.r < 0 || plan.r >= lap.n())
        throw DomainError("validate_plan: pinned vertex out of range");

    cert.lambda2 = spec.lambda2;
    cert.maxXi = spec.maxXi;
    cert.degenerateRoot = spec.degenerateRoot;
    cert.xiResidual = spec.xiResidual;
    cert.xiR = spec.xi[plan.r];

    if (cert.xiR <= 0.0) {
        cert.reasons.push_back(ReasonCode::NotInRoot);
        return cert;
    }

    const auto [eta1, eta2] = plan.strength.bounds();
    cert.eta1 = eta1;
    cert.eta2 = eta2;
    // eta2 < 1/xi_r, with enough room below the boundary for an epsilon to
    // exist; a bare floating-point comparison misclassifies b = 1/xi_r when
    // xi_r itself carries rounding error.
    const double epsSup = std::min(cert.xiR, 1.0 / eta2 - cert.xiR);
    if (!(0.0 < eta1 && eta1 <= eta2) || !(epsSup > 1e-9 * cert.xiR)) {
        cert.reasons.push_back(ReasonCode::StrengthOutOfRange);
        return cert;
    }

    cert.epsilon = plan.epsilonOverride.value_or(default_epsilon(cert.xiR, eta2));
    if (!(0.0 < cert.epsilon && cert.epsilon < epsSup)) {
        cert.reasons.push_back(ReasonCode::EpsilonOutOfRange);
        return cert;
    }

    cert.bigC = ratio_bound_C(cert.xiR, eta2, cert.epsilon);
    cert.decayRatio = 1.0 - eta1 * (cert.xiR - cert.epsilon);

    if (init && init->xbar0 == 0.0) {
        cert.reasons.push_back(ReasonCode::ZeroMean);
        return cert;
    }
    if (spec.degenerateRoot) {
        cert.minGapT = cert.dtMin;
        cert.tClamped = true;
    } else if (init) {
        cert.minGapT = min_gap_T(spec, cert.basis(), init->v0, init->xbar0, &cert.tClamped);
    } else {
        // Without initial aggregates T covers every start with
        // V(0)/xbar(0)^2 <= C.
        const double lead = spec.maxXi / spec.lambda2;
        const double t = lead * (std::log(cert.bigC) +
                                 std::log(cert.xiR / (cert.epsilon * cert.epsilon)));
        cert.minGapT = t > cert.dtMin ? t : (cert.tClamped = true, cert.dtMin);
    }

    if (plan.gap.kind == GapPolicyKind::Fixed && plan.gap.dt < cert.minGapT)
        cert.reasons.push_back(ReasonCode::GapBelowMinimum);

    cert.valid = cert.reasons.empty();
    return cert;
}

} // namespace pincon
