#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pincon/controller.hpp"
#include "pincon/errors.hpp"
#include "pincon/graph.hpp"
#include "pincon/matrix.hpp"
#include "pincon/rng.hpp"
#include "pincon/spectral.hpp"

namespace pincon {

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

/// xi-weighted mean of the state; invariant along the flow.
inline double weighted_mean(const Vector& x, const Vector& xi) {
    if (x.size() != xi.size()) throw DomainError("weighted_mean: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += xi[i] * x[i];
    return s;
}

/// Weighted squared dispersion sum xi_i (x_i - xbar)^2; the distance to the
/// consensus manifold used throughout the certificate checks.
inline double lyapunov_V(const Vector& x, const Vector& xi) {
    const double xbar = weighted_mean(x, xi);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - xbar;
        s += xi[i] * d * d;
    }
    return s;
}

/// Total deviation from the target: sum_i |x_i - s|.
inline double variation_metric(const Vector& x, double s) {
    double v = 0.0;
    for (double e : x) v += std::abs(e - s);
    return v;
}

/// Impulse on vertex r: x_r <- x_r + b (s - x_r); other coordinates
/// untouched. Strengths outside the admissible range are allowed here;
/// certificate validity is a separate concern.
inline Vector impulse_jump(Vector x, int r, double b, double s) {
    if (r < 0 || r >= static_cast<int>(x.size()))
        throw DomainError("impulse_jump: vertex out of range");
    x[r] += b * (s - x[r]);
    return x;
}

// ---------------------------------------------------------------------------
// Flow integration between impulses: xdot = -L x
// ---------------------------------------------------------------------------

enum class FlowBackend { Expm, Rk4 };

namespace detail {

/// Advances states across flow spans, caching matrix exponentials per
/// distinct span so fixed-gap runs pay for at most two of them.
class FlowEngine {
public:
    FlowEngine(const Matrix& laplacian, FlowBackend backend, double sampleEvery)
        : l_(laplacian), backend_(backend) {
        const double norm = l_.infNorm();
        rkStep_ = norm > 0.0 ? std::min(sampleEvery, 0.5 / norm) : sampleEvery;
    }

    void advance(Vector& x, double span) {
        if (span <= 0.0) return;
        if (backend_ == FlowBackend::Expm) {
            x = propagator(span).apply(x);
            return;
        }
        const int nsub = std::max(1, static_cast<int>(std::ceil(span / rkStep_ - 1e-12)));
        const double h = span / nsub;
        const std::size_t n = x.size();
        Vector k1(n), k2(n), k3(n), k4(n), tmp(n);
        for (int step = 0; step < nsub; ++step) {
            k1 = rhs(x);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
            k2 = rhs(tmp);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
            k3 = rhs(tmp);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
            k4 = rhs(tmp);
            for (std::size_t i = 0; i < n; ++i)
                x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }

private:
    Vector rhs(const Vector& x) const {
        Vector y = l_.apply(x);
        for (double& v : y) v = -v;
        return y;
    }

    const Matrix& propagator(double span) {
        std::uint64_t key;
        std::memcpy(&key, &span, sizeof key);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        Matrix scaled = l_ * (-span);
        return cache_.emplace(key, expm(scaled)).first->second;
    }

    const Matrix& l_;
    FlowBackend backend_;
    double rkStep_ = 1.0;
    std::unordered_map<std::uint64_t, Matrix> cache_;
};

} // namespace detail

/// Linear flow x(t) = e^{-Lt} x0 sampled every `sampleEvery` time units
/// plus the endpoint. Backends: dense matrix exponential (default) or
/// classical fixed-step RK4 with h = min(sampleEvery, 0.5/||L||_inf).
inline std::vector<std::pair<double, Vector>> flow(const Vector& x0, const Laplacian& lap,
                                                   double duration, double sampleEvery,
                                                   FlowBackend backend = FlowBackend::Expm) {
    if (sampleEvery <= 0.0) throw StepSizeError("flow: sampleEvery must be positive");
    if (duration < 0.0) throw DomainError("flow: negative duration");
    if (static_cast<int>(x0.size()) != lap.n()) throw DomainError("flow: state length mismatch");

    detail::FlowEngine engine(lap.entries, backend, sampleEvery);
    std::vector<std::pair<double, Vector>> out;
    Vector x = x0;
    double t = 0.0;
    const double guard = 1e-12 * std::max(1.0, duration);
    while (t + sampleEvery < duration - guard) {
        engine.advance(x, sampleEvery);
        t += sampleEvery;
        out.emplace_back(t, x);
    }
    engine.advance(x, duration - t);
    out.emplace_back(duration, std::move(x));
    return out;
}

// ---------------------------------------------------------------------------
// Hybrid run
// ---------------------------------------------------------------------------

enum class Phase { Flow, PreImpulse, PostImpulse };

inline const char* to_string(Phase p) {
    switch (p) {
        case Phase::Flow: return "flow";
        case Phase::PreImpulse: return "preImpulse";
        case Phase::PostImpulse: return "postImpulse";
    }
    return "?";
}

enum class TerminationReason { ToleranceReached, MaxImpulses, MaxTime };

inline const char* to_string(TerminationReason r) {
    switch (r) {
        case TerminationReason::ToleranceReached: return "toleranceReached";
        case TerminationReason::MaxImpulses: return "maxImpulses";
        case TerminationReason::MaxTime: return "maxTime";
    }
    return "?";
}

struct Horizon {
    int maxImpulses = 100;
    double maxTime = 1e6;
    double tolerance = 1e-3;
};

struct SimOptions {
    FlowBackend backend = FlowBackend::Expm;
    double sampleEvery = 1.0;
    bool impulseAtZero = true; // the impulse index family starts at t0 = 0
    double divergenceGuard = 1e12;
};

struct TrajectorySample {
    double t = 0.0;
    Phase phase = Phase::Flow;
    Vector x;
    double xbar = 0.0;
    double v = 0.0;
    double var = 0.0;
};

struct ImpulseRecord {
    int k = 0;
    double t = 0.0;
    double b = 0.0;
    double xrPre = 0.0;
    double xrPost = 0.0;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::vector<ImpulseRecord> impulses;
    TerminationReason termination = TerminationReason::MaxTime;
    std::uint64_t graphHash = 0;
    int r = 0;
    double s = 0.0;
    double tolerance = 0.0;

    [[nodiscard]] double finalVar() const {
        return samples.empty() ? 0.0 : samples.back().var;
    }
};

namespace detail {

class StrengthSequence {
public:
    explicit StrengthSequence(const StrengthPolicy& policy)
        : policy_(policy), rng_(policy.seed) {}

    double next() {
        switch (policy_.kind) {
            case StrengthPolicyKind::Constant: return policy_.b;
            case StrengthPolicyKind::Sequence: {
                const std::size_t i = std::min(index_++, policy_.sequence.size() - 1);
                return policy_.sequence[i];
            }
            case StrengthPolicyKind::RandomIn:
                return rng_.uniformReal(policy_.eta1, policy_.eta2);
        }
        return 0.0;
    }

private:
    const StrengthPolicy& policy_;
    SplitMix64 rng_;
    std::size_t index_ = 0;
};

} // namespace detail

/// Alternates linear flow and single-vertex impulses according to the
/// plan's gap policy, recording the full trajectory with observables.
/// Terminates when var(x, s) drops below horizon.tolerance, after
/// horizon.maxImpulses impulses (plus one settling segment), or at
/// horizon.maxTime.
inline Trajectory run(const Laplacian& lap, const SpectralData& spec, const PinPlan& plan,
                      const Certificate& cert, const Vector& x0, const Horizon& horizon,
                      const SimOptions& opts) {
    const int n = lap.n();
    if (static_cast<int>(x0.size()) != n) throw DomainError("run: state length mismatch");
    for (double v : x0)
        if (!std::isfinite(v)) throw DomainError("run: nonfinite initial state");
    if (opts.sampleEvery <= 0.0) throw StepSizeError("run: sampleEvery must be positive");

    Trajectory traj;
    traj.r = plan.r;
    traj.s = plan.s;
    traj.graphHash = cert.graphHash;
    traj.tolerance = horizon.tolerance;

    detail::FlowEngine engine(lap.entries, opts.backend, opts.sampleEvery);
    detail::StrengthSequence strengths(plan.strength);

    Vector x = x0;
    double t = 0.0;
    int k = 0;

    auto emit = [&](Phase phase) -> const TrajectorySample& {
        TrajectorySample s;
        s.t = t;
        s.phase = phase;
        s.x = x;
        s.xbar = weighted_mean(x, spec.xi);
        s.v = lyapunov_V(x, spec.xi);
        s.var = variation_metric(x, plan.s);
        if (infNorm(x) > opts.divergenceGuard)
            throw DivergenceError("run: |x|_inf exceeded " +
                                  std::to_string(opts.divergenceGuard) + " at t = " +
                                  std::to_string(t));
        traj.samples.push_back(std::move(s));
        return traj.samples.back();
    };
    auto atTolerance = [&]() { return traj.samples.back().var < horizon.tolerance; };

    auto applyImpulse = [&]() {
        emit(Phase::PreImpulse);
        const double b = strengths.next();
        ImpulseRecord rec{k, t, b, x[plan.r], 0.0};
        x = impulse_jump(std::move(x), plan.r, b, plan.s);
        rec.xrPost = x[plan.r];
        traj.impulses.push_back(rec);
        ++k;
        emit(Phase::PostImpulse);
    };

    // a state already at consensus needs no impulse at all
    if (variation_metric(x, plan.s) < horizon.tolerance) {
        emit(Phase::Flow);
        traj.termination = TerminationReason::ToleranceReached;
        return traj;
    }
    if (opts.impulseAtZero) {
        applyImpulse();
    } else {
        emit(Phase::Flow);
    }
    if (atTolerance()) {
        traj.termination = TerminationReason::ToleranceReached;
        return traj;
    }

    while (true) {
        double gap;
        if (plan.gap.kind == GapPolicyKind::Fixed) {
            gap = plan.gap.dt;
        } else {
            const auto& last = traj.samples.back();
            gap = adaptive_gap(spec, cert.basis(), last.v, last.xbar);
        }
        const bool settling = k >= horizon.maxImpulses;
        const double dur = std::min(gap, horizon.maxTime - t);

        if (dur > 0.0) {
            const double tSegEnd = t + dur;
            const double guard = 1e-12 * std::max(1.0, dur);
            double done = 0.0;
            while (done + opts.sampleEvery < dur - guard) {
                engine.advance(x, opts.sampleEvery);
                done += opts.sampleEvery;
                t += opts.sampleEvery;
                emit(Phase::Flow);
                if (atTolerance()) {
                    traj.termination = TerminationReason::ToleranceReached;
                    return traj;
                }
            }
            engine.advance(x, dur - done);
            t = tSegEnd;
        }

        if (settling) {
            emit(Phase::Flow);
            traj.termination = atTolerance() ? TerminationReason::ToleranceReached
                                             : TerminationReason::MaxImpulses;
            return traj;
        }
        if (dur < gap) {
            emit(Phase::Flow);
            traj.termination = atTolerance() ? TerminationReason::ToleranceReached
                                             : TerminationReason::MaxTime;
            return traj;
        }

        // Segment complete; skip the next impulse if the state already
        // settled at its end.
        if (variation_metric(x, plan.s) < horizon.tolerance) {
            emit(Phase::Flow);
            traj.termination = TerminationReason::ToleranceReached;
            return traj;
        }
        applyImpulse();
        if (atTolerance()) {
            traj.termination = TerminationReason::ToleranceReached;
            return traj;
        }
    }
}

} // namespace pincon
