#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pincon/controller.hpp"
#include "pincon/errors.hpp"
#include "pincon/graph.hpp"
#include "pincon/rng.hpp"
#include "pincon/simulator.hpp"
#include "pincon/spectral.hpp"

namespace pincon {

// ---------------------------------------------------------------------------
// Graph generators
// ---------------------------------------------------------------------------

/// Directed ring 1 -> 2 -> ... -> n -> 1 with a common edge weight.
inline WeightedDigraph gen_ring(int n, double weight) {
    if (n < 2) throw DomainError("gen_ring: n must be >= 2");
    if (weight <= 0.0) throw DomainError("gen_ring: weight must be positive");
    std::vector<WeightedDigraph::Edge> edges;
    edges.reserve(n);
    for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, weight});
    return WeightedDigraph::fromEdges(n, edges);
}

/// Starts from a ring of `baseRing` vertices and repeatedly attaches a new
/// leaf to a uniformly drawn existing vertex (unit weights) until the
/// graph has `total` vertices. The draw sequence is fixed by the SplitMix64
/// seed, making generated graphs part of the reproducibility contract.
inline WeightedDigraph gen_grown_tree(int baseRing, int total, std::uint64_t seed) {
    if (baseRing < 2) throw DomainError("gen_grown_tree: baseRing must be >= 2");
    if (total < baseRing) throw DomainError("gen_grown_tree: total must be >= baseRing");
    std::vector<WeightedDigraph::Edge> edges;
    edges.reserve(total);
    for (int i = 0; i < baseRing; ++i) edges.push_back({i, (i + 1) % baseRing, 1.0});
    SplitMix64 rng(seed);
    for (int m = baseRing; m < total; ++m) {
        const int parent = static_cast<int>(rng.uniformIndex(static_cast<std::uint64_t>(m)));
        edges.push_back({parent, m, 1.0});
    }
    return WeightedDigraph::fromEdges(total, edges);
}

// ---------------------------------------------------------------------------
// Initial-state fixtures
// ---------------------------------------------------------------------------

/// Seeded draw rescaled and shifted to hit the requested weighted-mean and
/// dispersion aggregates exactly: z_i ~ U[-1,1), then
/// x = (z - zbar 1) sqrt(vTarget / V(z)) + xbarTarget 1.
inline Vector fixture_initial_state(const Vector& xi, double xbarTarget, double vTarget,
                                    std::uint64_t seed) {
    const std::size_t n = xi.size();
    SplitMix64 rng(seed);
    Vector z(n);
    for (double& v : z) v = 2.0 * rng.uniform01() - 1.0;
    const double zbar = weighted_mean(z, xi);
    double vz = 0.0;
    for (std::size_t i = 0; i < n; ++i) vz += xi[i] * (z[i] - zbar) * (z[i] - zbar);
    if (vz <= 0.0) throw DomainError("fixture_initial_state: degenerate draw");
    const double scale = std::sqrt(vTarget / vz);
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = (z[i] - zbar) * scale + xbarTarget;
    return x;
}

// ---------------------------------------------------------------------------
// Trajectory verification
// ---------------------------------------------------------------------------

/// Outcome of one invariant check over a recorded trajectory.
///
/// `established` marks instances whose hypotheses held on this run (the
/// gap rule's consequence V-/xbar-^2 <= eps^2/xi_r at each impulse);
/// only those count toward the hard verdict. Everything is still
/// measured and reported for runs outside the sufficient conditions.
struct CheckResult {
    std::string name;
    bool established = false; // at least one instance had its hypotheses met
    bool pass = true;         // every established instance holds
    bool observedPass = true; // every instance holds, established or not
    double worstSlack = std::numeric_limits<double>::infinity();
    std::string worstAt;
    std::string note;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    bool pass = true; // no established check failed
    int hardFailures = 0;

    [[nodiscard]] const CheckResult* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

namespace detail {

struct FlowSegment {
    int startIdx = 0;          // sample index at t_k^+ (or the initial state)
    int endIdx = 0;            // sample index at t_{k+1}^- (or the final sample)
    int endImpulse = -1;       // impulse list index ending this segment, -1 if none
};

struct TrajectoryLayout {
    std::vector<FlowSegment> segments;
    std::vector<std::pair<int, int>> impulsePairs; // (preIdx, postIdx) per impulse
};

inline TrajectoryLayout layout_of(const Trajectory& traj) {
    TrajectoryLayout lay;
    int segStart = -1;
    int pairCount = 0;
    const int m = static_cast<int>(traj.samples.size());
    for (int i = 0; i < m; ++i) {
        switch (traj.samples[i].phase) {
            case Phase::Flow:
                if (segStart < 0) segStart = i;
                break;
            case Phase::PreImpulse:
                if (segStart >= 0 && segStart < i)
                    lay.segments.push_back({segStart, i, pairCount});
                lay.impulsePairs.emplace_back(i, i + 1);
                ++pairCount;
                segStart = -1;
                break;
            case Phase::PostImpulse:
                segStart = i;
                break;
        }
    }
    if (segStart >= 0 && segStart < m - 1)
        lay.segments.push_back({segStart, m - 1, -1});
    return lay;
}

} // namespace detail

/// Replays every runtime inequality the certificate promises against the
/// recorded samples: weighted-mean conservation along flow, the
/// exponential dispersion decay, per-impulse jump bounds, the
/// dispersion-to-mean ratio bound, geometric decay of the weighted mean,
/// and final consensus. Pure function of (trajectory, certificate).
inline VerificationReport verify_trajectory(const Trajectory& traj, const Laplacian& lap,
                                            const SpectralData& spec, const Certificate& cert,
                                            std::uint64_t graphHash) {
    if (traj.graphHash != graphHash)
        throw MismatchError("verify_trajectory: trajectory was produced against a different graph");
    if (cert.graphHash != graphHash)
        throw MismatchError("verify_trajectory: certificate was issued for a different graph");
    if (traj.r != cert.r)
        throw MismatchError("verify_trajectory: pinned vertex differs between trajectory and certificate");
    if (traj.samples.empty())
        throw DomainError("verify_trajectory: empty trajectory");
    (void)lap;

    const detail::TrajectoryLayout lay = detail::layout_of(traj);
    const auto& samples = traj.samples;
    VerificationReport report;

    auto locate = [](double t, int k) {
        std::ostringstream os;
        if (k >= 0) os << "impulse k=" << k;
        os << " t=" << t;
        return os.str();
    };

    // --- weighted-mean conservation along every flow segment
    {
        CheckResult c;
        c.name = "flow_xbar_conservation";
        c.established = true;
        for (const auto& seg : lay.segments) {
            const double ref = samples[seg.startIdx].xbar;
            for (int i = seg.startIdx + 1; i <= seg.endIdx; ++i) {
                const double slack = 1e-9 * (1.0 + std::abs(ref)) - std::abs(samples[i].xbar - ref);
                if (slack < c.worstSlack) {
                    c.worstSlack = slack;
                    c.worstAt = locate(samples[i].t, -1);
                }
                if (slack < 0.0) c.pass = c.observedPass = false;
            }
        }
        report.checks.push_back(std::move(c));
    }

    // --- exponential decay of V along flow (root-block dispersion)
    {
        CheckResult c;
        c.name = "lemma2_flow_decay";
        if (spec.degenerateRoot) {
            c.note = "single-vertex root: V vanishes on the root block";
            c.established = false;
        } else {
            c.established = true;
            const double rate = spec.lambda2 / spec.maxXi;
            for (const auto& seg : lay.segments) {
                const double vPlus = samples[seg.startIdx].v;
                const double vMinus = samples[seg.endIdx].v;
                const double dt = samples[seg.endIdx].t - samples[seg.startIdx].t;
                const double bound = vPlus * std::exp(-rate * dt) * (1.0 + 1e-6);
                double slack;
                if (vMinus > 0.0) {
                    slack = bound / vMinus - 1.0;
                } else {
                    slack = std::numeric_limits<double>::infinity();
                }
                if (slack < c.worstSlack) {
                    c.worstSlack = slack;
                    c.worstAt = locate(samples[seg.endIdx].t, seg.endImpulse);
                }
                if (slack < 0.0) c.pass = c.observedPass = false;
            }
        }
        report.checks.push_back(std::move(c));
    }

    // Hypothesis gate per impulse: the pre-impulse dispersion-to-mean ratio
    // the gap rule guarantees, V- <= (eps^2/xi_r) xbar-^2.
    const int numImpulses = static_cast<int>(lay.impulsePairs.size());
    std::vector<char> hypothesisMet(numImpulses, 0);
    const bool certUsable = cert.xiR > 0.0 && cert.epsilon > 0.0;
    if (certUsable) {
        const double ratioCap = cert.epsilon * cert.epsilon / cert.xiR;
        for (int j = 0; j < numImpulses; ++j) {
            const auto& pre = samples[lay.impulsePairs[j].first];
            hypothesisMet[j] =
                pre.v <= ratioCap * pre.xbar * pre.xbar * (1.0 + 1e-9) ? 1 : 0;
        }
    }

    // --- jump bounds on |xbar| across each impulse
    {
        CheckResult c;
        c.name = "jump_bounds";
        if (!certUsable) {
            c.note = "certificate carries no admissible (eta, eps); bounds not defined";
        }
        for (int j = 0; j < numImpulses && certUsable; ++j) {
            const auto& pre = samples[lay.impulsePairs[j].first];
            const auto& post = samples[lay.impulsePairs[j].second];
            const double lo = (1.0 - cert.eta2 * (cert.xiR + cert.epsilon)) * std::abs(pre.xbar);
            const double hi = (1.0 - cert.eta1 * (cert.xiR - cert.epsilon)) * std::abs(pre.xbar);
            const double allowance = 1e-9 * (1.0 + std::abs(pre.xbar));
            const double slack = std::min(std::abs(post.xbar) - (lo - allowance),
                                          (hi + allowance) - std::abs(post.xbar)) /
                                 (1.0 + std::abs(pre.xbar));
            const bool ok = slack >= 0.0;
            const bool hyp = hypothesisMet[j] != 0;
            if (hyp) c.established = true;
            if ((hyp && slack < c.worstSlack) || (!c.established && slack < c.worstSlack)) {
                c.worstSlack = slack;
                c.worstAt = locate(pre.t, traj.impulses[j].k);
            }
            if (!ok) {
                c.observedPass = false;
                if (hyp) c.pass = false;
            }
        }
        if (certUsable && !c.established)
            c.note = "no impulse met the gap-rule hypothesis; bounds reported informationally";
        report.checks.push_back(std::move(c));
    }

    // --- post-impulse dispersion-to-mean ratio bound V+/xbar+^2 <= C
    {
        CheckResult c;
        c.name = "ratio_bound";
        if (!certUsable || !(cert.bigC > 0.0)) {
            c.note = "certificate carries no C; ratio not bounded";
        }
        for (int j = 0; j < numImpulses && certUsable && cert.bigC > 0.0; ++j) {
            const auto& post = samples[lay.impulsePairs[j].second];
            if (post.xbar == 0.0) continue;
            const double ratio = post.v / (post.xbar * post.xbar);
            const double slack = (cert.bigC * (1.0 + 1e-6) - ratio) / cert.bigC;
            const bool ok = slack >= 0.0;
            const bool hyp = hypothesisMet[j] != 0;
            if (hyp) c.established = true;
            if ((hyp && slack < c.worstSlack) || (!c.established && slack < c.worstSlack)) {
                c.worstSlack = slack;
                c.worstAt = locate(post.t, traj.impulses[j].k);
            }
            if (!ok) {
                c.observedPass = false;
                if (hyp) c.pass = false;
            }
        }
        if (certUsable && cert.bigC > 0.0 && !c.established)
            c.note = "gap rule not satisfied on this run; ratio bound not established";
        report.checks.push_back(std::move(c));
    }

    // --- geometric decay of the weighted mean
    {
        CheckResult c;
        c.name = "geometric_xbar_decay";
        const double xbar0 = std::abs(samples.front().xbar);
        if (!certUsable || !(cert.decayRatio > 0.0 && cert.decayRatio < 1.0)) {
            c.note = "certificate carries no decay ratio";
        } else if (xbar0 == 0.0) {
            c.note = "xbar(0) = 0; decay chain not defined";
        } else {
            bool chainEstablished = true;
            double bound = xbar0;
            for (int j = 0; j < numImpulses; ++j) {
                const auto& post = samples[lay.impulsePairs[j].second];
                chainEstablished = chainEstablished && hypothesisMet[j] != 0;
                bound *= cert.decayRatio;
                const double slack = (bound * (1.0 + 1e-6) - std::abs(post.xbar)) / bound;
                const bool ok = slack >= 0.0;
                if (chainEstablished) c.established = true;
                if ((chainEstablished && slack < c.worstSlack) ||
                    (!c.established && slack < c.worstSlack)) {
                    c.worstSlack = slack;
                    c.worstAt = locate(post.t, traj.impulses[j].k);
                }
                if (!ok) {
                    c.observedPass = false;
                    if (chainEstablished) c.pass = false;
                }
            }
            if (!c.established && numImpulses > 0)
                c.note = "decay chain broken at the first impulse; reported informationally";
        }
        report.checks.push_back(std::move(c));
    }

    // --- consensus: the run settled below its tolerance (asymptotic claim,
    // informational on any finite horizon)
    {
        CheckResult c;
        c.name = "consensus_cascade";
        c.established = false;
        const double finalVar = samples.back().var;
        c.worstSlack = traj.tolerance > 0.0 ? 1.0 - finalVar / traj.tolerance
                                            : -finalVar;
        c.observedPass = finalVar < traj.tolerance;
        c.worstAt = locate(samples.back().t, -1);
        std::ostringstream os;
        os << "final var = " << finalVar << " vs tolerance " << traj.tolerance;
        c.note = os.str();
        report.checks.push_back(std::move(c));
    }

    for (const auto& c : report.checks) {
        if (c.established && !c.pass) {
            report.pass = false;
            ++report.hardFailures;
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Parameter sweeps
// ---------------------------------------------------------------------------

struct SweepRunConfig {
    Vector x0;
    Horizon horizon;
    SimOptions options;
};

struct SweepPoint {
    double value = 0.0;
    Certificate cert;
    bool ran = false;
    bool converged = false;
    int impulses = 0;
    double finalVar = std::numeric_limits<double>::quiet_NaN();
};

/// Applies `param` = value to a copy of the base plan.
inline PinPlan plan_with_parameter(const PinPlan& base, const std::string& param, double value) {
    PinPlan plan = base;
    if (param == "b") {
        plan.strength = StrengthPolicy::constant(value);
    } else if (param == "dt") {
        plan.gap = GapPolicy::fixed(value, base.gap.dtMin);
    } else if (param == "epsilon") {
        plan.epsilonOverride = value;
    } else if (param == "r") {
        plan.r = static_cast<int>(value) - 1; // 1-based in sweep grids
    } else {
        throw DomainError("sweep: unknown parameter '" + param + "'");
    }
    return plan;
}

/// Evaluates the plan grid, fanning independent points out to a small
/// worker pool. Shared inputs are read-only; results keep grid order.
inline std::vector<SweepPoint> sweep_parameter(const Laplacian& lap, const SpectralData& spec,
                                               const PinPlan& basePlan, const std::string& param,
                                               const std::vector<double>& values,
                                               const std::optional<SweepRunConfig>& runConfig,
                                               std::uint64_t graphHash, unsigned jobs = 0) {
    std::vector<SweepPoint> points(values.size());
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    std::optional<InitialAggregates> init;
    if (runConfig)
        init = InitialAggregates{lyapunov_V(runConfig->x0, spec.xi),
                                 weighted_mean(runConfig->x0, spec.xi)};

    auto evalOne = [&](std::size_t i) {
        SweepPoint& pt = points[i];
        pt.value = values[i];
        const PinPlan plan = plan_with_parameter(basePlan, param, values[i]);
        pt.cert = validate_plan(lap, spec, plan, init, graphHash);
        if (runConfig && pt.cert.xiR > 0.0) {
            try {
                const Trajectory traj = run(lap, spec, plan, pt.cert, runConfig->x0,
                                            runConfig->horizon, runConfig->options);
                pt.ran = true;
                pt.converged = traj.termination == TerminationReason::ToleranceReached;
                pt.impulses = static_cast<int>(traj.impulses.size());
                pt.finalVar = traj.finalVar();
            } catch (const DivergenceError&) {
                pt.ran = true;
                pt.converged = false;
                pt.finalVar = std::numeric_limits<double>::infinity();
            }
        }
    };

    std::vector<std::future<void>> workers;
    std::atomic<std::size_t> cursor{0};
    for (unsigned w = 0; w < jobs; ++w) {
        workers.push_back(std::async(std::launch::async, [&]() {
            for (std::size_t i = cursor.fetch_add(1); i < values.size();
                 i = cursor.fetch_add(1))
                evalOne(i);
        }));
    }
    for (auto& f : workers) f.get();
    return points;
}

} // namespace pincon
