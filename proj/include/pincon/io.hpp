#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pincon/controller.hpp"
#include "pincon/errors.hpp"
#include "pincon/graph.hpp"
#include "pincon/harness.hpp"
#include "pincon/simulator.hpp"
#include "pincon/version.hpp"

namespace pincon {

using nlohmann::json;

// Vertex indices are 1-based in every file format; the API is 0-based.

// ---------------------------------------------------------------------------
// Formatting helpers
// ---------------------------------------------------------------------------

namespace detail {

/// Shortest exact decimal form of a double; byte-stable for golden files.
inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string hash_string(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::uint64_t hash_from_string(const std::string& s) {
    return std::stoull(s, nullptr, 16);
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    out << text;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Graphs
// ---------------------------------------------------------------------------

inline json graph_to_json(const WeightedDigraph& g) {
    json edges = json::array();
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i)
            if (g.weights(i, j) != 0.0)
                edges.push_back({{"from", j + 1}, {"to", i + 1}, {"weight", g.weights(i, j)}});
    return {{"n", g.n}, {"edges", std::move(edges)}};
}

inline WeightedDigraph graph_from_json(const json& j) {
    try {
        const int n = j.at("n").get<int>();
        if (j.contains("weights")) {
            const auto& rows = j.at("weights");
            if (static_cast<int>(rows.size()) != n)
                throw ParseError("graph: weights matrix must have n rows");
            Matrix w(n, n);
            for (int i = 0; i < n; ++i) {
                const auto& row = rows.at(i);
                if (static_cast<int>(row.size()) != n)
                    throw ParseError("graph: weights matrix must be n x n");
                for (int k = 0; k < n; ++k) w(i, k) = row.at(k).get<double>();
            }
            return WeightedDigraph::fromWeights(std::move(w));
        }
        std::vector<WeightedDigraph::Edge> edges;
        for (const auto& e : j.at("edges")) {
            edges.push_back({e.at("from").get<int>() - 1, e.at("to").get<int>() - 1,
                             e.value("weight", 1.0)});
        }
        return WeightedDigraph::fromEdges(n, edges);
    } catch (const json::exception& e) {
        throw ParseError(std::string("graph: ") + e.what());
    }
}

inline WeightedDigraph load_graph_file(const std::string& path) {
    return graph_from_json(detail::load_json_file(path));
}

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

inline json strength_to_json(const StrengthPolicy& p) {
    switch (p.kind) {
        case StrengthPolicyKind::Constant:
            return {{"type", "constant"}, {"b", p.b}};
        case StrengthPolicyKind::Sequence:
            return {{"type", "sequence"}, {"values", p.sequence}};
        case StrengthPolicyKind::RandomIn:
            return {{"type", "random"}, {"eta1", p.eta1}, {"eta2", p.eta2}, {"seed", p.seed}};
    }
    return {};
}

inline StrengthPolicy strength_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "constant") return StrengthPolicy::constant(j.at("b").get<double>());
    if (type == "sequence")
        return StrengthPolicy::fromSequence(j.at("values").get<std::vector<double>>());
    if (type == "random")
        return StrengthPolicy::randomIn(j.at("eta1").get<double>(), j.at("eta2").get<double>(),
                                        j.at("seed").get<std::uint64_t>());
    throw ParseError("strength: unknown type '" + type + "'");
}

inline json gap_to_json(const GapPolicy& g) {
    if (g.kind == GapPolicyKind::Fixed)
        return {{"type", "fixed"}, {"dt", g.dt}, {"dtMin", g.dtMin}};
    return {{"type", "adaptive"}, {"dtMin", g.dtMin}};
}

inline GapPolicy gap_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    const double dtMin = j.value("dtMin", 1e-3);
    if (dtMin <= 0.0) throw ParseError("gap: dtMin must be positive");
    if (type == "fixed") {
        const double dt = j.at("dt").get<double>();
        if (dt <= 0.0) throw ParseError("gap: dt must be positive");
        return GapPolicy::fixed(dt, dtMin);
    }
    if (type == "adaptive") return GapPolicy::adaptive(dtMin);
    throw ParseError("gap: unknown type '" + type + "'");
}

inline json plan_to_json(const PinPlan& p, const std::optional<InitialAggregates>& init = {}) {
    json j = {{"r", p.r + 1},
              {"s", p.s},
              {"strength", strength_to_json(p.strength)},
              {"gap", gap_to_json(p.gap)}};
    if (p.epsilonOverride) j["epsilon"] = *p.epsilonOverride;
    if (init) {
        j["v0"] = init->v0;
        j["xbar0"] = init->xbar0;
    }
    return j;
}

inline std::pair<PinPlan, std::optional<InitialAggregates>> plan_from_json(const json& j) {
    try {
        PinPlan p;
        p.r = j.at("r").get<int>() - 1;
        p.s = j.value("s", 0.0);
        p.strength = strength_from_json(j.at("strength"));
        p.gap = gap_from_json(j.at("gap"));
        if (j.contains("epsilon")) p.epsilonOverride = j.at("epsilon").get<double>();
        std::optional<InitialAggregates> init;
        if (j.contains("v0") && j.contains("xbar0"))
            init = InitialAggregates{j.at("v0").get<double>(), j.at("xbar0").get<double>()};
        return {std::move(p), init};
    } catch (const json::exception& e) {
        throw ParseError(std::string("plan: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

inline json certificate_to_json(const Certificate& c, const WeightedDigraph* graph = nullptr) {
    json reasons = json::array();
    for (ReasonCode r : c.reasons) reasons.push_back(to_string(r));
    json j = {{"version", c.version},
              {"graphHash", detail::hash_string(c.graphHash)},
              {"r", c.r + 1},
              {"s", c.s},
              {"xiR", c.xiR},
              {"eta1", c.eta1},
              {"eta2", c.eta2},
              {"epsilon", c.epsilon},
              {"bigC", c.bigC},
              {"minGapT", c.minGapT},
              {"decayRatio", c.decayRatio},
              {"valid", c.valid},
              {"reasons", std::move(reasons)},
              {"degenerateRoot", c.degenerateRoot},
              {"tClamped", c.tClamped},
              {"lambda2", c.lambda2},
              {"maxXi", c.maxXi},
              {"dtMin", c.dtMin},
              {"xiResidual", c.xiResidual},
              {"strength", strength_to_json(c.strength)},
              {"gap", gap_to_json(c.gapPolicy)}};
    if (c.v0) j["v0"] = *c.v0;
    if (c.xbar0) j["xbar0"] = *c.xbar0;
    if (graph) j["graph"] = graph_to_json(*graph);
    return j;
}

inline ReasonCode reason_from_string(const std::string& s) {
    if (s == "NoRoot") return ReasonCode::NoRoot;
    if (s == "NotInRoot") return ReasonCode::NotInRoot;
    if (s == "StrengthOutOfRange") return ReasonCode::StrengthOutOfRange;
    if (s == "EpsilonOutOfRange") return ReasonCode::EpsilonOutOfRange;
    if (s == "GapBelowMinimum") return ReasonCode::GapBelowMinimum;
    if (s == "ZeroMean") return ReasonCode::ZeroMean;
    throw ParseError("certificate: unknown reason code '" + s + "'");
}

inline Certificate certificate_from_json(const json& j,
                                         std::optional<WeightedDigraph>* graphOut = nullptr) {
    try {
        Certificate c;
        c.version = j.at("version").get<std::string>();
        c.graphHash = detail::hash_from_string(j.at("graphHash").get<std::string>());
        c.r = j.at("r").get<int>() - 1;
        c.s = j.at("s").get<double>();
        c.xiR = j.at("xiR").get<double>();
        c.eta1 = j.at("eta1").get<double>();
        c.eta2 = j.at("eta2").get<double>();
        c.epsilon = j.at("epsilon").get<double>();
        c.bigC = j.at("bigC").get<double>();
        c.minGapT = j.at("minGapT").get<double>();
        c.decayRatio = j.at("decayRatio").get<double>();
        c.valid = j.at("valid").get<bool>();
        for (const auto& r : j.at("reasons")) c.reasons.push_back(reason_from_string(r));
        c.degenerateRoot = j.at("degenerateRoot").get<bool>();
        c.tClamped = j.at("tClamped").get<bool>();
        c.lambda2 = j.at("lambda2").get<double>();
        c.maxXi = j.at("maxXi").get<double>();
        c.dtMin = j.at("dtMin").get<double>();
        c.xiResidual = j.at("xiResidual").get<double>();
        c.strength = strength_from_json(j.at("strength"));
        c.gapPolicy = gap_from_json(j.at("gap"));
        if (j.contains("v0")) c.v0 = j.at("v0").get<double>();
        if (j.contains("xbar0")) c.xbar0 = j.at("xbar0").get<double>();
        if (graphOut && j.contains("graph")) *graphOut = graph_from_json(j.at("graph"));
        return c;
    } catch (const json::exception& e) {
        throw ParseError(std::string("certificate: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Trajectory CSV + metadata
// ---------------------------------------------------------------------------

inline std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream os;
    const int n = traj.samples.empty() ? 0 : static_cast<int>(traj.samples.front().x.size());
    os << "t,phase";
    for (int i = 1; i <= n; ++i) os << ",x_" << i;
    os << ",xbar,V,var\n";
    for (const auto& s : traj.samples) {
        os << detail::fmt(s.t) << ',' << to_string(s.phase);
        for (double v : s.x) os << ',' << detail::fmt(v);
        os << ',' << detail::fmt(s.xbar) << ',' << detail::fmt(s.v) << ','
           << detail::fmt(s.var) << '\n';
    }
    return os.str();
}

inline std::string impulse_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << "k,t_k,b_k,x_r_pre,x_r_post\n";
    for (const auto& im : traj.impulses) {
        os << im.k << ',' << detail::fmt(im.t) << ',' << detail::fmt(im.b) << ','
           << detail::fmt(im.xrPre) << ',' << detail::fmt(im.xrPost) << '\n';
    }
    return os.str();
}

inline json trajectory_meta_to_json(const Trajectory& traj, const WeightedDigraph& graph,
                                    const std::string& trajectoryCsvPath,
                                    const std::string& impulseCsvPath) {
    return {{"version", kVersion},
            {"graphHash", detail::hash_string(traj.graphHash)},
            {"graph", graph_to_json(graph)},
            {"r", traj.r + 1},
            {"s", traj.s},
            {"tolerance", traj.tolerance},
            {"termination", to_string(traj.termination)},
            {"trajectoryCsv", trajectoryCsvPath},
            {"impulseCsv", impulseCsvPath},
            {"samples", traj.samples.size()},
            {"impulses", traj.impulses.size()}};
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    out.push_back(std::move(field));
    return out;
}

inline Phase phase_from_string(const std::string& s) {
    if (s == "flow") return Phase::Flow;
    if (s == "preImpulse") return Phase::PreImpulse;
    if (s == "postImpulse") return Phase::PostImpulse;
    throw ParseError("trajectory: unknown phase '" + s + "'");
}

inline TerminationReason termination_from_string(const std::string& s) {
    if (s == "toleranceReached") return TerminationReason::ToleranceReached;
    if (s == "maxImpulses") return TerminationReason::MaxImpulses;
    if (s == "maxTime") return TerminationReason::MaxTime;
    throw ParseError("trajectory: unknown termination '" + s + "'");
}

} // namespace detail

/// Loads a trajectory from its metadata file plus the two CSV artifacts it
/// references (paths taken relative to the metadata file's directory).
inline std::pair<Trajectory, WeightedDigraph> load_trajectory(const std::string& metaPath) {
    const json meta = detail::load_json_file(metaPath);
    Trajectory traj;
    WeightedDigraph graph;
    try {
        graph = graph_from_json(meta.at("graph"));
        traj.graphHash = detail::hash_from_string(meta.at("graphHash").get<std::string>());
        traj.r = meta.at("r").get<int>() - 1;
        traj.s = meta.at("s").get<double>();
        traj.tolerance = meta.at("tolerance").get<double>();
        traj.termination = detail::termination_from_string(meta.at("termination").get<std::string>());
    } catch (const json::exception& e) {
        throw ParseError(metaPath + ": " + e.what());
    }

    const auto base = std::filesystem::path(metaPath).parent_path();
    auto resolve = [&base](const std::string& p) {
        const std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };

    std::ifstream tin(resolve(meta.at("trajectoryCsv").get<std::string>()));
    if (!tin) throw ParseError("cannot open trajectory csv");
    std::string line;
    std::getline(tin, line); // header
    while (std::getline(tin, line)) {
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() < 5) throw ParseError("trajectory csv: short row");
        TrajectorySample s;
        s.t = std::stod(fields[0]);
        s.phase = detail::phase_from_string(fields[1]);
        const std::size_t nx = fields.size() - 5;
        s.x.resize(nx);
        for (std::size_t i = 0; i < nx; ++i) s.x[i] = std::stod(fields[2 + i]);
        s.xbar = std::stod(fields[fields.size() - 3]);
        s.v = std::stod(fields[fields.size() - 2]);
        s.var = std::stod(fields[fields.size() - 1]);
        traj.samples.push_back(std::move(s));
    }

    std::ifstream iin(resolve(meta.at("impulseCsv").get<std::string>()));
    if (!iin) throw ParseError("cannot open impulse csv");
    std::getline(iin, line); // header
    while (std::getline(iin, line)) {
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 5) throw ParseError("impulse csv: malformed row");
        ImpulseRecord rec;
        rec.k = std::stoi(fields[0]);
        rec.t = std::stod(fields[1]);
        rec.b = std::stod(fields[2]);
        rec.xrPre = std::stod(fields[3]);
        rec.xrPost = std::stod(fields[4]);
        traj.impulses.push_back(rec);
    }
    return {std::move(traj), std::move(graph)};
}

// ---------------------------------------------------------------------------
// Verification reports
// ---------------------------------------------------------------------------

inline json report_to_json(const VerificationReport& report, const Certificate& cert) {
    json checks = json::array();
    for (const auto& c : report.checks) {
        checks.push_back({{"name", c.name},
                          {"established", c.established},
                          {"pass", c.pass},
                          {"observedPass", c.observedPass},
                          {"worstSlack", c.worstSlack},
                          {"worstAt", c.worstAt},
                          {"note", c.note}});
    }
    return {{"summary", report.pass ? "pass" : "fail"},
            {"hardFailures", report.hardFailures},
            {"checks", std::move(checks)},
            {"certificate", certificate_to_json(cert)}};
}

inline std::string report_to_csv(const VerificationReport& report) {
    std::ostringstream os;
    os << "name,established,pass,observedPass,worstSlack,worstAt,note\n";
    for (const auto& c : report.checks) {
        os << c.name << ',' << (c.established ? 1 : 0) << ',' << (c.pass ? 1 : 0) << ','
           << (c.observedPass ? 1 : 0) << ',' << detail::fmt(c.worstSlack) << ",\""
           << c.worstAt << "\",\"" << c.note << "\"\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

struct GeneratorSpec {
    enum class Kind { Ring, GrownTree } kind = Kind::Ring;
    int n = 0;            // Ring
    double weight = 1.0;  // Ring
    int baseRing = 0;     // GrownTree
    int total = 0;        // GrownTree
    std::uint64_t seed = 0;
};

struct Scenario {
    // graph source: exactly one of these is active
    std::optional<WeightedDigraph> inlineGraph;
    std::optional<GeneratorSpec> generator;
    std::optional<std::string> graphFile;

    PinPlan plan;
    std::optional<InitialAggregates> planAggregates;

    // initial state: explicit values or a seeded aggregate-matching draw
    std::optional<Vector> explicitX0;
    struct RandomX0 {
        std::uint64_t seed = 0;
        double xbar = 0.0;
        double v = 1.0;
    };
    std::optional<RandomX0> randomX0;

    Horizon horizon;
    SimOptions options;

    struct Outputs {
        std::string trajectoryCsv = "trajectory.csv";
        std::string impulseCsv = "impulses.csv";
        std::string metaJson = "trajectory_meta.json";
        std::string certificateJson = "certificate.json";
        std::string reportJson = "report.json";
    } outputs;
};

inline Scenario scenario_from_json(const json& j, const std::string& baseDir = ".") {
    Scenario sc;
    try {
        const auto& g = j.at("graph");
        if (g.contains("generator")) {
            const auto& spec = g.at("generator");
            GeneratorSpec gen;
            const std::string type = spec.at("type").get<std::string>();
            if (type == "ring") {
                gen.kind = GeneratorSpec::Kind::Ring;
                gen.n = spec.at("n").get<int>();
                gen.weight = spec.value("weight", 1.0);
            } else if (type == "grownTree") {
                gen.kind = GeneratorSpec::Kind::GrownTree;
                gen.baseRing = spec.at("baseRing").get<int>();
                gen.total = spec.at("total").get<int>();
                gen.seed = spec.at("seed").get<std::uint64_t>();
            } else {
                throw ParseError("scenario: unknown generator '" + type + "'");
            }
            sc.generator = gen;
        } else if (g.contains("file")) {
            const std::filesystem::path p(g.at("file").get<std::string>());
            sc.graphFile = p.is_absolute() ? p.string()
                                           : (std::filesystem::path(baseDir) / p).string();
        } else if (g.contains("inline")) {
            sc.inlineGraph = graph_from_json(g.at("inline"));
        } else {
            throw ParseError("scenario: graph needs one of generator/file/inline");
        }

        auto [plan, agg] = plan_from_json(j.at("plan"));
        sc.plan = std::move(plan);
        sc.planAggregates = agg;

        const auto& init = j.at("initialState");
        if (init.contains("values")) {
            sc.explicitX0 = init.at("values").get<Vector>();
        } else if (init.contains("random")) {
            const auto& r = init.at("random");
            sc.randomX0 = Scenario::RandomX0{r.at("seed").get<std::uint64_t>(),
                                             r.at("xbar").get<double>(), r.at("v").get<double>()};
        } else {
            throw ParseError("scenario: initialState needs values or random");
        }

        if (j.contains("horizon")) {
            const auto& h = j.at("horizon");
            sc.horizon.maxImpulses = h.value("maxImpulses", sc.horizon.maxImpulses);
            sc.horizon.maxTime = h.value("maxTime", sc.horizon.maxTime);
            sc.horizon.tolerance = h.value("tolerance", sc.horizon.tolerance);
        }
        if (j.contains("options")) {
            const auto& o = j.at("options");
            const std::string backend = o.value("backend", "expm");
            if (backend == "expm") sc.options.backend = FlowBackend::Expm;
            else if (backend == "rk4") sc.options.backend = FlowBackend::Rk4;
            else throw ParseError("scenario: unknown backend '" + backend + "'");
            sc.options.sampleEvery = o.value("sampleEvery", sc.options.sampleEvery);
            sc.options.impulseAtZero = o.value("impulseAtZero", sc.options.impulseAtZero);
            sc.options.divergenceGuard = o.value("divergenceGuard", sc.options.divergenceGuard);
        }
        if (j.contains("outputs")) {
            const auto& o = j.at("outputs");
            sc.outputs.trajectoryCsv = o.value("trajectoryCsv", sc.outputs.trajectoryCsv);
            sc.outputs.impulseCsv = o.value("impulseCsv", sc.outputs.impulseCsv);
            sc.outputs.metaJson = o.value("metaJson", sc.outputs.metaJson);
            sc.outputs.certificateJson = o.value("certificateJson", sc.outputs.certificateJson);
            sc.outputs.reportJson = o.value("reportJson", sc.outputs.reportJson);
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }
    return sc;
}

inline json scenario_to_json(const Scenario& sc) {
    json j;
    if (sc.generator) {
        const auto& g = *sc.generator;
        if (g.kind == GeneratorSpec::Kind::Ring)
            j["graph"] = {{"generator", {{"type", "ring"}, {"n", g.n}, {"weight", g.weight}}}};
        else
            j["graph"] = {{"generator",
                           {{"type", "grownTree"},
                            {"baseRing", g.baseRing},
                            {"total", g.total},
                            {"seed", g.seed}}}};
    } else if (sc.graphFile) {
        j["graph"] = {{"file", *sc.graphFile}};
    } else if (sc.inlineGraph) {
        j["graph"] = {{"inline", graph_to_json(*sc.inlineGraph)}};
    }
    j["plan"] = plan_to_json(sc.plan, sc.planAggregates);
    if (sc.explicitX0) {
        j["initialState"] = {{"values", *sc.explicitX0}};
    } else if (sc.randomX0) {
        j["initialState"] = {{"random",
                              {{"seed", sc.randomX0->seed},
                               {"xbar", sc.randomX0->xbar},
                               {"v", sc.randomX0->v}}}};
    }
    j["horizon"] = {{"maxImpulses", sc.horizon.maxImpulses},
                    {"maxTime", sc.horizon.maxTime},
                    {"tolerance", sc.horizon.tolerance}};
    j["options"] = {{"backend", sc.options.backend == FlowBackend::Expm ? "expm" : "rk4"},
                    {"sampleEvery", sc.options.sampleEvery},
                    {"impulseAtZero", sc.options.impulseAtZero},
                    {"divergenceGuard", sc.options.divergenceGuard}};
    j["outputs"] = {{"trajectoryCsv", sc.outputs.trajectoryCsv},
                    {"impulseCsv", sc.outputs.impulseCsv},
                    {"metaJson", sc.outputs.metaJson},
                    {"certificateJson", sc.outputs.certificateJson},
                    {"reportJson", sc.outputs.reportJson}};
    return j;
}

/// A scenario made concrete: graph, spectrum, certificate and initial
/// state, deterministic in (file, seed).
struct ResolvedScenario {
    WeightedDigraph graph;
    Laplacian lap;
    SpectralData spec;
    PinPlan plan;
    Certificate cert;
    Vector x0;
    Horizon horizon;
    SimOptions options;
    Scenario::Outputs outputs;
    std::uint64_t graphHash = 0;
};

/// Built-in end-to-end scenarios: the 100-vertex ring under b = 11 with
/// gap 1867, and the 10-ring grown to 100 vertices under b = 5 with gap
/// 15. Initial states are seeded draws pinned to the documented
/// weighted-mean/dispersion aggregates (also shipped as fixture files).
/// Neither places an impulse at t = 0, so the first gap itself discharges
/// the initial dispersion-to-mean ratio.
inline Scenario repro_scenario(const std::string& name) {
    Scenario sc;
    sc.plan.r = 0;
    sc.plan.s = 0.0;
    if (name == "example1") {
        GeneratorSpec gen;
        gen.kind = GeneratorSpec::Kind::Ring;
        gen.n = 100;
        gen.weight = 1.0;
        sc.generator = gen;
        sc.plan.strength = StrengthPolicy::constant(11.0);
        sc.plan.gap = GapPolicy::fixed(1867.0);
        sc.plan.epsilonOverride = 0.00999;
        sc.randomX0 = Scenario::RandomX0{1, 0.4886, 0.5935};
        sc.horizon = {120, 2.5e5, 1e-3};
        sc.options.sampleEvery = 233.375; // 1867 / 8
    } else if (name == "example2") {
        GeneratorSpec gen;
        gen.kind = GeneratorSpec::Kind::GrownTree;
        gen.baseRing = 10;
        gen.total = 100;
        gen.seed = 7;
        sc.generator = gen;
        sc.plan.strength = StrengthPolicy::constant(5.0);
        sc.plan.gap = GapPolicy::fixed(15.0);
        sc.plan.epsilonOverride = 0.09;
        sc.randomX0 = Scenario::RandomX0{2, 0.3909, 0.6369};
        sc.horizon = {40, 1000.0, 1e-3};
        sc.options.sampleEvery = 1.875; // 15 / 8
    } else {
        throw ParseError("unknown repro scenario '" + name + "'");
    }
    sc.options.backend = FlowBackend::Expm;
    sc.options.impulseAtZero = false;
    return sc;
}

inline ResolvedScenario resolve_scenario(const Scenario& sc) {
    ResolvedScenario r;
    if (sc.generator) {
        const auto& g = *sc.generator;
        r.graph = g.kind == GeneratorSpec::Kind::Ring
                      ? gen_ring(g.n, g.weight)
                      : gen_grown_tree(g.baseRing, g.total, g.seed);
    } else if (sc.graphFile) {
        r.graph = load_graph_file(*sc.graphFile);
    } else if (sc.inlineGraph) {
        r.graph = *sc.inlineGraph;
    } else {
        throw ParseError("scenario: no graph source");
    }
    r.graphHash = graph_hash(r.graph);
    r.lap = build_laplacian(r.graph);
    r.spec = compute_spectral(r.lap); // NoRootError propagates
    if (sc.explicitX0) {
        if (static_cast<int>(sc.explicitX0->size()) != r.graph.n)
            throw ParseError("scenario: initialState length != n");
        r.x0 = *sc.explicitX0;
    } else {
        r.x0 = fixture_initial_state(r.spec.xi, sc.randomX0->xbar, sc.randomX0->v,
                                     sc.randomX0->seed);
    }
    r.plan = sc.plan;
    std::optional<InitialAggregates> init = sc.planAggregates;
    if (!init)
        init = InitialAggregates{lyapunov_V(r.x0, r.spec.xi), weighted_mean(r.x0, r.spec.xi)};
    r.cert = validate_plan(r.lap, r.spec, r.plan, init, r.graphHash);
    r.horizon = sc.horizon;
    r.options = sc.options;
    r.outputs = sc.outputs;
    return r;
}

} // namespace pincon
