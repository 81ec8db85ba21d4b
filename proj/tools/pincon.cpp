// Command-line front end: spectral analysis, certificate synthesis, hybrid
// simulation, trajectory verification, parameter sweeps and the built-in
// end-to-end scenarios.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pincon/io.hpp"

namespace fs = std::filesystem;
using namespace pincon;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 1;
constexpr int kExitVerificationFailed = 2;

void print_analysis(const WeightedDigraph& g, const Laplacian& lap,
                    const SpectralData* spec) {
    std::cout << "n: " << g.n << "\n";
    if (g.hadDiagonalEntries)
        std::cout << "warning: diagonal weight entries were ignored\n";
    std::cout << "classification: " << to_string(lap.classification) << "\n";
    std::cout << "blocks: " << lap.blockSizes.size() << " [";
    for (std::size_t i = 0; i < lap.blockSizes.size(); ++i)
        std::cout << (i ? "," : "") << lap.blockSizes[i];
    std::cout << "]\n";
    std::cout << "permutation: ";
    if (lap.identityPermutation()) {
        std::cout << "identity\n";
    } else {
        for (std::size_t i = 0; i < lap.permutation.size(); ++i)
            std::cout << (i ? " " : "") << lap.permutation[i] + 1;
        std::cout << "\n";
    }
    if (!spec) {
        std::cout << "xi: undefined (no root component)\n";
        return;
    }
    if (g.n <= 16) {
        std::cout << "xi:";
        for (double v : spec->xi) std::cout << " " << detail::fmt(v);
        std::cout << "\n";
    } else {
        double mn = spec->xi[spec->rootSupport.front()];
        for (int i : spec->rootSupport) mn = std::min(mn, spec->xi[i]);
        std::cout << "xi: min=" << detail::fmt(mn) << " max=" << detail::fmt(spec->maxXi)
                  << " support=" << spec->rootSupport.size() << "/" << g.n << "\n";
    }
    if (spec->degenerateRoot)
        std::cout << "lambda2: undefined (single-vertex root)\n";
    else
        std::cout << "lambda2: " << detail::fmt(spec->lambda2) << "\n";
    std::cout << "xiResidual: " << detail::fmt(spec->xiResidual) << "\n";
    if (lap.classification == Connectivity::SpanningTree && !spec->degenerateRoot) {
        for (const auto& d : mmatrix_diagnostics(lap)) {
            std::cout << "block " << d.blockIndex << ": abscissa=" << detail::fmt(d.abscissa);
            if (d.diagonalizable)
                std::cout << " K=" << detail::fmt(d.boundK) << "\n";
            else
                std::cout << " K=unavailable (repeated eigenvalues)\n";
        }
    }
}

int cmd_analyze(const std::string& graphPath, bool asJson) {
    const WeightedDigraph g = load_graph_file(graphPath);
    const Laplacian lap = build_laplacian(g);
    std::optional<SpectralData> spec;
    if (lap.classification != Connectivity::NoRoot) spec = compute_spectral(lap);

    if (asJson) {
        json j = {{"n", g.n},
                  {"classification", to_string(lap.classification)},
                  {"blockSizes", lap.blockSizes},
                  {"graphHash", detail::hash_string(graph_hash(g))},
                  {"hadDiagonalEntries", g.hadDiagonalEntries}};
        json perm = json::array();
        for (int p : lap.permutation) perm.push_back(p + 1);
        j["permutation"] = std::move(perm);
        if (spec) {
            j["xi"] = spec->xi;
            j["maxXi"] = spec->maxXi;
            j["xiResidual"] = spec->xiResidual;
            j["degenerateRoot"] = spec->degenerateRoot;
            if (!spec->degenerateRoot) j["lambda2"] = spec->lambda2;
        }
        std::cout << j.dump(2) << "\n";
    } else {
        print_analysis(g, lap, spec ? &*spec : nullptr);
    }
    return kExitOk;
}

int cmd_synthesize(const std::string& graphPath, const std::string& planPath,
                   const std::string& outPath) {
    const WeightedDigraph g = load_graph_file(graphPath);
    const Laplacian lap = build_laplacian(g);
    auto [plan, init] = plan_from_json(detail::load_json_file(planPath));

    Certificate cert;
    if (lap.classification == Connectivity::NoRoot) {
        SpectralData none;
        cert = validate_plan(lap, none, plan, init, graph_hash(g));
    } else {
        const SpectralData spec = compute_spectral(lap);
        cert = validate_plan(lap, spec, plan, init, graph_hash(g));
    }

    detail::write_text_file(outPath, certificate_to_json(cert, &g).dump(2) + "\n");
    if (cert.valid) {
        std::cout << "certificate: valid  C=" << detail::fmt(cert.bigC)
                  << " T=" << detail::fmt(cert.minGapT)
                  << " decayRatio=" << detail::fmt(cert.decayRatio) << " -> " << outPath
                  << "\n";
        return kExitOk;
    }
    std::cout << "certificate: INVALID [";
    for (std::size_t i = 0; i < cert.reasons.size(); ++i)
        std::cout << (i ? "," : "") << to_string(cert.reasons[i]);
    std::cout << "] -> " << outPath << "\n";
    return kExitInvalidInput;
}

struct SimArtifacts {
    ResolvedScenario rs;
    Trajectory traj;
    fs::path trajPath, impPath, metaPath, certPath;
};

SimArtifacts simulate_scenario(const Scenario& sc, const fs::path& outdir) {
    SimArtifacts art;
    art.rs = resolve_scenario(sc);
    art.traj = run(art.rs.lap, art.rs.spec, art.rs.plan, art.rs.cert, art.rs.x0,
                   art.rs.horizon, art.rs.options);
    fs::create_directories(outdir);
    art.trajPath = outdir / art.rs.outputs.trajectoryCsv;
    art.impPath = outdir / art.rs.outputs.impulseCsv;
    art.metaPath = outdir / art.rs.outputs.metaJson;
    art.certPath = outdir / art.rs.outputs.certificateJson;
    detail::write_text_file(art.trajPath.string(), trajectory_csv(art.traj));
    detail::write_text_file(art.impPath.string(), impulse_csv(art.traj));
    detail::write_text_file(art.metaPath.string(),
                            trajectory_meta_to_json(art.traj, art.rs.graph,
                                                    art.rs.outputs.trajectoryCsv,
                                                    art.rs.outputs.impulseCsv)
                                    .dump(2) +
                                "\n");
    detail::write_text_file(art.certPath.string(),
                            certificate_to_json(art.rs.cert, &art.rs.graph).dump(2) + "\n");
    return art;
}

int cmd_simulate(const std::string& scenarioPath, const std::string& outdir) {
    const std::string baseDir = fs::path(scenarioPath).parent_path().string();
    const Scenario sc =
        scenario_from_json(detail::load_json_file(scenarioPath), baseDir.empty() ? "." : baseDir);
    const SimArtifacts art = simulate_scenario(sc, outdir);
    std::cout << "simulate: " << to_string(art.traj.termination) << " after "
              << art.traj.impulses.size() << " impulses, t=" << art.traj.samples.back().t
              << ", final var=" << detail::fmt(art.traj.finalVar()) << "\n";
    std::cout << "  trajectory: " << art.trajPath.string() << "\n";
    std::cout << "  impulses:   " << art.impPath.string() << "\n";
    std::cout << "  metadata:   " << art.metaPath.string() << "\n";
    std::cout << "  certificate:" << art.certPath.string() << "\n";
    return kExitOk;
}

int report_and_exit(const VerificationReport& report, const Certificate& cert,
                    const std::string& format, const std::string& outPath) {
    std::string text = format == "csv" ? report_to_csv(report)
                                       : report_to_json(report, cert).dump(2) + "\n";
    if (outPath.empty())
        std::cout << text;
    else
        detail::write_text_file(outPath, text);
    for (const auto& c : report.checks) {
        std::printf("%-24s %s%s  worstSlack=%.3e %s\n", c.name.c_str(),
                    c.observedPass ? "pass" : "FAIL",
                    c.established ? "" : " (informational)", c.worstSlack,
                    c.worstAt.c_str());
    }
    std::cout << "verdict: " << (report.pass ? "pass" : "FAIL") << " (" << report.hardFailures
              << " hard failures)\n";
    return report.pass ? kExitOk : kExitVerificationFailed;
}

int cmd_verify(const std::string& metaPath, const std::string& certPath,
               const std::string& format, const std::string& outPath) {
    auto [traj, graph] = load_trajectory(metaPath);
    std::optional<WeightedDigraph> certGraph;
    const Certificate cert = certificate_from_json(detail::load_json_file(certPath), &certGraph);
    const Laplacian lap = build_laplacian(graph);
    const SpectralData spec = compute_spectral(lap);
    const VerificationReport report =
        verify_trajectory(traj, lap, spec, cert, graph_hash(graph));
    return report_and_exit(report, cert, format, outPath);
}

std::vector<double> parse_grid_values(const std::string& text, std::string& name) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError("grid: expected name=values");
    name = text.substr(0, eq);
    const std::string values = text.substr(eq + 1);
    std::vector<double> out;
    if (values.find(':') != std::string::npos) {
        double lo, hi, step;
        if (std::sscanf(values.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0.0)
            throw ParseError("grid: expected lo:hi:step with step > 0");
        for (double v = lo; v <= hi + 1e-12 * step; v += step) out.push_back(v);
    } else {
        std::stringstream ss(values);
        std::string field;
        while (std::getline(ss, field, ',')) out.push_back(std::stod(field));
    }
    if (out.empty()) throw ParseError("grid: no values");
    return out;
}

int cmd_sweep(const std::string& scenarioPath, const std::string& grid, bool doRun,
              const std::string& outPath, unsigned jobs) {
    const std::string baseDir = fs::path(scenarioPath).parent_path().string();
    const Scenario sc =
        scenario_from_json(detail::load_json_file(scenarioPath), baseDir.empty() ? "." : baseDir);
    const ResolvedScenario rs = resolve_scenario(sc);

    std::string param;
    const std::vector<double> values = parse_grid_values(grid, param);
    std::optional<SweepRunConfig> runCfg;
    if (doRun) runCfg = SweepRunConfig{rs.x0, rs.horizon, rs.options};

    const std::vector<SweepPoint> points =
        sweep_parameter(rs.lap, rs.spec, rs.plan, param, values, runCfg, rs.graphHash, jobs);

    std::ostringstream os;
    os << param << ",valid,reasons,bigC,minGapT";
    if (doRun) os << ",converged,impulses,finalVar";
    os << "\n";
    for (const auto& pt : points) {
        os << detail::fmt(pt.value) << ',' << (pt.cert.valid ? 1 : 0) << ",\"";
        for (std::size_t i = 0; i < pt.cert.reasons.size(); ++i)
            os << (i ? ";" : "") << to_string(pt.cert.reasons[i]);
        os << "\"," << detail::fmt(pt.cert.bigC) << ',' << detail::fmt(pt.cert.minGapT);
        if (doRun) {
            os << ',' << (pt.converged ? 1 : 0) << ',' << pt.impulses << ','
               << detail::fmt(pt.finalVar);
        }
        os << "\n";
    }
    if (outPath.empty())
        std::cout << os.str();
    else
        detail::write_text_file(outPath, os.str());
    return kExitOk;
}

int cmd_repro(const std::string& name, const std::string& outdirArg) {
    const Scenario sc = repro_scenario(name);
    const fs::path outdir = outdirArg.empty() ? fs::path("repro_" + name) : fs::path(outdirArg);
    const SimArtifacts art = simulate_scenario(sc, outdir);
    detail::write_text_file((outdir / "scenario.json").string(),
                            scenario_to_json(sc).dump(2) + "\n");

    std::cout << name << ": " << to_string(art.traj.termination) << " after "
              << art.traj.impulses.size() << " impulses, t=" << art.traj.samples.back().t
              << ", final var=" << detail::fmt(art.traj.finalVar()) << "\n";
    std::cout << "  xbar0=" << detail::fmt(weighted_mean(art.rs.x0, art.rs.spec.xi))
              << " V0=" << detail::fmt(lyapunov_V(art.rs.x0, art.rs.spec.xi))
              << " lambda2=" << detail::fmt(art.rs.spec.lambda2)
              << " C=" << detail::fmt(art.rs.cert.bigC)
              << " T=" << detail::fmt(art.rs.cert.minGapT) << "\n";

    const VerificationReport report = verify_trajectory(art.traj, art.rs.lap, art.rs.spec,
                                                        art.rs.cert, art.rs.graphHash);
    return report_and_exit(report, art.rs.cert, "json",
                           (outdir / art.rs.outputs.reportJson).string());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-node impulsive pinning control for linear consensus networks"};
    app.require_subcommand(1);

    std::string graphPath, planPath, scenarioPath, metaPath, certPath, reproName;
    std::string outPath, outdir = ".", format = "json", grid;
    bool asJson = false, doRun = false;
    unsigned jobs = 0;

    auto* analyze = app.add_subcommand("analyze", "classification, xi, lambda2, block structure");
    analyze->add_option("graph", graphPath, "graph JSON file")->required();
    analyze->add_flag("--json", asJson, "structured output");

    auto* synth = app.add_subcommand("synthesize", "certificate for a pin plan");
    synth->add_option("graph", graphPath, "graph JSON file")->required();
    synth->add_option("plan", planPath, "plan JSON file")->required();
    synth->add_option("-o,--out", outPath, "certificate output path")->required();

    auto* sim = app.add_subcommand("simulate", "run a scenario, write trajectory artifacts");
    sim->add_option("scenario", scenarioPath, "scenario JSON file")->required();
    sim->add_option("--outdir", outdir, "artifact directory");

    auto* verify = app.add_subcommand("verify", "check recorded invariants of a trajectory");
    verify->add_option("trajectory", metaPath, "trajectory metadata JSON")->required();
    verify->add_option("certificate", certPath, "certificate JSON")->required();
    verify->add_option("--format", format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    verify->add_option("-o,--out", outPath, "report output path (default stdout)");

    auto* sweep = app.add_subcommand("sweep", "tabulate validity/convergence over a grid");
    sweep->add_option("scenario", scenarioPath, "scenario JSON file")->required();
    sweep->add_option("--grid", grid, "parameter grid, e.g. b=1:120:1 or dt=10,15,30")
        ->required();
    sweep->add_flag("--run", doRun, "also simulate each grid point");
    sweep->add_option("-o,--out", outPath, "table output path (default stdout)");
    sweep->add_option("--jobs", jobs, "worker threads (default: hardware)");

    auto* repro = app.add_subcommand("repro", "run a built-in end-to-end scenario");
    repro->add_option("name", reproName, "example1|example2")
        ->required()
        ->check(CLI::IsMember({"example1", "example2"}));
    repro->add_option("--outdir", outPath, "artifact directory (default repro_<name>)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) return cmd_analyze(graphPath, asJson);
        if (synth->parsed()) return cmd_synthesize(graphPath, planPath, outPath);
        if (sim->parsed()) return cmd_simulate(scenarioPath, outdir);
        if (verify->parsed()) return cmd_verify(metaPath, certPath, format, outPath);
        if (sweep->parsed()) return cmd_sweep(scenarioPath, grid, doRun, outPath, jobs);
        if (repro->parsed()) return cmd_repro(reproName, outPath);
    } catch (const MismatchError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    }
    return kExitOk;
}
