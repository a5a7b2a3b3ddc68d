// Command-line front end: gen | analyze | simulate | experiment.

#include <semipart/assign.hpp>
#include <semipart/demand.hpp>
#include <semipart/experiment.hpp>
#include <semipart/io.hpp>
#include <semipart/sim.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

namespace {

using namespace semipart;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

constexpr std::uint64_t kDefaultSeed = 1;
constexpr std::size_t kDefaultFrames = 20;
constexpr Ticks kSimulationCeiling = 1'000'000;

TestMode parse_mode(const std::string& name) {
    if (name == "packed") {
        return TestMode::Packed;
    }
    if (name == "pattern") {
        return TestMode::Pattern;
    }
    throw CLI::ValidationError("--mode", "expected packed or pattern");
}

UtilizationSampler parse_sampler(const std::string& name) {
    return name == "simplex" ? UtilizationSampler::Simplex : UtilizationSampler::SequentialTruncate;
}

void print_warnings(const io::SystemDocument& doc) {
    for (const auto& w : doc.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
}

struct GenOptions {
    std::size_t cpus{2};
    double util{0.75};
    std::uint64_t seed{kDefaultSeed};
    std::size_t frames{kDefaultFrames};
    std::string sampler{"sequential"};
    std::string out;
    bool json{false};
};

int run_gen(const GenOptions& o) {
    Rng rng(o.seed);
    const auto system = generate_task_system(o.cpus, o.util, rng, parse_sampler(o.sampler));
    const auto doc = io::system_to_json(system, o.frames);
    if (o.out.empty()) {
        std::cout << doc.dump(2) << '\n';
        return kExitOk;
    }
    io::write_json_file(o.out, doc);
    if (o.json) {
        std::cout << nlohmann::json{{"out", o.out},
                                    {"tasks", system.tasks.size()},
                                    {"total_utilization", system.total_utilization().convert_to<double>()}}
                         .dump()
                  << '\n';
    } else {
        std::cout << "wrote " << system.tasks.size() << " tasks to " << o.out << '\n';
    }
    return kExitOk;
}

struct AnalyzeOptions {
    std::string input;
    std::size_t frames{0};
    std::string mode{"pattern"};
    Ticks cap{kDefaultHorizonCap};
    std::string plan_out;
    bool json{false};
};

int run_analyze(const AnalyzeOptions& o) {
    const auto doc = io::read_system_file(o.input);
    print_warnings(doc);
    const auto frames = o.frames != 0 ? o.frames : doc.frames;
    const auto mode = parse_mode(o.mode);
    const auto result = semi_partition(doc.system, frames, mode, o.cap);
    if (o.json) {
        std::cout << io::analysis_to_json(doc.system, result, mode).dump(2) << '\n';
    } else {
        io::print_analysis(std::cout, doc.system, result, mode);
    }
    if (!o.plan_out.empty()) {
        auto exported = io::system_to_json(doc.system, frames);
        exported["plan"] = io::plan_to_json(result.plan);
        io::write_json_file(o.plan_out, exported);
    }
    return result.verdict.schedulable() ? kExitOk : kExitFail;
}

struct SimulateOptions {
    std::string input;
    std::string plan;
    bool auto_plan{false};
    std::size_t frames{0};
    std::string mode{"pattern"};
    Ticks horizon{0};
    std::string model{"sync"};
    std::uint64_t seed{kDefaultSeed};
    Ticks jitter{0};
    std::string trace;
    bool json{false};
};

int run_simulate(const SimulateOptions& o) {
    const auto doc = io::read_system_file(o.input);
    print_warnings(doc);

    SimConfig cfg;
    cfg.system = doc.system;
    if (o.auto_plan) {
        const auto frames = o.frames != 0 ? o.frames : doc.frames;
        cfg.plan = semi_partition(doc.system, frames, parse_mode(o.mode)).plan;
        for (const auto& t : doc.system.tasks) {
            if (!cfg.plan.covers(t.id)) {
                std::cerr << "error: no complete plan exists (task " << t.id << " unplaced)\n";
                return kExitError;
            }
        }
    } else if (!o.plan.empty()) {
        const auto plan_doc = io::read_system_file(o.plan);
        if (plan_doc.plan.is_null()) {
            throw io::InputError("'" + o.plan + "' holds no plan object");
        }
        cfg.plan = io::parse_plan(plan_doc.plan, doc.system);
    } else if (!doc.plan.is_null()) {
        cfg.plan = io::parse_plan(doc.plan, doc.system);
    } else {
        throw io::InputError("no plan given: use --plan, --auto or an input holding a plan");
    }

    if (o.horizon > 0) {
        cfg.horizon = o.horizon;
    } else {
        Ticks analysis = 0;
        for (const auto& w : realize_workloads(cfg.system, cfg.plan)) {
            analysis = std::max(analysis, hyperperiod(w, kSimulationCeiling));
        }
        cfg.horizon = analysis == 0 ? kSimulationCeiling : std::min(2 * analysis, kSimulationCeiling);
    }
    if (o.model == "sporadic") {
        cfg.release_model = SporadicSeeded{o.seed, o.jitter};
    }
    cfg.record_trace = !o.trace.empty();

    const auto report = run_simulation(cfg);
    if (!o.trace.empty()) {
        std::ofstream trace(o.trace);
        if (!trace) {
            throw io::InputError("cannot write '" + o.trace + "'");
        }
        write_trace(trace, report.trace);
    }
    if (o.json) {
        std::cout << io::sim_report_to_json(report, cfg.horizon).dump(2) << '\n';
    } else {
        io::print_sim_report(std::cout, report, cfg.horizon);
    }
    return report.miss_free() ? kExitOk : kExitFail;
}

struct ExperimentOptions {
    std::vector<std::size_t> cpus{2, 4};
    std::vector<double> fractions{0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
    std::vector<std::size_t> k_values{2, 8, 20};
    std::vector<std::string> modes{"ffd", "packed", "pattern"};
    std::size_t trials{100};
    std::uint64_t seed{kDefaultSeed};
    Ticks cap{kDefaultHorizonCap};
    unsigned workers{0};
    std::string sampler{"sequential"};
    std::string out;
    bool json{false};
};

int run_experiment(const ExperimentOptions& o) {
    SweepConfig cfg;
    cfg.cpu_counts = o.cpus;
    cfg.util_percents.clear();
    for (double f : o.fractions) {
        cfg.util_percents.push_back(static_cast<int>(std::lround(f * 100.0)));
    }
    cfg.k_values = o.k_values;
    cfg.modes.clear();
    for (const auto& m : o.modes) {
        cfg.modes.push_back(parse_sweep_mode(m));
    }
    cfg.trials = o.trials;
    cfg.seed = o.seed;
    cfg.horizon_cap = o.cap;
    cfg.workers = o.workers;
    cfg.sampler = parse_sampler(o.sampler);

    const auto rows = run_sweep(cfg);

    std::ofstream file;
    if (!o.out.empty()) {
        file.open(o.out);
        if (!file) {
            throw io::InputError("cannot write '" + o.out + "'");
        }
    }
    std::ostream& out = o.out.empty() ? std::cout : file;
    if (o.json) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : rows) {
            arr.push_back({{"m", r.cpus},
                           {"fraction", r.util_percent / 100.0},
                           {"K", r.frames},
                           {"mode", to_string(r.mode)},
                           {"trials", r.trials},
                           {"successes", r.successes},
                           {"overflows", r.overflows},
                           {"ratio", r.ratio()}});
        }
        out << arr.dump(2) << '\n';
    } else {
        write_sweep_csv(out, rows);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semi-partitioned EDF with restricted migrations: generation, analysis, simulation, sweeps"};
    app.require_subcommand(1, 1);

    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a random task system");
    gen_cmd->add_option("--cpus", gen.cpus, "Number of CPUs")->check(CLI::PositiveNumber)->capture_default_str();
    gen_cmd->add_option("--util", gen.util, "Per-CPU utilization fraction in (0, 1]")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
    gen_cmd->add_option("--k", gen.frames, "K written into the file")->check(CLI::PositiveNumber)->capture_default_str();
    gen_cmd->add_option("--sampler", gen.sampler, "Utilization sampler")
        ->check(CLI::IsMember({"sequential", "simplex"}))
        ->capture_default_str();
    gen_cmd->add_option("--out", gen.out, "Output path (stdout when omitted)");
    gen_cmd->add_flag("--json", gen.json, "Machine-readable summary");

    AnalyzeOptions analyze;
    auto* analyze_cmd = app.add_subcommand("analyze", "Partition a task system and test every CPU");
    analyze_cmd->add_option("input", analyze.input, "Task-system file")->required();
    analyze_cmd->add_option("--k", analyze.frames, "Frame count K (default: the file's K)");
    analyze_cmd->add_option("--mode", analyze.mode, "Schedulability test")
        ->check(CLI::IsMember({"packed", "pattern"}))
        ->capture_default_str();
    analyze_cmd->add_option("--cap", analyze.cap, "Analysis horizon cap in ticks")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    analyze_cmd->add_option("--plan-out", analyze.plan_out, "Write the system and its plan here");
    analyze_cmd->add_flag("--json", analyze.json, "Machine-readable report");

    SimulateOptions simulate;
    auto* sim_cmd = app.add_subcommand("simulate", "Run the EDF simulator on a plan");
    sim_cmd->add_option("input", simulate.input, "Task-system file")->required();
    auto* plan_opt = sim_cmd->add_option("--plan", simulate.plan, "Plan file written by analyze --plan-out");
    sim_cmd->add_flag("--auto", simulate.auto_plan, "Compute the plan with the partitioner first")->excludes(plan_opt);
    sim_cmd->add_option("--k", simulate.frames, "K for --auto (default: the file's K)");
    sim_cmd->add_option("--mode", simulate.mode, "Test used by --auto")
        ->check(CLI::IsMember({"packed", "pattern"}))
        ->capture_default_str();
    sim_cmd->add_option("--horizon", simulate.horizon,
                        "Simulated ticks (default: min(2 x hyperperiod, 1000000))");
    sim_cmd->add_option("--model", simulate.model, "Release model")
        ->check(CLI::IsMember({"sync", "sporadic"}))
        ->capture_default_str();
    sim_cmd->add_option("--seed", simulate.seed, "Seed for sporadic releases")->capture_default_str();
    sim_cmd->add_option("--jitter", simulate.jitter, "Largest extra inter-arrival delay for sporadic releases")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sim_cmd->add_option("--trace", simulate.trace, "Write a line-per-event trace here");
    sim_cmd->add_flag("--json", simulate.json, "Machine-readable report");

    ExperimentOptions experiment;
    auto* exp_cmd = app.add_subcommand("experiment", "Success-ratio sweep over random systems");
    exp_cmd->add_option("--cpus", experiment.cpus, "CPU counts")->delimiter(',')->capture_default_str();
    exp_cmd->add_option("--fractions", experiment.fractions, "Per-CPU utilization fractions in [0.50, 0.95]")
        ->delimiter(',')
        ->capture_default_str();
    exp_cmd->add_option("--k-values", experiment.k_values, "Frame counts K")->delimiter(',')->capture_default_str();
    exp_cmd->add_option("--modes", experiment.modes, "Algorithms: ffd, packed, pattern")
        ->delimiter(',')
        ->capture_default_str();
    exp_cmd->add_option("--trials", experiment.trials, "Systems per cell")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    exp_cmd->add_option("--seed", experiment.seed, "Master seed")->capture_default_str();
    exp_cmd->add_option("--cap", experiment.cap, "Analysis horizon cap in ticks")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    exp_cmd->add_option("--workers", experiment.workers, "Worker threads (0 = all cores)")->capture_default_str();
    exp_cmd->add_option("--sampler", experiment.sampler, "Utilization sampler")
        ->check(CLI::IsMember({"sequential", "simplex"}))
        ->capture_default_str();
    exp_cmd->add_option("--out", experiment.out, "CSV output path (stdout when omitted)");
    exp_cmd->add_flag("--json", experiment.json, "Emit JSON rows instead of CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitError;
    }

    try {
        if (gen_cmd->parsed()) {
            if (gen.util <= 0.0) {
                std::cerr << "error: --util must be in (0, 1]\n";
                return kExitError;
            }
            return run_gen(gen);
        }
        if (analyze_cmd->parsed()) {
            return run_analyze(analyze);
        }
        if (sim_cmd->parsed()) {
            return run_simulate(simulate);
        }
        return run_experiment(experiment);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
}
