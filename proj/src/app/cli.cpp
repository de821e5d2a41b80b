#include "sntlab/app/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "sntlab/app/outputs.hpp"
#include "sntlab/csv.hpp"
#include "sntlab/harness.hpp"
#include "sntlab/hazard.hpp"
#include "sntlab/metrics.hpp"
#include "sntlab/population.hpp"

namespace sntlab::app {

namespace fs = std::filesystem;

namespace {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Files written by one command; removed again unless the command commits.
class OutputSession {
public:
    explicit OutputSession(fs::path dir) : dir_(std::move(dir)) {}
    OutputSession(const OutputSession&) = delete;
    OutputSession& operator=(const OutputSession&) = delete;
    ~OutputSession() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& p : written_) fs::remove(p, ec);
    }

    void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
        const fs::path path = dir_ / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + path.string() + " for writing");
        written_.push_back(path);
        body(out);
        out.flush();
        if (!out) throw IoError("write failed for " + path.string());
    }

    void commit() { committed_ = true; }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
    bool committed_ = false;
};

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    return in;
}

struct Resolved {
    std::vector<ScenarioSpec> scenarios;
    RunConfig run;
};

Resolved resolve(const Command& cmd) {
    LoadedConfig cfg;
    if (cmd.config) {
        if (!fs::exists(*cmd.config)) throw IoError("config file not found: " + cmd.config->string());
        cfg = load_config(*cmd.config);
    } else {
        cfg = parse_config("");
    }

    bool threads_set = false;
    if (cmd.threads) {
        cfg.run.parallelism = *cmd.threads;
        threads_set = true;
    } else if (const char* env = std::getenv("SNT_LAB_THREADS")) {
        try {
            cfg.run.parallelism = static_cast<unsigned>(csv::parse_u64(env));
            threads_set = true;
        } catch (const csv::ParseError&) {
            throw UsageError("SNT_LAB_THREADS must be a positive integer");
        }
    }
    if (!threads_set && !cmd.config) cfg.run.parallelism = std::max(1u, std::thread::hardware_concurrency());

    if (cmd.reps) cfg.run.n_replicates = *cmd.reps;
    if (cmd.n) cfg.run.n_individuals = *cmd.n;
    if (cmd.seed) cfg.run.master_seed = *cmd.seed;
    if (cmd.superpop) cfg.run.superpop_size = *cmd.superpop;
    if (cmd.cal_weights) cfg.run.cal_weight_mode = *cmd.cal_weights;
    if (cmd.truth_override) cfg.run.truth_override = *cmd.truth_override;
    if (cmd.out) cfg.run.output_dir = *cmd.out;

    std::vector<std::string> problems;
    if (cfg.run.n_individuals < 1) problems.push_back("--n must be >= 1");
    if (cfg.run.parallelism < 1) problems.push_back("--threads must be >= 1");
    if (cfg.run.truth_override && !(*cfg.run.truth_override > 0.0)) problems.push_back("--truth-override must be > 0");

    Resolved r;
    r.run = cfg.run;
    for (auto& spec : cfg.scenarios) {
        const bool selected = cmd.scenarios.empty() ||
                              std::find(cmd.scenarios.begin(), cmd.scenarios.end(), spec.scenario_id) !=
                                  cmd.scenarios.end();
        if (!selected) continue;
        if (cmd.pi) spec.progression_prob = *cmd.pi;
        for (auto& v : validate(spec)) problems.push_back(std::string(to_string(spec.scenario_id)) + ": " + v);
        r.scenarios.push_back(spec);
    }
    if (!problems.empty()) {
        std::string msg = "invalid settings:";
        for (auto& p : problems) msg += " " + p + ";";
        throw UsageError(msg);
    }
    return r;
}

std::vector<HazardLine> solve_all(const std::vector<ScenarioSpec>& specs) {
    std::vector<HazardLine> lines;
    for (const auto& spec : specs) lines.push_back({spec, try_solve(spec)});
    return lines;
}

bool report_infeasible(const std::vector<HazardLine>& lines, std::ostream& log) {
    bool any = false;
    for (const auto& l : lines) {
        if (l.report.feasible) continue;
        any = true;
        log << "infeasible: " << to_string(l.spec.scenario_id) << " (pi = " << l.spec.progression_prob
            << "): " << l.report.diagnostic << '\n';
    }
    return any;
}

std::vector<TruthLine> truth_lines(const std::vector<HazardLine>& hazards) {
    std::vector<TruthLine> out;
    for (const auto& l : hazards) out.push_back({l.spec, enumerate_truth(l.spec, l.report.hazards)});
    return out;
}

TruthReference reference_from(const std::map<ScenarioId, TruthTable>& truths, std::optional<double> override_rr) {
    TruthReference ref;
    ref.truths = truths;
    ref.override_rr = override_rr;
    return ref;
}

void write_summaries(OutputSession& session, const std::vector<MetricsRow>& summary) {
    session.write("summary.csv", [&](std::ostream& o) { write_summary(o, summary); });
    session.write("figure3.csv", [&](std::ostream& o) { write_figure(o, summary, FigureEstimand::ate); });
    session.write("figureS3.csv", [&](std::ostream& o) { write_figure(o, summary, FigureEstimand::att); });
}

int do_solve(const Command& cmd, std::ostream& log) {
    const Resolved r = resolve(cmd);
    const auto hazards = solve_all(r.scenarios);
    OutputSession session(r.run.output_dir);
    session.write("hazards.csv", [&](std::ostream& o) { write_hazards(o, hazards); });
    session.commit();
    return report_infeasible(hazards, log) ? kExitInfeasible : kExitOk;
}

int do_truth(const Command& cmd, std::ostream& log) {
    const Resolved r = resolve(cmd);
    const auto hazards = solve_all(r.scenarios);
    if (report_infeasible(hazards, log)) return kExitInfeasible;
    OutputSession session(r.run.output_dir);
    const auto truths = truth_lines(hazards);
    session.write("truth.csv", [&](std::ostream& o) { write_truth(o, truths); });
    session.commit();
    return kExitOk;
}

int do_simulate(const Command& cmd, std::ostream& log) {
    const Resolved r = resolve(cmd);
    const auto hazards = solve_all(r.scenarios);
    if (report_infeasible(hazards, log)) return kExitInfeasible;

    OutputSession session(r.run.output_dir);
    auto truths = truth_lines(hazards);
    for (auto& t : truths) t.truth = quantized(t.truth);
    session.write("hazards.csv", [&](std::ostream& o) { write_hazards(o, hazards); });
    session.write("truth.csv", [&](std::ostream& o) { write_truth(o, truths); });

    std::vector<EstimateRow> estimates;
    std::vector<DescribeRecord> descriptives;
    std::map<ScenarioId, TruthTable> truth_map;
    for (std::size_t s = 0; s < hazards.size(); ++s) {
        const auto& spec = hazards[s].spec;
        const auto& h = hazards[s].report.hazards;
        truth_map[spec.scenario_id] = truths[s].truth;

        const auto start = std::chrono::steady_clock::now();
        Pool pool;
        if (r.run.superpop_size > 0) pool = build_pool(spec, h, r.run.master_seed, r.run.superpop_size);
        const auto results = run_scenario(spec, h, r.run, r.run.superpop_size > 0 ? &pool : nullptr);
        for (const auto& rep : results) {
            for (const auto& a : rep.analyses) estimates.push_back({rep.scenario, rep.replicate, quantized(a)});
            for (const auto& d : rep.descriptives) descriptives.push_back({rep.scenario, rep.replicate, quantized(d)});
        }
        const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
        log << to_string(spec.scenario_id) << ": " << r.run.n_replicates << " replicates x " << r.run.n_individuals
            << " individuals in " << took.count() << " s\n";
    }

    session.write("estimates.csv", [&](std::ostream& o) { write_estimates(o, estimates); });
    session.write("describe.csv", [&](std::ostream& o) { write_describe(o, descriptives); });
    const auto summary = summarize(estimates, reference_from(truth_map, r.run.truth_override));
    write_summaries(session, summary);
    const auto desc_summary = summarize_descriptives(descriptives);
    session.write("describe_summary.csv", [&](std::ostream& o) { write_describe_summary(o, desc_summary); });
    session.commit();
    return kExitOk;
}

fs::path input_dir(const Command& cmd, const Resolved& r) { return cmd.in ? *cmd.in : r.run.output_dir; }

int do_summarize(const Command& cmd, std::ostream&) {
    const Resolved r = resolve(cmd);
    const fs::path in = input_dir(cmd, r);
    auto est_in = open_input(in / "estimates.csv");
    const auto estimates = read_estimates(est_in, (in / "estimates.csv").string());
    std::map<ScenarioId, TruthTable> truths;
    if (!r.run.truth_override) {
        auto truth_in = open_input(in / "truth.csv");
        truths = read_truth(truth_in, (in / "truth.csv").string());
    }
    const auto summary = summarize(estimates, reference_from(truths, r.run.truth_override));
    OutputSession session(r.run.output_dir);
    write_summaries(session, summary);
    session.commit();
    return kExitOk;
}

int do_describe(const Command& cmd, std::ostream&) {
    const Resolved r = resolve(cmd);
    const fs::path in = input_dir(cmd, r);
    auto src = open_input(in / "describe.csv");
    const auto records = read_describe(src, (in / "describe.csv").string());
    const auto summary = summarize_descriptives(records);
    OutputSession session(r.run.output_dir);
    session.write("describe_summary.csv", [&](std::ostream& o) { write_describe_summary(o, summary); });
    session.commit();
    return kExitOk;
}

int do_plot_data(const Command& cmd, std::ostream&) {
    const Resolved r = resolve(cmd);
    const fs::path in = input_dir(cmd, r);
    auto src = open_input(in / "summary.csv");
    const auto summary = read_summary(src, (in / "summary.csv").string());
    OutputSession session(r.run.output_dir);
    session.write("figure3.csv", [&](std::ostream& o) { write_figure(o, summary, FigureEstimand::ate); });
    session.write("figureS3.csv", [&](std::ostream& o) { write_figure(o, summary, FigureEstimand::att); });
    session.commit();
    return kExitOk;
}

struct RawOptions {
    std::vector<std::string> scenarios;
    std::optional<double> pi;
    std::optional<std::int64_t> reps;
    std::optional<std::int64_t> n;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> threads;
    std::optional<std::int64_t> superpop;
    std::optional<std::string> cal_weights;
    std::optional<double> truth_override;
    std::optional<std::string> config;
    std::optional<std::string> out;
    std::optional<std::string> in;
};

void add_scenario_options(CLI::App* sub, RawOptions& o) {
    sub->add_option("--scenario", o.scenarios, "Scenario to run: S1|S2|S3|S4|all (repeatable)")
        ->check(CLI::IsMember({"S1", "S2", "S3", "S4", "all"}))
        ->take_all();
    sub->add_option("--pi", o.pi, "Progression probability (low -> high severity per visit)");
    sub->add_option("--config", o.config, "JSON config document");
}

void add_output_option(CLI::App* sub, RawOptions& o) { sub->add_option("--out", o.out, "Output directory"); }

void add_input_option(CLI::App* sub, RawOptions& o) {
    sub->add_option("--in", o.in, "Directory holding the inputs (defaults to --out)");
}

}  // namespace

ParseResult parse_args(std::span<const std::string> args) {
    CLI::App app{"Sequential nested trial emulation Monte Carlo laboratory", "snt-lab"};
    app.require_subcommand(1);
    app.allow_extras(false);

    RawOptions o;
    auto* solve = app.add_subcommand("solve", "Solve per-visit outcome probabilities -> hazards.csv");
    auto* truth = app.add_subcommand("truth", "Enumerate exact truths -> truth.csv");
    auto* simulate = app.add_subcommand("simulate", "Run replicates and summarise them");
    auto* summarize = app.add_subcommand("summarize", "Re-aggregate estimates.csv -> summary.csv and figure data");
    auto* describe = app.add_subcommand("describe", "Re-aggregate describe.csv -> describe_summary.csv");
    auto* plot = app.add_subcommand("plot-data", "Reshape summary.csv -> figure3.csv / figureS3.csv");

    for (auto* sub : {solve, truth, simulate}) {
        add_scenario_options(sub, o);
        add_output_option(sub, o);
    }
    simulate->add_option("--reps", o.reps, "Replicates per scenario");
    simulate->add_option("--n", o.n, "Individuals per cohort");
    simulate->add_option("--seed", o.seed, "Master seed (u64)");
    simulate->add_option("--threads", o.threads, "Worker threads (default: SNT_LAB_THREADS or all cores)");
    simulate->add_option("--superpop", o.superpop, "Materialise a finite superpopulation of this size");
    simulate->add_option("--cal-weights", o.cal_weights, "Calendar-design censoring weights: initiation|paper")
        ->check(CLI::IsMember({"initiation", "paper"}));
    simulate->add_option("--truth-override", o.truth_override, "Fixed true RR used as the bias reference");

    summarize->add_option("--truth-override", o.truth_override, "Fixed true RR used as the bias reference");
    for (auto* sub : {summarize, describe, plot}) {
        add_input_option(sub, o);
        add_output_option(sub, o);
    }

    ParseResult result;
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        result.message = app.help();
        auto* chosen = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
        if (chosen) result.message = chosen->help();
        result.exit_code = kExitOk;
        return result;
    } catch (const CLI::ParseError& e) {
        result.message = e.what();
        result.exit_code = kExitUsage;
        return result;
    }

    auto usage = [&](std::string msg) {
        result.message = std::move(msg);
        result.exit_code = kExitUsage;
        return result;
    };

    Command cmd;
    auto* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    if (name == "solve") cmd.verb = Verb::solve;
    else if (name == "truth") cmd.verb = Verb::truth;
    else if (name == "simulate") cmd.verb = Verb::simulate;
    else if (name == "summarize") cmd.verb = Verb::summarize;
    else if (name == "describe") cmd.verb = Verb::describe;
    else cmd.verb = Verb::plot_data;

    for (const auto& s : o.scenarios) {
        if (s == "all") {
            cmd.scenarios.clear();
            break;
        }
        auto id = parse_scenario_id(s);
        if (std::find(cmd.scenarios.begin(), cmd.scenarios.end(), *id) == cmd.scenarios.end()) cmd.scenarios.push_back(*id);
    }
    if (o.pi) {
        if (!(*o.pi >= 0.0 && *o.pi <= 1.0)) return usage("--pi: must lie in [0,1]");
        cmd.pi = o.pi;
    }
    if (o.reps) {
        if (*o.reps < 0) return usage("--reps: must be a non-negative integer");
        cmd.reps = static_cast<std::uint64_t>(*o.reps);
    }
    if (o.n) {
        if (*o.n < 1) return usage("--n: must be a positive integer");
        cmd.n = static_cast<std::uint64_t>(*o.n);
    }
    cmd.seed = o.seed;
    if (o.threads) {
        if (*o.threads < 1) return usage("--threads: must be a positive integer");
        cmd.threads = static_cast<unsigned>(*o.threads);
    }
    if (o.superpop) {
        if (*o.superpop < 1) return usage("--superpop: must be a positive integer");
        cmd.superpop = static_cast<std::uint64_t>(*o.superpop);
    }
    if (o.cal_weights) cmd.cal_weights = parse_cal_weight_mode(*o.cal_weights);
    if (o.truth_override) {
        if (!(*o.truth_override > 0.0)) return usage("--truth-override: must be > 0");
        cmd.truth_override = o.truth_override;
    }
    if (o.config) cmd.config = fs::path(*o.config);
    if (o.out) cmd.out = fs::path(*o.out);
    if (o.in) cmd.in = fs::path(*o.in);

    result.command = std::move(cmd);
    return result;
}

int execute(const Command& cmd, std::ostream& log) {
    try {
        switch (cmd.verb) {
            case Verb::solve: return do_solve(cmd, log);
            case Verb::truth: return do_truth(cmd, log);
            case Verb::simulate: return do_simulate(cmd, log);
            case Verb::summarize: return do_summarize(cmd, log);
            case Verb::describe: return do_describe(cmd, log);
            case Verb::plot_data: return do_plot_data(cmd, log);
        }
    } catch (const UsageError& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const SolverInfeasible& e) {
        log << "error: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const IoError& e) {
        log << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const csv::ParseError& e) {
        log << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitUsage;
}

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    ParseResult parsed = parse_args(args);
    if (!parsed.command) {
        (parsed.exit_code == kExitOk ? out : err) << parsed.message << (parsed.exit_code == kExitOk ? "" : "\n");
        return parsed.exit_code;
    }
    return execute(*parsed.command, err);
}

}  // namespace sntlab::app
