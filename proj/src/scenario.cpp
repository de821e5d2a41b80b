#include "sntlab/scenario.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace sntlab {

namespace {

using json = nlohmann::json;

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

void check_probability(std::vector<std::string>& out, std::string_view name, double p) {
    if (!is_probability(p)) out.push_back(std::string(name) + " out of [0,1]");
}

void check_probability(std::vector<std::string>& out, std::string_view name, const SeverityPair& p) {
    if (!is_probability(p.low) || !is_probability(p.high)) out.push_back(std::string(name) + " out of [0,1]");
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
    for (const auto& [key, _] : obj.items()) {
        bool known = false;
        for (auto a : allowed) known = known || key == a;
        if (!known) throw ConfigError("unknown key '" + key + "' in " + std::string(where));
    }
}

template <class T>
T read_field(const json& obj, const std::string& key, std::string_view where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("field '" + std::string(where) + "." + key + "': " + e.what());
    }
}

SeverityPair read_pair(const json& obj, const std::string& key, std::string_view where) {
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ConfigError("field '" + std::string(where) + "." + key + "': expected [low, high] numbers");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

template <class T>
T read_unsigned(const json& obj, const std::string& key, std::string_view where) {
    const json& v = obj.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        throw ConfigError("field '" + std::string(where) + "." + key + "': expected a non-negative integer");
    }
    return static_cast<T>(v.get<std::uint64_t>());
}

void apply_run(const json& obj, RunConfig& run) {
    if (!obj.is_object()) throw ConfigError("field 'run': expected an object");
    reject_unknown_keys(obj,
                        {"n_individuals", "n_replicates", "master_seed", "parallelism", "output_dir",
                         "cal_weight_mode", "superpop_size", "truth_override"},
                        "run");
    if (obj.contains("n_individuals")) run.n_individuals = read_unsigned<std::uint64_t>(obj, "n_individuals", "run");
    if (obj.contains("n_replicates")) run.n_replicates = read_unsigned<std::uint64_t>(obj, "n_replicates", "run");
    if (obj.contains("master_seed")) run.master_seed = read_unsigned<std::uint64_t>(obj, "master_seed", "run");
    if (obj.contains("parallelism")) run.parallelism = read_unsigned<unsigned>(obj, "parallelism", "run");
    if (obj.contains("superpop_size")) run.superpop_size = read_unsigned<std::uint64_t>(obj, "superpop_size", "run");
    if (obj.contains("output_dir")) run.output_dir = read_field<std::string>(obj, "output_dir", "run");
    if (obj.contains("truth_override")) run.truth_override = read_field<double>(obj, "truth_override", "run");
    if (obj.contains("cal_weight_mode")) {
        auto text = read_field<std::string>(obj, "cal_weight_mode", "run");
        auto mode = parse_cal_weight_mode(text);
        if (!mode) throw ConfigError("field 'run.cal_weight_mode': unknown mode '" + text + "'");
        run.cal_weight_mode = *mode;
    }
}

void apply_scenario_override(const json& obj, ScenarioSpec& spec, std::string_view where) {
    if (obj.contains("baseline_high_prob")) spec.baseline_high_prob = read_field<double>(obj, "baseline_high_prob", where);
    if (obj.contains("progression_prob")) spec.progression_prob = read_field<double>(obj, "progression_prob", where);
    if (obj.contains("decision_prob")) spec.decision_prob = read_pair(obj, "decision_prob", where);
    if (obj.contains("treat_prob")) spec.treat_prob = read_pair(obj, "treat_prob", where);
    if (obj.contains("spt_treat_prob")) spec.spt_treat_prob = read_field<double>(obj, "spt_treat_prob", where);
    if (obj.contains("risk_untreated")) spec.risk_untreated = read_pair(obj, "risk_untreated", where);
    if (obj.contains("delta")) spec.delta = read_pair(obj, "delta", where);
    if (obj.contains("horizon_tau")) spec.horizon_tau = read_field<int>(obj, "horizon_tau", where);
    if (obj.contains("n_visits")) spec.n_visits = read_field<int>(obj, "n_visits", where);
}

}  // namespace

std::string_view to_string(ScenarioId id) {
    switch (id) {
        case ScenarioId::S1: return "S1";
        case ScenarioId::S2: return "S2";
        case ScenarioId::S3: return "S3";
        case ScenarioId::S4: return "S4";
    }
    return "?";
}

std::optional<ScenarioId> parse_scenario_id(std::string_view text) {
    if (text == "S1") return ScenarioId::S1;
    if (text == "S2") return ScenarioId::S2;
    if (text == "S3") return ScenarioId::S3;
    if (text == "S4") return ScenarioId::S4;
    return std::nullopt;
}

std::string_view to_string(CalWeightMode mode) {
    return mode == CalWeightMode::initiation ? "initiation" : "paper";
}

std::optional<CalWeightMode> parse_cal_weight_mode(std::string_view text) {
    if (text == "initiation") return CalWeightMode::initiation;
    if (text == "paper" || text == "paper_simplified") return CalWeightMode::paper_simplified;
    return std::nullopt;
}

ScenarioSpec builtin_scenario(ScenarioId id, double progression_prob) {
    ScenarioSpec spec;
    spec.scenario_id = id;
    spec.progression_prob = progression_prob;
    const bool severity_gates_decision = id == ScenarioId::S3 || id == ScenarioId::S4;
    const bool effect_modified = id == ScenarioId::S2 || id == ScenarioId::S4;
    spec.decision_prob = severity_gates_decision ? SeverityPair{0.2, 0.8} : SeverityPair{0.3, 0.3};
    spec.delta = effect_modified ? SeverityPair{0.5, 0.9} : SeverityPair{0.7, 0.7};
    return spec;
}

std::vector<ScenarioSpec> builtin_scenarios(double progression_prob) {
    return {builtin_scenario(ScenarioId::S1, progression_prob), builtin_scenario(ScenarioId::S2, progression_prob),
            builtin_scenario(ScenarioId::S3, progression_prob), builtin_scenario(ScenarioId::S4, progression_prob)};
}

std::vector<std::string> validate(const ScenarioSpec& spec) {
    std::vector<std::string> out;
    check_probability(out, "baseline_high_prob", spec.baseline_high_prob);
    check_probability(out, "progression_prob", spec.progression_prob);
    check_probability(out, "decision_prob", spec.decision_prob);
    check_probability(out, "treat_prob", spec.treat_prob);
    check_probability(out, "spt_treat_prob", spec.spt_treat_prob);
    check_probability(out, "risk_untreated", spec.risk_untreated);
    if (!(spec.delta.low > 0.0) || !(spec.delta.high > 0.0)) out.push_back("delta must be > 0");
    if (spec.risk_untreated.low > spec.risk_untreated.high) {
        out.push_back("risk_untreated(low) must not exceed risk_untreated(high)");
    }
    if (spec.horizon_tau != 2) out.push_back("horizon_tau must be 2");
    if (spec.n_visits != 3) out.push_back("n_visits must be 3");
    return out;
}

std::vector<std::string> validate(const RunConfig& config) {
    std::vector<std::string> out;
    if (config.n_individuals < 1) out.push_back("n_individuals must be >= 1");
    if (config.n_replicates < 1) out.push_back("n_replicates must be >= 1");
    if (config.parallelism < 1) out.push_back("parallelism must be >= 1");
    return out;
}

LoadedConfig parse_config(std::string_view text) {
    LoadedConfig cfg{builtin_scenarios(), RunConfig{}};
    bool blank = true;
    for (char c : text) blank = blank && std::isspace(static_cast<unsigned char>(c));
    if (blank) return cfg;

    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config parse error: top level must be an object");
    reject_unknown_keys(doc, {"run", "scenarios"}, "config");

    if (doc.contains("run")) apply_run(doc["run"], cfg.run);
    if (doc.contains("scenarios")) {
        const json& arr = doc["scenarios"];
        if (!arr.is_array()) throw ConfigError("field 'scenarios': expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const json& entry = arr[i];
            const std::string where = "scenarios[" + std::to_string(i) + "]";
            if (!entry.is_object()) throw ConfigError("field '" + where + "': expected an object");
            reject_unknown_keys(entry,
                                {"scenario_id", "baseline_high_prob", "progression_prob", "decision_prob",
                                 "treat_prob", "spt_treat_prob", "risk_untreated", "delta", "horizon_tau",
                                 "n_visits"},
                                where);
            if (!entry.contains("scenario_id")) throw ConfigError("field '" + where + ".scenario_id' is required");
            const auto id_text = read_field<std::string>(entry, "scenario_id", where);
            if (id_text == "all") {
                for (auto& spec : cfg.scenarios) apply_scenario_override(entry, spec, where);
                continue;
            }
            auto id = parse_scenario_id(id_text);
            if (!id) throw ConfigError("field '" + where + ".scenario_id': unknown scenario '" + id_text + "'");
            apply_scenario_override(entry, cfg.scenarios[static_cast<std::size_t>(ordinal(*id))], where);
        }
    }

    std::vector<std::string> problems;
    for (const auto& spec : cfg.scenarios) {
        for (auto& v : validate(spec)) problems.push_back(std::string(to_string(spec.scenario_id)) + ": " + v);
    }
    for (auto& v : validate(cfg.run)) problems.push_back("run: " + v);
    if (!problems.empty()) throw ConfigError("config validation failed: " + join(problems, "; "));
    return cfg;
}

LoadedConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace sntlab
