// biad: command-line surface for the bias-detection laboratory.
//
// Subcommands: gen-data, simulate, detect, sweep, baseline. Every command
// that writes an output also writes a manifest with the resolved
// configuration, so any CSV can be regenerated exactly from its manifest.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "biad/detector.hpp"
#include "biad/errors.hpp"
#include "biad/experiments.hpp"
#include "biad/matrix_io.hpp"
#include "biad/synthetic.hpp"
#include "svg_plot.hpp"

using nlohmann::json;
using namespace biad;

namespace {

constexpr const char* kToolVersion = "0.1.0";

// ------------------------------------------------------------------ logging

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("BIAD_LOG_LEVEL");
        if (env == nullptr) return LogLevel::kWarn;
        const std::string value(env);
        if (value == "error") return LogLevel::kError;
        if (value == "warn") return LogLevel::kWarn;
        if (value == "info") return LogLevel::kInfo;
        if (value == "debug") return LogLevel::kDebug;
        std::fprintf(stderr, "[biad][warn] unknown BIAD_LOG_LEVEL '%s', using warn\n", env);
        return LogLevel::kWarn;
    }();
    return level;
}

void log_line(LogLevel level, const char* tag, const std::string& message) {
    if (level <= log_level()) {
        std::fprintf(stderr, "[biad][%s] %s\n", tag, message.c_str());
    }
}

void log_info(const std::string& message) { log_line(LogLevel::kInfo, "info", message); }
void log_debug(const std::string& message) { log_line(LogLevel::kDebug, "debug", message); }

// ------------------------------------------------------------- json helpers

json load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config '" + path.string() + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void require_keys(const json& j, const std::vector<std::string>& allowed, const char* where) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(std::string("unknown key '") + key + "' in " + where);
        }
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("bad value for key '") + key + "'");
    }
}

SyntheticSpec parse_synthetic(const json& j, const char* where) {
    require_keys(j, {"m", "users", "target_effective_mean", "rating_noise_spread", "seed"}, where);
    SyntheticSpec spec;
    spec.num_items = get_or<std::size_t>(j, "m", spec.num_items);
    spec.num_users = get_or<std::size_t>(j, "users", spec.num_users);
    spec.target_effective_mean = get_or<double>(j, "target_effective_mean", spec.target_effective_mean);
    spec.rating_noise_spread = get_or<double>(j, "rating_noise_spread", spec.rating_noise_spread);
    spec.seed = get_or<std::uint64_t>(j, "seed", spec.seed);
    return spec;
}

LearnerKind parse_learner(const std::string& name) {
    if (name == "mf" || name == "matrix_factorization") return LearnerKind::kMatrixFactorization;
    if (name == "cf" || name == "user_cf") return LearnerKind::kUserCfPearson;
    throw ConfigError("bad value for key 'learner': '" + name + "' (use mf or cf)");
}

ThresholdVariant parse_variant(const std::string& name) {
    if (name == "full") return ThresholdVariant::kFull;
    if (name == "prime") return ThresholdVariant::kPrime;
    throw ConfigError("bad value for key 'variant': '" + name + "' (use full or prime)");
}

TrialConfig parse_trial_config(const json& j) {
    require_keys(j,
                 {"matrix_file", "synthetic", "eta", "learner", "engine", "ad_strategy", "A",
                  "gamma", "explore_prob", "update_period", "bias_before_explore",
                  "ad_ineffective_min_frac", "cf_neighborhood", "mf", "q_max", "variant",
                  "f_tilde", "c", "n_players", "master_seed", "num_trials"},
                 "config");
    TrialConfig config;
    config.matrix_file = get_or<std::string>(j, "matrix_file", "");
    if (j.contains("synthetic")) config.synthetic = parse_synthetic(j.at("synthetic"), "synthetic");
    config.eta = get_or<double>(j, "eta", config.eta);
    if (j.contains("learner")) config.learner = parse_learner(j.at("learner").get<std::string>());
    if (j.contains("engine")) {
        const auto name = j.at("engine").get<std::string>();
        if (name != "objective" && name != "biased") {
            throw ConfigError("bad value for key 'engine': '" + name + "'");
        }
    }
    if (j.contains("ad_strategy")) {
        const auto name = j.at("ad_strategy").get<std::string>();
        if (name == "uniform" || name == "A1") {
            config.ad_strategy = AdStrategy::kUniformRandom;
        } else if (name == "top_ranked" || name == "A2") {
            config.ad_strategy = AdStrategy::kTopRanked;
        } else {
            throw ConfigError("bad value for key 'ad_strategy': '" + name + "'");
        }
    }
    config.ad_pool_size = get_or<int>(j, "A", config.ad_pool_size);
    config.gamma = get_or<double>(j, "gamma", config.gamma);
    config.explore_prob = get_or<double>(j, "explore_prob", config.explore_prob);
    config.update_period = get_or<int>(j, "update_period", config.update_period);
    config.bias_before_explore = get_or<bool>(j, "bias_before_explore", config.bias_before_explore);
    config.ad_ineffective_min_frac =
        get_or<double>(j, "ad_ineffective_min_frac", config.ad_ineffective_min_frac);
    config.cf_neighborhood = get_or<int>(j, "cf_neighborhood", config.cf_neighborhood);
    if (j.contains("mf")) {
        const auto& mf = j.at("mf");
        require_keys(mf, {"rank", "epochs", "reg"}, "mf");
        config.mf.rank = get_or<int>(mf, "rank", config.mf.rank);
        config.mf.epochs = get_or<int>(mf, "epochs", config.mf.epochs);
        config.mf.reg = get_or<double>(mf, "reg", config.mf.reg);
    }
    config.q_max = get_or<int>(j, "q_max", config.q_max);
    if (j.contains("variant")) config.variant = parse_variant(j.at("variant").get<std::string>());
    config.f_tilde = get_or<double>(j, "f_tilde", config.f_tilde);
    config.c = get_or<double>(j, "c", config.c);
    config.n_players = get_or<int>(j, "n_players", config.n_players);
    config.master_seed = get_or<std::uint64_t>(j, "master_seed", config.master_seed);
    config.num_trials = get_or<int>(j, "num_trials", config.num_trials);
    return config;
}

EngineKind parse_engine_kind(const json& j) {
    const auto name = get_or<std::string>(j, "engine", "objective");
    return name == "biased" ? EngineKind::kBiased : EngineKind::kObjective;
}

json synthetic_to_json(const SyntheticSpec& spec) {
    return json{{"m", spec.num_items},
                {"users", spec.num_users},
                {"target_effective_mean", spec.target_effective_mean},
                {"rating_noise_spread", spec.rating_noise_spread},
                {"seed", spec.seed}};
}

json trial_config_to_json(const TrialConfig& config, EngineKind kind) {
    return json{
        {"matrix_file", config.matrix_file},
        {"synthetic", synthetic_to_json(config.synthetic)},
        {"eta", config.eta},
        {"learner", config.learner == LearnerKind::kMatrixFactorization ? "mf" : "cf"},
        {"engine", kind == EngineKind::kBiased ? "biased" : "objective"},
        {"ad_strategy", config.ad_strategy == AdStrategy::kUniformRandom ? "uniform" : "top_ranked"},
        {"A", config.ad_pool_size},
        {"gamma", config.gamma},
        {"explore_prob", config.explore_prob},
        {"update_period", config.update_period},
        {"bias_before_explore", config.bias_before_explore},
        {"ad_ineffective_min_frac", config.ad_ineffective_min_frac},
        {"cf_neighborhood", config.cf_neighborhood},
        {"mf", json{{"rank", config.mf.rank}, {"epochs", config.mf.epochs}, {"reg", config.mf.reg}}},
        {"q_max", config.q_max},
        {"variant", config.variant == ThresholdVariant::kFull ? "full" : "prime"},
        {"f_tilde", config.f_tilde},
        {"c", config.c},
        {"n_players", config.n_players},
        {"master_seed", config.master_seed},
        {"num_trials", config.num_trials}};
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&tt, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

void write_manifest(const std::filesystem::path& path, const std::string& command,
                    const json& config_echo, const std::vector<std::string>& outputs) {
    json manifest{{"tool", "biad"},
                  {"version", kToolVersion},
                  {"command", command},
                  {"created_utc", utc_timestamp()},
                  {"config", config_echo},
                  {"outputs", outputs}};
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot open '" + path.string() + "' for writing");
    }
    out << manifest.dump(2) << '\n';
    log_debug("manifest written to " + path.string());
}

// ------------------------------------------------------------- subcommands

struct CommonFlags {
    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    int trials = 0;
    std::string variant;
};

void apply_overrides(TrialConfig& config, const CommonFlags& flags) {
    if (flags.seed_set) config.master_seed = flags.seed;
    if (flags.trials > 0) config.num_trials = flags.trials;
    if (!flags.variant.empty()) config.variant = parse_variant(flags.variant);
}

int resolve_workers(const CommonFlags& flags) {
    if (flags.workers > 0) return flags.workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 2 : static_cast<int>(hw);
}

int cmd_gen_data(const CommonFlags& flags) {
    const json j = load_config_file(flags.config_path);
    SyntheticSpec spec = parse_synthetic(j, "config");
    if (flags.seed_set) spec.seed = flags.seed;
    const RatingMatrix matrix = generate_synthetic(spec);
    save_matrix(matrix, flags.out_path);
    log_info("wrote " + std::to_string(matrix.num_users()) + "x" +
             std::to_string(matrix.num_items()) + " matrix to " + flags.out_path);
    write_manifest(flags.out_path + ".manifest.json", "gen-data", synthetic_to_json(spec),
                   {flags.out_path});
    return 0;
}

int cmd_simulate(const CommonFlags& flags) {
    const json j = load_config_file(flags.config_path);
    TrialConfig config = parse_trial_config(j);
    apply_overrides(config, flags);
    const EngineKind kind = parse_engine_kind(j);
    const auto context = ExperimentContext::resolve(config);
    const FeedbackLog log = simulate_trial(config, context, kind, 0);
    save_feedback_log(log, flags.out_path);
    log_info("wrote " + std::to_string(log.records.size()) + " feedback records to " +
             flags.out_path);
    write_manifest(flags.out_path + ".manifest.json", "simulate",
                   trial_config_to_json(config, kind), {flags.out_path});
    return 0;
}

int cmd_detect(const std::string& log_path, const CommonFlags& flags) {
    DetectorParams params;
    json echo = json::object();
    if (!flags.config_path.empty()) {
        const json j = load_config_file(flags.config_path);
        require_keys(j, {"q_max", "variant", "f_tilde", "c", "n_players", "m"}, "detector config");
        params.q_max = get_or<int>(j, "q_max", params.q_max);
        if (j.contains("variant")) params.variant = parse_variant(j.at("variant").get<std::string>());
        params.f_tilde = get_or<double>(j, "f_tilde", params.f_tilde);
        params.c = get_or<double>(j, "c", params.c);
        params.n_players = get_or<int>(j, "n_players", params.n_players);
        params.m = get_or<std::size_t>(j, "m", params.m);
        echo = j;
    }
    if (!flags.variant.empty()) params.variant = parse_variant(flags.variant);
    params.validate();

    const FeedbackLog log = load_feedback_log(log_path);
    const DetectionResult result = run_biad(log, params);
    if (result.verdict.biased) {
        std::printf("BIASED round=%d\n", result.verdict.round);
    } else {
        std::printf("NOT_BIASED after=%d\n", params.q_max);
    }
    if (!flags.out_path.empty()) {
        save_trace(result, flags.out_path);
        echo["log"] = log_path;
        write_manifest(flags.out_path + ".manifest.json", "detect", echo, {flags.out_path});
    }
    return 0;
}

int run_named_sweep(const TrialConfig& config, EngineKind kind, const std::string& param,
                    const std::vector<double>& values, const CommonFlags& flags,
                    const char* command) {
    const auto out_dir = std::filesystem::path(flags.out_path);
    std::filesystem::create_directories(out_dir);
    const auto sweep = run_sweep(config, param, values, resolve_workers(flags));
    const auto csv_path = out_dir / "sweep.csv";
    const auto svg_path = out_dir / "sweep.svg";
    save_sweep_csv(sweep, csv_path);
    cli::write_sweep_svg(sweep, svg_path);
    json echo = trial_config_to_json(config, kind);
    echo["sweep_param"] = param;
    echo["sweep_values"] = values;
    write_manifest(out_dir / "manifest.json", command, echo,
                   {csv_path.string(), svg_path.string()});
    log_info("wrote sweep over " + param + " (" + std::to_string(values.size()) + " points) to " +
             csv_path.string());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"biad: sequential bias detection for simulated recommendation engines"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string log_path;
    std::string param;
    std::string values_text;

    const auto add_common = [&](CLI::App* cmd, bool needs_config, bool needs_out) {
        auto* config_opt = cmd->add_option("--config", flags.config_path, "JSON config path");
        if (needs_config) config_opt->required();
        auto* out_opt = cmd->add_option("--out", flags.out_path, "output path");
        if (needs_out) out_opt->required();
        cmd->add_option("--seed", flags.seed, "override the master seed")
            ->each([&flags](const std::string&) { flags.seed_set = true; });
        cmd->add_option("--workers", flags.workers, "worker threads (default: cores)");
        cmd->add_option("--trials", flags.trials, "override num_trials");
        cmd->add_option("--variant", flags.variant, "threshold variant: full or prime");
    };

    auto* gen = app.add_subcommand("gen-data", "generate a synthetic rating matrix CSV");
    add_common(gen, true, true);

    auto* sim = app.add_subcommand("simulate", "simulate one engine run, write the feedback log");
    add_common(sim, true, true);

    auto* det = app.add_subcommand("detect", "run the sequential test over a feedback log");
    det->add_option("--log", log_path, "feedback log CSV")->required();
    add_common(det, false, false);

    auto* swp = app.add_subcommand("sweep", "error rates across a parameter sweep");
    add_common(swp, true, true);
    swp->add_option("--param", param, "swept parameter name")->required();
    swp->add_option("--values", values_text, "comma-separated values")->required();

    auto* base = app.add_subcommand("baseline", "basic average test across tau values");
    add_common(base, true, true);
    base->add_option("--taus", values_text, "comma-separated tau values")->required();

    CLI11_PARSE(app, argc, argv);

    const auto parse_values = [&]() {
        std::vector<double> values;
        std::stringstream stream(values_text);
        std::string token;
        while (std::getline(stream, token, ',')) {
            if (token.empty()) continue;
            try {
                values.push_back(std::stod(token));
            } catch (const std::exception&) {
                throw ConfigError("bad numeric value '" + token + "' in list");
            }
        }
        if (values.empty()) throw ConfigError("value list is empty");
        return values;
    };

    try {
        if (gen->parsed()) return cmd_gen_data(flags);
        if (sim->parsed()) return cmd_simulate(flags);
        if (det->parsed()) return cmd_detect(log_path, flags);
        if (swp->parsed()) {
            const json j = load_config_file(flags.config_path);
            TrialConfig config = parse_trial_config(j);
            apply_overrides(config, flags);
            return run_named_sweep(config, parse_engine_kind(j), param, parse_values(), flags,
                                   "sweep");
        }
        if (base->parsed()) {
            const json j = load_config_file(flags.config_path);
            TrialConfig config = parse_trial_config(j);
            apply_overrides(config, flags);
            return run_named_sweep(config, parse_engine_kind(j), "tau", parse_values(), flags,
                                   "baseline");
        }
    } catch (const ParseError& e) {
        std::fprintf(stderr, "[biad][error] %s\n", e.what());
        return 2;
    } catch (const ProtocolError& e) {
        std::fprintf(stderr, "[biad][error] %s\n", e.what());
        return 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "[biad][error] %s\n", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "[biad][error] %s\n", e.what());
        return 1;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "[biad][error] %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "[biad][error] %s\n", e.what());
        return 1;
    }
    return 0;
}
