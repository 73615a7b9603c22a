#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "dssim/errors.hpp"
#include "dssim/io.hpp"
#include "dssim/kernel.hpp"
#include "dssim/model.hpp"
#include "dssim/oracle.hpp"
#include "dssim/report.hpp"
#include "dssim/sched.hpp"

namespace dssim::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kBuiltinSoc = "table2";
constexpr const char* kBuiltinApp = "wifi_tx";

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    std::string part;
    while (std::getline(in, part, sep)) parts.push_back(part);
    return parts;
}

double number(const std::string& text, const std::string& what) {
    try {
        return parse_double(text);
    } catch (const std::invalid_argument&) {
        throw ConfigError(what + ": not a number: '" + text + "'");
    }
}

std::uint64_t integer(const std::string& text, const std::string& what) {
    const double value = number(text, what);
    if (value < 0 || value != std::floor(value)) {
        throw ConfigError(what + ": expected a non-negative integer, got '" + text + "'");
    }
    return static_cast<std::uint64_t>(value);
}

Nanos micros(const std::string& text, const std::string& what) {
    try {
        return parse_us(text);
    } catch (const std::invalid_argument&) {
        throw ConfigError(what + ": not a µs value with at most 3 decimals: '" + text + "'");
    }
}

}  // namespace

std::vector<double> parse_rates(const std::string& text) {
    std::vector<double> rates;
    if (text.find(':') != std::string::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) throw ConfigError("--rates: expected start:stop:step, got '" + text + "'");
        const double start = number(parts[0], "--rates");
        const double stop = number(parts[1], "--rates");
        const double step = number(parts[2], "--rates");
        if (!(step > 0) || stop < start) throw ConfigError("--rates: need step > 0 and stop >= start");
        // Index-based so the grid does not drift; the slack keeps an exact
        // stop value inside the range.
        for (std::size_t i = 0;; ++i) {
            const double rate = start + static_cast<double>(i) * step;
            if (rate > stop + step * 1e-9) break;
            rates.push_back(rate);
        }
    } else {
        for (const auto& part : split(text, ',')) rates.push_back(number(part, "--rates"));
    }
    if (rates.empty()) throw ConfigError("--rates: empty list");
    for (double rate : rates) {
        if (!(rate > 0)) throw ConfigError("--rates: rates must be > 0");
    }
    return rates;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    if (text.find(':') != std::string::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) throw ConfigError("--seeds: expected start:stop:step, got '" + text + "'");
        const auto start = integer(parts[0], "--seeds");
        const auto stop = integer(parts[1], "--seeds");
        const auto step = integer(parts[2], "--seeds");
        if (step == 0 || stop < start) throw ConfigError("--seeds: need step > 0 and stop >= start");
        for (auto seed = start; seed <= stop; seed += step) seeds.push_back(seed);
    } else {
        for (const auto& part : split(text, ',')) seeds.push_back(integer(part, "--seeds"));
    }
    if (seeds.empty()) throw ConfigError("--seeds: empty list");
    return seeds;
}

namespace {

// Raw option text by key, filled from --config first and then from flags.
using Settings = std::map<std::string, std::string>;

std::string json_scalar(const Json& value, const std::string& key) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_integer()) return std::to_string(value.get<std::int64_t>());
    if (value.is_number()) return format_double(value.get<double>());
    throw ConfigError("config." + key + ": expected a string or number");
}

std::string json_list(const Json& value, const std::string& key) {
    if (!value.is_array()) return json_scalar(value, key);
    std::string joined;
    for (const auto& item : value) {
        if (!joined.empty()) joined += ',';
        joined += json_scalar(item, key);
    }
    return joined;
}

void load_config_file(const fs::path& path, Settings& settings, std::optional<GovernorConfig>& governor) {
    const Json j = read_json(path);
    if (!j.is_object()) throw ConfigError(path.string() + ": expected a JSON object");
    static const std::map<std::string, std::string> aliases = {
        {"soc", "soc"},         {"app", "app"},           {"volume_bytes", "volume"},
        {"sched", "sched"},     {"table", "table"},       {"distribution", "distribution"},
        {"rate", "rate"},       {"rates", "rates"},       {"duration_us", "duration"},
        {"seed", "seed"},       {"seeds", "seeds"},       {"warmup", "warmup"},
        {"out", "out"},         {"jobs", "jobs"},         {"workload", "workload"},
    };
    for (const auto& [key, value] : j.items()) {
        if (key == "governor") {
            try {
                governor = governor_from_json(value);
            } catch (const ConfigError& e) {
                throw ConfigError(path.string() + ": " + e.what());
            }
            continue;
        }
        const auto alias = aliases.find(key);
        if (alias == aliases.end()) throw ConfigError(path.string() + ": unknown key '" + key + "'");
        settings[alias->second] = json_list(value, key);
    }
}

RunConfig build_config(const Settings& s, const std::optional<GovernorConfig>& file_governor) {
    RunConfig config;
    if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') config.out = env;
    else config.out = "results";

    auto has = [&](const char* key) { return s.contains(key); };
    auto at = [&](const char* key) -> const std::string& { return s.at(key); };

    if (has("soc")) config.soc = at("soc");
    if (has("app")) config.app = at("app");
    if (has("volume")) config.edge_volume = static_cast<Bytes>(integer(at("volume"), "--volume"));
    if (has("sched")) config.schedulers = split(at("sched"), ',');
    if (has("table")) config.table = at("table");
    if (has("workload")) {
        const auto workload = load_workload(at("workload"));
        config.distribution = workload.plan.distribution;
        config.rates = {workload.plan.rate_per_ms};
        config.duration = workload.plan.duration;
        config.seeds = {workload.plan.seed};
    }
    if (has("distribution")) {
        try {
            config.distribution = parse_distribution(at("distribution"));
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("--distribution: ") + e.what());
        }
    }
    if (has("rate")) {
        const double rate = number(at("rate"), "--rate");
        if (!(rate > 0)) throw ConfigError("--rate: must be > 0");
        config.rates = {rate};
    }
    if (has("rates")) config.rates = parse_rates(at("rates"));
    if (has("duration")) config.duration = micros(at("duration"), "--duration");
    if (has("seed")) config.seeds = {integer(at("seed"), "--seed")};
    if (has("seeds")) config.seeds = parse_seeds(at("seeds"));
    if (has("warmup")) {
        config.warmup = number(at("warmup"), "--warmup");
        if (config.warmup < 0 || config.warmup >= 1) throw ConfigError("--warmup: must be in [0, 1)");
    }
    if (has("out")) config.out = at("out");
    if (has("jobs")) {
        const auto jobs = integer(at("jobs"), "--jobs");
        if (jobs == 0) throw ConfigError("--jobs: must be >= 1");
        config.jobs = static_cast<unsigned>(jobs);
    }

    if (file_governor) config.governor = *file_governor;
    try {
        if (has("governor")) config.governor.policy = parse_governor_policy(at("governor"));
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("--governor: ") + e.what());
    }
    if (has("period")) config.governor.period = micros(at("period"), "--period");
    if (has("up")) config.governor.up_threshold = number(at("up"), "--up");
    if (has("down")) config.governor.down_threshold = number(at("down"), "--down");
    if (auto problem = check_governor(config.governor); !problem.empty()) throw ConfigError(problem);

    for (const auto& name : config.schedulers) {
        if (name != "met" && name != "etf" && name != "table") {
            throw ConfigError("unknown scheduler '" + name + "' (expected met, etf or table)");
        }
    }
    const bool wants_table =
        std::find(config.schedulers.begin(), config.schedulers.end(), "table") != config.schedulers.end();
    if (wants_table && !config.table) {
        throw ConfigError("--sched table needs a static table file (--table)");
    }
    return config;
}

ResourceDb resolve_soc(const std::string& soc) {
    if (soc == kBuiltinSoc) return table2_soc();
    return load_soc(soc);
}

AppGraph resolve_app(const std::string& app, Bytes edge_volume) {
    if (app == kBuiltinApp) return builtin_wifi_tx(edge_volume);
    return load_app(app);
}

std::string join_violations(const std::vector<Violation>& violations) {
    std::string text;
    for (const auto& v : violations) text += "\n  " + to_string(v);
    return text;
}

bool is_unschedulable(const Violation& v) {
    return v.message.rfind("unschedulable task", 0) == 0;
}

// Everything a run needs, bound and validated.
struct Setup {
    Platform platform;
    BoundApp app;
    std::optional<StaticTable> table;
};

Setup bind(const RunConfig& config, bool run_mode) {
    Platform platform(resolve_soc(config.soc));
    AppGraph graph = resolve_app(config.app, config.edge_volume);
    const auto violations = validate_app(graph, platform.db());
    if (!violations.empty()) {
        // A task no PE can run would sit in the ready list forever; a run
        // would only end in a deadlock, so report it as one.
        const auto stuck = std::find_if(violations.begin(), violations.end(), is_unschedulable);
        if (run_mode && stuck != violations.end()) {
            throw DeadlockError("deadlock: " + stuck->message + "; the run cannot complete any job");
        }
        throw ConfigError("invalid application '" + graph.name + "':" + join_violations(violations));
    }
    BoundApp app(std::move(graph), platform);
    std::optional<StaticTable> table;
    if (config.table) {
        table = load_table(*config.table);
        const auto problems = validate_table(*table, app, platform);
        if (!problems.empty()) {
            throw ConfigError("invalid static table " + *config.table + ":" + join_violations(problems));
        }
    }
    return Setup{std::move(platform), std::move(app), std::move(table)};
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

int cmd_simulate(const RunConfig& config, std::ostream& out) {
    if (config.schedulers.size() != 1) throw ConfigError("simulate takes exactly one scheduler");
    if (config.rates.size() != 1) throw ConfigError("simulate takes a single --rate");
    if (config.seeds.size() != 1) throw ConfigError("simulate takes a single --seed");

    const Setup setup = bind(config, true);
    const auto scheduler = make_scheduler(config.schedulers.front(), setup.app, setup.platform, setup.table);
    ArrivalPlan plan{config.distribution, config.rates.front(), config.duration, config.seeds.front()};
    check_plan(plan);
    RunOptions options;
    options.warmup_fraction = config.warmup;

    const SimReport report = run(setup.platform, setup.app, plan, *scheduler, config.governor, options);
    ensure_dir(config.out);
    write_outputs(config.out, report, setup.platform);

    out << "scheduler " << report.scheduler << "\n"
        << "jobs_injected " << report.jobs_injected << "\n"
        << "jobs_completed " << report.jobs_completed << "\n"
        << "in_flight " << report.in_flight << "\n"
        << "avg_job_exec_time_us "
        << (report.avg_job_exec_time_us ? format_double(*report.avg_job_exec_time_us) : "n/a") << "\n"
        << "throughput_per_ms " << format_double(report.throughput_per_ms) << "\n"
        << "energy_mj " << format_double(report.energy_total_mj()) << "\n"
        << "output " << config.out.string() << "\n";
    return kExitOk;
}

int cmd_sweep(const RunConfig& config, std::ostream& out) {
    const Setup setup = bind(config, true);
    std::vector<std::unique_ptr<Scheduler>> owned;
    std::vector<const Scheduler*> schedulers;
    for (const auto& name : config.schedulers) {
        owned.push_back(make_scheduler(name, setup.app, setup.platform, setup.table));
        schedulers.push_back(owned.back().get());
    }
    SweepConfig sweep_config;
    sweep_config.rates_per_ms = config.rates;
    sweep_config.duration = config.duration;
    sweep_config.seeds = config.seeds;
    sweep_config.distribution = config.distribution;
    sweep_config.governor = config.governor;
    sweep_config.options.warmup_fraction = config.warmup;
    sweep_config.options.record_trace = false;
    sweep_config.parallelism = config.jobs;

    const SweepResult result = sweep(setup.platform, setup.app, schedulers, sweep_config);
    ensure_dir(config.out);
    const fs::path path = config.out / "sweep.csv";
    write_sweep_csv(path, result);
    out << "rows " << result.rows.size() << "\n"
        << "output " << path.string() << "\n";
    return kExitOk;
}

int cmd_oracle(const RunConfig& config, std::ostream& out) {
    const Setup setup = bind(config, false);
    const OracleResult result = optimal_single_job(setup.app, setup.platform);
    const bool verified = verify_table(result, setup.app, setup.platform);
    ensure_dir(config.out);
    const fs::path path = config.out / "table.json";
    write_json(path, table_to_json(result.table));
    out << "makespan_us " << format_us(result.makespan) << "\n"
        << "explored " << result.explored << "\n"
        << "verified " << (verified ? "yes" : "no") << "\n"
        << "output " << path.string() << "\n";
    return verified ? kExitOk : kExitInternal;
}

int cmd_validate(const RunConfig& config, const std::optional<fs::path>& dump, std::ostream& out,
                 std::ostream& err) {
    const ResourceDb db = resolve_soc(config.soc);
    const AppGraph graph = resolve_app(config.app, config.edge_volume);

    if (dump) {
        ensure_dir(*dump);
        write_json(*dump / "soc.json", soc_to_json(db));
        write_json(*dump / "app.json", app_to_json(graph));
        write_json(*dump / "governor.json", governor_to_json(config.governor));
        write_json(*dump / "workload.json",
                   workload_to_json({graph.name, {config.distribution, config.rates.front(), config.duration,
                                                  config.seeds.front()}}));
        out << "dumped " << dump->string() << "\n";
    }

    std::size_t count = 0;
    auto report = [&](const std::string& what, const std::vector<Violation>& violations) {
        for (const auto& v : violations) err << what << ": " << to_string(v) << "\n";
        count += violations.size();
    };
    const auto soc_violations = validate_soc(db);
    report("soc", soc_violations);
    if (soc_violations.empty()) {
        const auto app_violations = validate_app(graph, db);
        report("app", app_violations);
        if (app_violations.empty() && config.table) {
            const Platform platform(db);
            const BoundApp app(graph, platform);
            report("table", validate_table(load_table(*config.table), app, platform));
        }
    }
    if (count > 0) return kExitConfig;
    out << "ok\n";
    return kExitOk;
}

void add_common(CLI::App& sub, Settings& settings, bool runs) {
    auto bind = [&](const std::string& flag, const std::string& key, const std::string& help) {
        sub.add_option_function<std::string>(
            flag, [&settings, key](const std::string& value) { settings[key] = value; }, help);
    };
    bind("--soc", "soc", "SoC description file or 'table2' (default)");
    bind("--app", "app", "application file or 'wifi_tx' (default)");
    bind("--volume", "volume", "bytes per edge for the builtin app (default 0)");
    bind("--table", "table", "static table file for --sched table");
    bind("--distribution", "distribution", "exponential | deterministic");
    bind("--duration", "duration", "injection window in µs");
    bind("--governor", "governor", "performance | powersave | ondemand");
    bind("--period", "period", "governor period in µs");
    bind("--up", "up", "ondemand up threshold");
    bind("--down", "down", "ondemand down threshold");
    bind("--out", "out", std::string("output directory (default $") + kOutDirEnv + " or ./results)");
    if (runs) {
        bind("--sched", "sched", "met | etf | table, comma separated for sweep");
        bind("--warmup", "warmup", "leading fraction of the window left out of averages");
        bind("--workload", "workload", "workload file (distribution, rate, duration, seed)");
    }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Discrete-event simulator for scheduling on heterogeneous SoCs"};
    app.require_subcommand(1);

    Settings settings;
    std::string config_path;
    std::optional<fs::path> dump;
    app.add_option("--config", config_path, "JSON file with defaults for any flag");

    auto* simulate = app.add_subcommand("simulate", "run one workload and write trace, Gantt and summary files");
    auto* sweep_cmd = app.add_subcommand("sweep", "run a grid of rates x schedulers x seeds");
    auto* oracle = app.add_subcommand("oracle", "exhaustive single-job optimum as a static table");
    auto* validate = app.add_subcommand("validate", "check SoC, app and table files");

    for (auto* sub : {simulate, sweep_cmd}) add_common(*sub, settings, true);
    for (auto* sub : {oracle, validate}) add_common(*sub, settings, false);
    for (auto* sub : {simulate, sweep_cmd, oracle, validate}) {
        sub->add_option("--config", config_path, "JSON file with defaults for any flag");
    }
    auto flag = [&](CLI::App* sub, const std::string& name, const std::string& key, const std::string& help) {
        sub->add_option_function<std::string>(
            name, [&settings, key](const std::string& value) { settings[key] = value; }, help);
    };
    for (auto* sub : {simulate, validate}) {
        flag(sub, "--rate", "rate", "jobs per ms");
        flag(sub, "--seed", "seed", "RNG seed");
    }
    flag(sweep_cmd, "--rates", "rates", "start:stop:step (inclusive) or a comma list, jobs per ms");
    flag(sweep_cmd, "--seeds", "seeds", "comma list or start:stop:step");
    flag(sweep_cmd, "--seed", "seed", "single RNG seed");
    flag(sweep_cmd, "--jobs", "jobs", "worker threads");
    validate->add_option_function<std::string>(
        "--dump", [&dump](const std::string& value) { dump = fs::path(value); },
        "write the resolved SoC, app, governor and workload files to this directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        Settings merged;
        std::optional<GovernorConfig> file_governor;
        if (!config_path.empty()) load_config_file(config_path, merged, file_governor);
        for (const auto& [key, value] : settings) merged[key] = value;
        const RunConfig config = build_config(merged, file_governor);

        if (*simulate) return cmd_simulate(config, out);
        if (*sweep_cmd) return cmd_sweep(config, out);
        if (*oracle) return cmd_oracle(config, out);
        return cmd_validate(config, dump, out, err);
    } catch (const DeadlockError& e) {
        err << "error: " << e.what() << "\n";
        return kExitDeadlock;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const OracleTooLarge& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const MissingTableEntry& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

}  // namespace dssim::cli
