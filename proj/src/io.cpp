#include "dssim/io.hpp"

#include <fstream>

#include "dssim/errors.hpp"

namespace dssim {

namespace fs = std::filesystem;

namespace {

const Json& require(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    return j.at(key);
}

template <typename T>
T get_as(const Json& j, const char* key, const std::string& where) {
    const Json& value = require(j, key, where);
    try {
        return value.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return get_as<T>(j, key, where);
}

}  // namespace

ResourceDb soc_from_json(const Json& j) {
    ResourceDb db;
    const Json& types = require(j, "pe_types", "soc");
    if (!types.is_array()) throw ConfigError("soc.pe_types: expected an array");
    for (std::size_t i = 0; i < types.size(); ++i) {
        const std::string where = "soc.pe_types[" + std::to_string(i) + "]";
        const Json& t = types[i];
        PeType pe;
        pe.name = get_as<std::string>(t, "name", where);
        pe.kind = parse_pe_kind(get_as<std::string>(t, "kind", where));
        pe.count = get_as<int>(t, "count", where);
        pe.freq_domain = get_as<std::string>(t, "freq_domain", where);
        db.pe_types.push_back(std::move(pe));
    }
    const Json& tables = require(j, "opp_tables", "soc");
    if (!tables.is_object()) throw ConfigError("soc.opp_tables: expected an object");
    for (const auto& [domain, list] : tables.items()) {
        if (!list.is_array()) throw ConfigError("soc.opp_tables." + domain + ": expected an array");
        auto& opps = db.opp_tables[domain];
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string where = "soc.opp_tables." + domain + "[" + std::to_string(i) + "]";
            Opp opp;
            opp.freq = get_as<Mhz>(list[i], "freq_mhz", where);
            opp.voltage = get_as<double>(list[i], "voltage_v", where);
            opp.dyn_power = mw_to_uw(get_as<double>(list[i], "dyn_power_mw", where));
            opp.static_power = mw_to_uw(get_as<double>(list[i], "static_power_mw", where));
            opps.push_back(opp);
        }
    }
    if (j.contains("ref_freq_mhz")) {
        for (const auto& [domain, freq] : j.at("ref_freq_mhz").items()) {
            if (!freq.is_number_integer()) throw ConfigError("soc.ref_freq_mhz." + domain + ": expected an integer");
            db.ref_freq[domain] = freq.get<Mhz>();
        }
    }
    const Json& comm = require(j, "comm", "soc");
    db.comm.latency = us_to_ns(get_as<double>(comm, "latency_us", "soc.comm"));
    db.comm.bandwidth_bytes_per_us = get_as<double>(comm, "bandwidth_bytes_per_us", "soc.comm");
    return db;
}

Json soc_to_json(const ResourceDb& db) {
    Json j;
    j["pe_types"] = Json::array();
    for (const auto& pe : db.pe_types) {
        j["pe_types"].push_back({{"name", pe.name},
                                 {"kind", std::string(to_string(pe.kind))},
                                 {"count", pe.count},
                                 {"freq_domain", pe.freq_domain}});
    }
    j["opp_tables"] = Json::object();
    for (const auto& [domain, opps] : db.opp_tables) {
        auto& list = j["opp_tables"][domain] = Json::array();
        for (const auto& opp : opps) {
            list.push_back({{"freq_mhz", opp.freq},
                            {"voltage_v", opp.voltage},
                            {"dyn_power_mw", uw_to_mw(opp.dyn_power)},
                            {"static_power_mw", uw_to_mw(opp.static_power)}});
        }
    }
    if (!db.ref_freq.empty()) {
        for (const auto& [domain, freq] : db.ref_freq) j["ref_freq_mhz"][domain] = freq;
    }
    j["comm"] = {{"latency_us", ns_to_us(db.comm.latency)},
                 {"bandwidth_bytes_per_us", db.comm.bandwidth_bytes_per_us}};
    return j;
}

AppGraph app_from_json(const Json& j) {
    AppGraph app;
    app.name = get_as<std::string>(j, "name", "app");
    const Json& tasks = require(j, "tasks", "app");
    if (!tasks.is_array()) throw ConfigError("app.tasks: expected an array");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const std::string where = "app.tasks[" + std::to_string(i) + "]";
        TaskDef task;
        task.name = get_as<std::string>(tasks[i], "name", where);
        const Json& profile = require(tasks[i], "profile", where);
        if (!profile.is_object()) throw ConfigError(where + ".profile: expected an object");
        for (const auto& [type, latency] : profile.items()) {
            if (!latency.is_number()) throw ConfigError(where + ".profile." + type + ": expected a number");
            task.latency_profile[type] = us_to_ns(latency.get<double>());
        }
        app.tasks.push_back(std::move(task));
    }
    if (j.contains("edges")) {
        const Json& edges = j.at("edges");
        if (!edges.is_array()) throw ConfigError("app.edges: expected an array");
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const std::string where = "app.edges[" + std::to_string(i) + "]";
            app.edges.push_back({get_as<std::string>(edges[i], "src", where),
                                 get_as<std::string>(edges[i], "dst", where),
                                 get_or<Bytes>(edges[i], "volume_bytes", 0, where)});
        }
    }
    return app;
}

Json app_to_json(const AppGraph& app) {
    Json j;
    j["name"] = app.name;
    j["tasks"] = Json::array();
    for (const auto& task : app.tasks) {
        Json profile = Json::object();
        for (const auto& [type, latency] : task.latency_profile) profile[type] = ns_to_us(latency);
        j["tasks"].push_back({{"name", task.name}, {"profile", profile}});
    }
    j["edges"] = Json::array();
    for (const auto& e : app.edges) {
        j["edges"].push_back({{"src", e.src}, {"dst", e.dst}, {"volume_bytes", e.volume}});
    }
    return j;
}

WorkloadFile workload_from_json(const Json& j) {
    WorkloadFile w;
    w.app = get_as<std::string>(j, "app", "workload");
    w.plan.distribution = parse_distribution(get_or<std::string>(j, "distribution", "exponential", "workload"));
    w.plan.rate_per_ms = get_as<double>(j, "rate_jobs_per_ms", "workload");
    w.plan.duration = us_to_ns(get_as<double>(j, "duration_us", "workload"));
    w.plan.seed = get_or<std::uint64_t>(j, "seed", 1, "workload");
    return w;
}

Json workload_to_json(const WorkloadFile& w) {
    return Json{{"app", w.app},
                {"distribution", std::string(to_string(w.plan.distribution))},
                {"rate_jobs_per_ms", w.plan.rate_per_ms},
                {"duration_us", ns_to_us(w.plan.duration)},
                {"seed", w.plan.seed}};
}

StaticTable table_from_json(const Json& j) {
    StaticTable table;
    table.app = get_as<std::string>(j, "app", "table");
    table.mode = parse_table_mode(get_or<std::string>(j, "mode", "type_rr", "table"));
    const Json& entries = require(j, "entries", "table");
    if (!entries.is_object()) throw ConfigError("table.entries: expected an object");
    for (const auto& [task, pe] : entries.items()) {
        if (!pe.is_string()) throw ConfigError("table.entries." + task + ": expected a string");
        table.entries[task] = pe.get<std::string>();
    }
    table.priority = get_or<std::vector<std::string>>(j, "priority", {}, "table");
    return table;
}

Json table_to_json(const StaticTable& table) {
    Json entries = Json::object();
    for (const auto& [task, pe] : table.entries) entries[task] = pe;
    return Json{{"app", table.app},
                {"mode", std::string(to_string(table.mode))},
                {"entries", entries},
                {"priority", table.priority}};
}

GovernorConfig governor_from_json(const Json& j) {
    GovernorConfig config;
    config.policy = parse_governor_policy(get_or<std::string>(j, "policy", "performance", "governor"));
    if (j.contains("period_us")) config.period = us_to_ns(get_as<double>(j, "period_us", "governor"));
    config.up_threshold = get_or<double>(j, "up_threshold", config.up_threshold, "governor");
    config.down_threshold = get_or<double>(j, "down_threshold", config.down_threshold, "governor");
    if (auto problem = check_governor(config); !problem.empty()) throw ConfigError(problem);
    return config;
}

Json governor_to_json(const GovernorConfig& config) {
    return Json{{"policy", std::string(to_string(config.policy))},
                {"period_us", ns_to_us(config.period)},
                {"up_threshold", config.up_threshold},
                {"down_threshold", config.down_threshold}};
}

Json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const Json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    out.close();
    if (!out) throw IoError("error while writing " + path.string());
}

namespace {

template <typename Fn>
auto with_path(const fs::path& path, Fn&& fn) {
    const Json j = read_json(path);
    try {
        return fn(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace

ResourceDb load_soc(const fs::path& path) { return with_path(path, soc_from_json); }
AppGraph load_app(const fs::path& path) { return with_path(path, app_from_json); }
WorkloadFile load_workload(const fs::path& path) { return with_path(path, workload_from_json); }
StaticTable load_table(const fs::path& path) { return with_path(path, table_from_json); }

}  // namespace dssim
