#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "dssim/model.hpp"
#include "dssim/power.hpp"
#include "dssim/sched.hpp"
#include "dssim/workload.hpp"

namespace dssim {

using Json = nlohmann::ordered_json;

// JSON file formats. Parsers throw ConfigError with the offending key.
//
// SoC:      {pe_types: [{name, kind, count, freq_domain}],
//            opp_tables: {domain: [{freq_mhz, voltage_v, dyn_power_mw, static_power_mw}]},
//            ref_freq_mhz: {domain: mhz}            (optional),
//            comm: {latency_us, bandwidth_bytes_per_us}}
// App:      {name, tasks: [{name, profile: {pe_type: latency_us}}],
//            edges: [{src, dst, volume_bytes}]}
// Workload: {app, distribution, rate_jobs_per_ms, duration_us, seed}
// Table:    {app, mode: "instance" | "type_rr", entries: {task: pe_ref}, priority: [task]}
// Governor: {policy, period_us, up_threshold, down_threshold}

ResourceDb soc_from_json(const Json& j);
Json soc_to_json(const ResourceDb& db);

AppGraph app_from_json(const Json& j);
Json app_to_json(const AppGraph& app);

struct WorkloadFile {
    std::string app;
    ArrivalPlan plan;
};

WorkloadFile workload_from_json(const Json& j);
Json workload_to_json(const WorkloadFile& workload);

StaticTable table_from_json(const Json& j);
Json table_to_json(const StaticTable& table);

GovernorConfig governor_from_json(const Json& j);
Json governor_to_json(const GovernorConfig& config);

// Missing or unparsable files raise ConfigError naming the path.
Json read_json(const std::filesystem::path& path);
// Throws IoError naming the path.
void write_json(const std::filesystem::path& path, const Json& j);

ResourceDb load_soc(const std::filesystem::path& path);
AppGraph load_app(const std::filesystem::path& path);
WorkloadFile load_workload(const std::filesystem::path& path);
StaticTable load_table(const std::filesystem::path& path);

}  // namespace dssim
