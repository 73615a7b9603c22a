#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dssim/kernel.hpp"
#include "dssim/power.hpp"
#include "dssim/units.hpp"
#include "dssim/workload.hpp"

namespace dssim {

class Scheduler;

struct JobRecord {
    std::uint64_t job_id = 0;
    Nanos t_arrive = 0;
    std::optional<Nanos> t_complete;
};

struct PeSummary {
    std::string pe_type;
    std::size_t pe_index = 0;
    std::string domain;
    Nanos busy_time = 0;
    double utilization = 0.0;
    Femtojoules energy = 0;
};

struct DomainSummary {
    std::string name;
    double peak_temperature = 0.0;
    double final_temperature = 0.0;
    std::size_t final_opp_index = 0;
};

struct SimReport {
    std::string app;
    std::string scheduler;
    std::string governor;
    std::uint64_t jobs_injected = 0;
    std::uint64_t jobs_completed = 0;
    std::uint64_t in_flight = 0;
    // Mean of t_complete - t_arrive over completed jobs that arrived after
    // the warm-up cutoff. Absent when no such job exists.
    std::optional<double> avg_job_exec_time_us;
    std::uint64_t jobs_averaged = 0;
    Nanos warmup_cutoff = 0;
    Nanos elapsed = 0;
    double throughput_per_ms = 0.0;
    Femtojoules energy_total = 0;
    std::vector<PeSummary> pes;
    std::vector<DomainSummary> domains;
    std::vector<TraceRecord> trace;
    std::vector<OppChange> opp_log;
    std::vector<JobRecord> jobs;
    // Power and thermal parameters are placeholders, not measurements.
    bool synthetic_power_model = true;

    double energy_total_mj() const { return fj_to_mj(energy_total); }
};

SimReport summarize(const SimState& state, const std::string& scheduler_name);

// Energy of each PE re-derived from the trace and the OPP log alone, without
// touching the kernel's accumulators.
std::vector<Femtojoules> integrate_trace_energy(const Platform& platform,
                                                const std::vector<TraceRecord>& trace,
                                                const std::vector<OppChange>& opp_log,
                                                Nanos end_time);

struct SweepRow {
    double rate_per_ms = 0.0;
    std::string scheduler;
    std::optional<double> avg_exec_time_us;  // mean over seeds that produced one
    double throughput_per_ms = 0.0;
    double energy_mj = 0.0;

    friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // sorted by (scheduler, rate)

    friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

struct SweepConfig {
    std::vector<double> rates_per_ms;
    Nanos duration = 100 * kNsPerMs;
    std::vector<std::uint64_t> seeds{1};
    ArrivalDistribution distribution = ArrivalDistribution::exponential;
    GovernorConfig governor;
    RunOptions options;
    unsigned parallelism = 1;
};

// Every (scheduler, rate, seed) cell sees the arrival sequence generated
// from (rate, seed) alone. Cells may run on `parallelism` threads; the
// result does not depend on it. Deadlocks are rethrown naming the cell.
SweepResult sweep(const Platform& platform, const BoundApp& app,
                  const std::vector<const Scheduler*>& schedulers, const SweepConfig& config);

// Output files. All throw IoError naming the path on failure.
void write_trace_csv(const std::filesystem::path& path, const SimReport& report);
void write_opp_csv(const std::filesystem::path& path, const SimReport& report,
                   const Platform& platform);
void write_gantt_csv(const std::filesystem::path& path, const SimReport& report);
void write_summary_json(const std::filesystem::path& path, const SimReport& report);
void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result);

std::vector<TraceRecord> read_trace_csv(const std::filesystem::path& path);
std::vector<OppChange> read_opp_csv(const std::filesystem::path& path, const Platform& platform);
SweepResult read_sweep_csv(const std::filesystem::path& path);

// trace.csv, opp.csv, gantt.csv and summary.json under `dir`.
void write_outputs(const std::filesystem::path& dir, const SimReport& report,
                   const Platform& platform);

}  // namespace dssim
