#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "dssim/model.hpp"
#include "dssim/power.hpp"
#include "dssim/units.hpp"
#include "dssim/workload.hpp"

namespace dssim {

class Scheduler;
struct SimReport;

// Declaration order is the tie-break order at equal timestamps.
enum class EventClass : std::uint8_t { job_arrival = 0, task_finish = 1, governor_tick = 2 };

struct TaskRef {
    std::uint64_t job_id = 0;
    std::size_t task = 0;

    friend bool operator==(const TaskRef&, const TaskRef&) = default;
};

struct Event {
    Nanos time = 0;
    EventClass kind = EventClass::job_arrival;
    std::uint64_t seq = 0;
    TaskRef target;  // job for arrivals, task for finishes

    friend bool operator>(const Event& a, const Event& b) {
        if (a.time != b.time) return a.time > b.time;
        if (a.kind != b.kind) return a.kind > b.kind;
        return a.seq > b.seq;
    }
};

// Zero between tasks on the same PE instance; otherwise setup latency plus
// transfer time, rounded up to the nanosecond.
Nanos comm_latency(Bytes volume, PeId src, PeId dst, const CommParams& params);

struct PeInstance {
    PeId id;
    bool busy = false;
    Nanos available_at = 0;
    std::optional<TaskRef> current_task;
};

struct TraceRecord {
    std::uint64_t job_id = 0;
    std::string task;
    std::string pe_type;
    std::size_t pe_index = 0;
    Nanos t_ready = 0;
    Nanos t_start = 0;
    Nanos t_finish = 0;
    Mhz freq = 0;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct OppChange {
    Nanos time = 0;
    std::size_t domain = 0;
    std::size_t opp_index = 0;
    Mhz freq = 0;

    friend bool operator==(const OppChange&, const OppChange&) = default;
};

struct DomainState {
    std::size_t opp_index = 0;
    Nanos busy_since_tick = 0;
    ThermalNode thermal;
    double peak_temperature = 0.0;
};

struct RunOptions {
    Nanos max_time = std::numeric_limits<Nanos>::max();
    // Jobs arriving in this leading fraction of the horizon are left out of
    // the average execution time.
    double warmup_fraction = 0.1;
    ThermalNode thermal;  // template for every domain
    // Sweeps only need aggregates; skipping the per-task trace saves memory.
    bool record_trace = true;
};

// Global state of one simulation. Schedulers receive it read-only.
struct SimState {
    SimState(const Platform& platform, const BoundApp& app, const GovernorConfig& governor,
             const RunOptions& options);

    const Platform* platform;
    const BoundApp* app;
    GovernorConfig governor;
    RunOptions options;

    Nanos clock = 0;
    Nanos horizon = 0;
    Nanos end_time = 0;
    std::vector<PeInstance> pes;  // flat, in platform order
    std::vector<PeEnergyState> energy;
    std::vector<DomainState> domains;
    std::vector<TaskRef> ready_list;
    std::vector<JobInstance> jobs;  // indexed by job_id

    std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
    std::uint64_t next_seq = 0;
    std::size_t pending_arrivals = 0;
    std::size_t running_tasks = 0;
    std::size_t unfinished_jobs = 0;
    std::uint64_t jobs_completed = 0;

    std::vector<TraceRecord> trace;
    std::vector<OppChange> opp_log;

    const PeInstance& pe(PeId id) const { return pes[platform->flat_index(id)]; }
    const TaskInstance& task(TaskRef ref) const { return jobs[ref.job_id].tasks[ref.task]; }
    TaskInstance& task(TaskRef ref) { return jobs[ref.job_id].tasks[ref.task]; }
    const Opp& current_opp(std::size_t domain) const {
        return platform->opps(domain)[domains[domain].opp_index];
    }
    bool is_idle(PeId id) const { return !pe(id).busy; }

    // Latency of the task on the PE at the OPP currently in force.
    // Throws UnsupportedTask.
    Nanos exec_time(TaskRef ref, PeId pe) const;

    // max(clock, max over predecessors of finish + transfer to `pe`). Only
    // meaningful once every predecessor has finished.
    Nanos earliest_start(TaskRef ref, PeId pe) const;

    std::uint64_t push_event(Nanos time, EventClass kind, TaskRef target);
};

// Starts `ref` on `pe` at the current clock. Throws SchedulerContractError if
// the task is not ready or the PE is busy.
Event dispatch(SimState& state, TaskRef ref, PeId pe);

// Releases successors of a just-finished task whose inputs are now all
// available, and stamps the job complete when the sink finished.
std::vector<TaskRef> ready_successors(SimState& state, TaskRef finished);

// Full event loop; returns the final state for inspection.
SimState simulate(const Platform& platform, const BoundApp& app, std::span<const Nanos> arrivals,
                  Nanos horizon, const Scheduler& scheduler, const GovernorConfig& governor,
                  const RunOptions& options = {});

SimReport run(const Platform& platform, const BoundApp& app, std::span<const Nanos> arrivals,
              Nanos horizon, const Scheduler& scheduler, const GovernorConfig& governor,
              const RunOptions& options = {});

SimReport run(const Platform& platform, const BoundApp& app, const ArrivalPlan& plan,
              const Scheduler& scheduler, const GovernorConfig& governor,
              const RunOptions& options = {});

// One job arriving at `arrival` on an otherwise idle SoC; returns its
// completion latency.
Nanos single_job_makespan(const Platform& platform, const BoundApp& app, const Scheduler& scheduler,
                          const GovernorConfig& governor = {}, Nanos arrival = 0);

}  // namespace dssim
