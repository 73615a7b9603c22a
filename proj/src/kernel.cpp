#include "dssim/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "dssim/errors.hpp"
#include "dssim/report.hpp"
#include "dssim/sched.hpp"

namespace dssim {

namespace {

std::string describe(const SimState& state, TaskRef ref) {
    return "job " + std::to_string(ref.job_id) + " task '" + state.app->task(ref.task).name + "'";
}

// Integrates energy, utilization and temperature over [clock, to).
void advance(SimState& state, Nanos to) {
    if (to <= state.clock) return;
    const Nanos from = state.clock;
    const Nanos dt = to - from;
    const auto& platform = *state.platform;

    std::vector<Femtojoules> domain_energy(platform.domain_count(), 0);
    for (std::size_t i = 0; i < state.pes.size(); ++i) {
        const std::size_t domain = platform.domain_of_type(state.pes[i].id.type);
        auto& pe = state.energy[i];
        const Nanos busy_before = pe.busy_time;
        domain_energy[domain] += accumulate_energy(std::span(&pe, 1), from, to);
        state.domains[domain].busy_since_tick += pe.busy_time - busy_before;
    }
    for (std::size_t d = 0; d < state.domains.size(); ++d) {
        auto& domain = state.domains[d];
        // fJ / ns = µW
        const double power_w = static_cast<double>(domain_energy[d]) / static_cast<double>(dt) * 1e-6;
        domain.peak_temperature =
            std::max(domain.peak_temperature, thermal_advance(domain.thermal, power_w, dt));
    }
    state.clock = to;
}

void set_opp(SimState& state, std::size_t domain, std::size_t index) {
    auto& ds = state.domains[domain];
    ds.opp_index = index;
    const Opp* opp = &state.platform->opps(domain)[index];
    for (std::size_t i = 0; i < state.pes.size(); ++i) {
        if (state.platform->domain_of_type(state.pes[i].id.type) == domain) state.energy[i].idle_opp = opp;
    }
    state.opp_log.push_back({state.clock, domain, index, opp->freq});
}

void governor_epoch(SimState& state) {
    const auto& platform = *state.platform;
    for (std::size_t d = 0; d < state.domains.size(); ++d) {
        auto& ds = state.domains[d];
        const double capacity =
            static_cast<double>(platform.domain_pe_count(d)) * static_cast<double>(state.governor.period);
        const double util = std::clamp(static_cast<double>(ds.busy_since_tick) / capacity, 0.0, 1.0);
        ds.busy_since_tick = 0;
        const std::size_t next = governor_tick(state.governor, util, ds.opp_index, platform.opps(d).size());
        if (next != ds.opp_index) set_opp(state, d, next);
    }
}

bool work_outstanding(const SimState& state) {
    return state.pending_arrivals > 0 || state.unfinished_jobs > 0;
}

void finish_task(SimState& state, TaskRef ref) {
    auto& task = state.task(ref);
    task.state = TaskState::finished;
    auto& pe = state.pes[state.platform->flat_index(*task.assigned_pe)];
    pe.busy = false;
    pe.current_task.reset();
    pe.available_at = state.clock;
    --state.running_tasks;
    --state.jobs[ref.job_id].unfinished;

    for (const auto& next : ready_successors(state, ref)) state.ready_list.push_back(next);
}

}  // namespace

Nanos comm_latency(Bytes volume, PeId src, PeId dst, const CommParams& params) {
    if (src == dst) return 0;
    const long double transfer_ns =
        static_cast<long double>(volume) * 1000.0L / static_cast<long double>(params.bandwidth_bytes_per_us);
    return params.latency + static_cast<Nanos>(std::ceil(transfer_ns));
}

SimState::SimState(const Platform& platform_ref, const BoundApp& app_ref, const GovernorConfig& gov,
                   const RunOptions& opts)
    : platform(&platform_ref), app(&app_ref), governor(gov), options(opts) {
    if (auto problem = check_governor(governor); !problem.empty()) throw ConfigError(problem);
    pes.resize(platform->pe_count());
    energy.resize(platform->pe_count());
    for (std::size_t i = 0; i < pes.size(); ++i) pes[i].id = platform->pe_id(i);

    domains.resize(platform->domain_count());
    for (std::size_t d = 0; d < domains.size(); ++d) {
        auto& ds = domains[d];
        ds.thermal = options.thermal;
        ds.peak_temperature = ds.thermal.temperature;
        ds.opp_index = initial_opp_index(governor.policy, platform->opps(d).size());
        const Opp* opp = &platform->opps(d)[ds.opp_index];
        for (std::size_t i = 0; i < pes.size(); ++i) {
            if (platform->domain_of_type(pes[i].id.type) == d) energy[i].idle_opp = opp;
        }
        opp_log.push_back({0, d, ds.opp_index, opp->freq});
    }
}

Nanos SimState::exec_time(TaskRef ref, PeId pe_id) const {
    const auto latency = app->ref_latency(ref.task, pe_id.type);
    if (!latency) {
        throw UnsupportedTask("task '" + app->task(ref.task).name + "' cannot run on PE type '" +
                              platform->type(pe_id.type).name + "'");
    }
    const std::size_t domain = platform->domain_of_type(pe_id.type);
    return scale_latency(*latency, platform->type(pe_id.type).kind, current_opp(domain).freq,
                         platform->ref_freq(domain));
}

Nanos SimState::earliest_start(TaskRef ref, PeId pe_id) const {
    Nanos start = clock;
    const auto& comm = platform->db().comm;
    for (const auto& link : app->preds(ref.task)) {
        const auto& pred = jobs[ref.job_id].tasks[link.task];
        if (pred.state != TaskState::finished) continue;
        start = std::max(start, *pred.t_finish + comm_latency(link.volume, *pred.assigned_pe, pe_id, comm));
    }
    return start;
}

std::uint64_t SimState::push_event(Nanos time, EventClass kind, TaskRef target) {
    const std::uint64_t seq = next_seq++;
    events.push(Event{time, kind, seq, target});
    return seq;
}

Event dispatch(SimState& state, TaskRef ref, PeId pe_id) {
    if (ref.job_id >= state.jobs.size() || ref.task >= state.app->task_count()) {
        throw SchedulerContractError("assignment names an unknown task");
    }
    if (pe_id.type >= state.platform->type_count() ||
        pe_id.index >= static_cast<std::size_t>(state.platform->type(pe_id.type).count)) {
        throw SchedulerContractError("assignment names an unknown PE");
    }
    auto& task = state.task(ref);
    if (task.state != TaskState::ready) {
        throw SchedulerContractError("assignment of " + describe(state, ref) + " which is " +
                                     std::string(to_string(task.state)) + ", not ready");
    }
    const std::size_t flat = state.platform->flat_index(pe_id);
    auto& pe = state.pes[flat];
    if (pe.busy) {
        throw SchedulerContractError("assignment of " + describe(state, ref) + " to busy PE " +
                                     state.platform->label(pe_id));
    }
    if (!state.app->supports(ref.task, pe_id.type)) {
        throw SchedulerContractError("assignment of " + describe(state, ref) + " to unsupported PE " +
                                     state.platform->label(pe_id));
    }

    const Nanos start = state.earliest_start(ref, pe_id);
    const Nanos finish = start + state.exec_time(ref, pe_id);
    const std::size_t domain = state.platform->domain_of_type(pe_id.type);
    const Opp& opp = state.current_opp(domain);

    task.state = TaskState::running;
    task.assigned_pe = pe_id;
    task.t_start = start;
    task.t_finish = finish;
    task.freq = opp.freq;

    pe.busy = true;
    pe.available_at = finish;
    pe.current_task = ref;
    auto& energy = state.energy[flat];
    energy.busy_opp = &opp;
    energy.exec_start = start;
    energy.exec_finish = finish;

    auto it = std::find(state.ready_list.begin(), state.ready_list.end(), ref);
    if (it != state.ready_list.end()) state.ready_list.erase(it);
    ++state.running_tasks;

    if (state.options.record_trace) {
        state.trace.push_back(TraceRecord{ref.job_id, state.app->task(ref.task).name,
                                          state.platform->type(pe_id.type).name, pe_id.index,
                                          *task.t_ready, start, finish, opp.freq});
    }
    const auto seq = state.push_event(finish, EventClass::task_finish, ref);
    return Event{finish, EventClass::task_finish, seq, ref};
}

std::vector<TaskRef> ready_successors(SimState& state, TaskRef finished) {
    auto& job = state.jobs[finished.job_id];
    const auto& done = job.tasks[finished.task];
    std::vector<TaskRef> released;
    for (const auto& link : state.app->succs(finished.task)) {
        auto& succ = job.tasks[link.task];
        if (--succ.pending_preds == 0) {
            succ.state = TaskState::ready;
            succ.t_ready = done.t_finish;
            released.push_back({finished.job_id, link.task});
        }
    }
    if (job.unfinished == 0 && !job.t_complete) {
        job.t_complete = done.t_finish;
        --state.unfinished_jobs;
        ++state.jobs_completed;
    }
    return released;
}

SimState simulate(const Platform& platform, const BoundApp& app, std::span<const Nanos> arrivals,
                  Nanos horizon, const Scheduler& scheduler, const GovernorConfig& governor,
                  const RunOptions& options) {
    SimState state(platform, app, governor, options);
    state.horizon = horizon;
    state.jobs.reserve(arrivals.size());
    for (std::size_t i = 0; i < arrivals.size(); ++i) {
        if (i > 0 && arrivals[i] <= arrivals[i - 1]) {
            throw ConfigError("arrival times must be strictly increasing");
        }
        state.push_event(arrivals[i], EventClass::job_arrival, TaskRef{i, 0});
    }
    state.pending_arrivals = arrivals.size();
    if (governor.period < horizon || !arrivals.empty()) {
        state.push_event(governor.period, EventClass::governor_tick, {});
    }

    bool cut_short = false;
    while (!state.events.empty()) {
        const Nanos now = state.events.top().time;
        if (now > options.max_time) {
            cut_short = true;
            break;
        }
        if (state.events.top().kind == EventClass::governor_tick && now >= horizon &&
            !work_outstanding(state)) {
            state.events.pop();
            continue;
        }
        advance(state, now);

        bool epoch = false;
        while (!state.events.empty() && state.events.top().time == now) {
            const Event event = state.events.top();
            state.events.pop();
            switch (event.kind) {
                case EventClass::job_arrival: {
                    --state.pending_arrivals;
                    ++state.unfinished_jobs;
                    state.jobs.push_back(instantiate_job(app, event.target.job_id, now));
                    for (std::size_t t : app.sources()) state.ready_list.push_back({event.target.job_id, t});
                    epoch = true;
                    break;
                }
                case EventClass::task_finish:
                    finish_task(state, event.target);
                    epoch = true;
                    break;
                case EventClass::governor_tick:
                    governor_epoch(state);
                    if (now + governor.period < horizon || work_outstanding(state)) {
                        state.push_event(now + governor.period, EventClass::governor_tick, {});
                    }
                    break;
            }
        }

        if (epoch && !state.ready_list.empty()) {
            const auto assignments = scheduler.schedule(state.ready_list, state);
            for (const auto& a : assignments) dispatch(state, a.task, a.pe);
        }

        if (state.pending_arrivals == 0 && state.running_tasks == 0 && state.unfinished_jobs > 0) {
            std::string stuck = state.ready_list.empty() ? std::string("no ready task")
                                                         : describe(state, state.ready_list.front());
            throw DeadlockError("deadlock at t=" + format_us(state.clock) + " us: " +
                                std::to_string(state.unfinished_jobs) + " unfinished job(s), " +
                                std::to_string(state.ready_list.size()) + " ready task(s) never placed by '" +
                                scheduler.name() + "' (first: " + stuck + ")");
        }
    }

    state.end_time = cut_short ? options.max_time : std::max(horizon, state.clock);
    if (!cut_short) state.end_time = std::min(state.end_time, options.max_time);
    state.end_time = std::max(state.end_time, state.clock);
    advance(state, state.end_time);
    return state;
}

SimReport run(const Platform& platform, const BoundApp& app, std::span<const Nanos> arrivals,
              Nanos horizon, const Scheduler& scheduler, const GovernorConfig& governor,
              const RunOptions& options) {
    return summarize(simulate(platform, app, arrivals, horizon, scheduler, governor, options),
                     scheduler.name());
}

SimReport run(const Platform& platform, const BoundApp& app, const ArrivalPlan& plan,
              const Scheduler& scheduler, const GovernorConfig& governor, const RunOptions& options) {
    const auto arrivals = generate_arrivals(plan);
    return run(platform, app, arrivals, plan.duration, scheduler, governor, options);
}

Nanos single_job_makespan(const Platform& platform, const BoundApp& app, const Scheduler& scheduler,
                          const GovernorConfig& governor, Nanos arrival) {
    const Nanos arrivals[] = {arrival};
    RunOptions options;
    options.warmup_fraction = 0.0;
    const auto state = simulate(platform, app, arrivals, arrival, scheduler, governor, options);
    const auto& job = state.jobs.front();
    return *job.t_complete - job.t_arrive;
}

}  // namespace dssim
