#pragma once

// Shared fixtures for the unit and acceptance tests.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dssim/kernel.hpp"
#include "dssim/model.hpp"
#include "dssim/sched.hpp"
#include "dssim/workload.hpp"

namespace dssim::testing {

inline Opp opp(Mhz freq, double dyn_mw, double static_mw, double volts = 1.0) {
    return Opp{freq, volts, mw_to_uw(dyn_mw), mw_to_uw(static_mw)};
}

// One domain per PE type, each with a single OPP, so execution time equals
// the reference latency.
inline ResourceDb flat_soc(const std::vector<std::pair<std::string, int>>& types, Nanos comm_latency = 0,
                           double bandwidth = 1000.0) {
    ResourceDb db;
    for (const auto& [name, count] : types) {
        db.pe_types.push_back({name, PeKind::general_purpose, count, name + "-dom"});
        db.opp_tables[name + "-dom"] = {opp(1000, 100, 10)};
    }
    db.comm = {comm_latency, bandwidth};
    return db;
}

inline TaskDef task(std::string name, std::map<std::string, Nanos> profile_us) {
    TaskDef t{std::move(name), {}};
    for (const auto& [type, us] : profile_us) t.latency_profile[type] = us_to_ns(us);
    return t;
}

inline AppGraph chain_app(std::string name, std::vector<TaskDef> tasks, Bytes volume = 0) {
    AppGraph app{std::move(name), std::move(tasks), {}};
    for (std::size_t i = 1; i < app.tasks.size(); ++i) {
        app.edges.push_back({app.tasks[i - 1].name, app.tasks[i].name, volume});
    }
    return app;
}

struct RandomCase {
    ResourceDb db;
    AppGraph app;
};

struct RandomCaseShape {
    std::size_t max_tasks = 6;
    std::size_t max_types = 3;
    int max_count = 3;
    Nanos max_latency_us = 50;
    Bytes max_volume = 4000;
    bool comm = true;       // random setup latency and bandwidth
    bool chain = false;     // force a linear chain
    bool dvfs = false;      // give general-purpose domains several OPPs
};

// Small random SoC plus a random DAG over it. Every task is supported by at
// least one type; edges only go from lower to higher task index.
inline RandomCase random_case(std::mt19937_64& rng, const RandomCaseShape& shape = {}) {
    auto pick = [&rng](std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
    };
    RandomCase out;
    const auto type_count = static_cast<std::size_t>(pick(1, static_cast<std::int64_t>(shape.max_types)));
    for (std::size_t i = 0; i < type_count; ++i) {
        const std::string name = "T" + std::to_string(i);
        const bool accel = pick(0, 3) == 0;
        PeType type{name, accel ? PeKind::accelerator : PeKind::general_purpose,
                    static_cast<int>(pick(1, shape.max_count)), "d" + std::to_string(i)};
        out.db.pe_types.push_back(type);
        if (accel || !shape.dvfs) {
            out.db.opp_tables[type.freq_domain] = {opp(accel ? 250 : 1000, 20.0 + pick(0, 80), 1.0 + pick(0, 9))};
        } else {
            out.db.opp_tables[type.freq_domain] = {opp(500, 40, 5), opp(1000, 120, 9), opp(1500, 300, 15)};
        }
    }
    if (shape.comm) {
        out.db.comm = {us_to_ns(pick(0, 3)), static_cast<double>(pick(1, 4) * 500)};
    } else {
        out.db.comm = {0, 1000.0};
    }

    const auto task_count = static_cast<std::size_t>(pick(1, static_cast<std::int64_t>(shape.max_tasks)));
    out.app.name = "rand";
    for (std::size_t t = 0; t < task_count; ++t) {
        TaskDef def{"t" + std::to_string(t), {}};
        const auto forced = static_cast<std::size_t>(pick(0, static_cast<std::int64_t>(type_count) - 1));
        for (std::size_t i = 0; i < type_count; ++i) {
            if (i == forced || pick(0, 1) == 1) {
                def.latency_profile[out.db.pe_types[i].name] = us_to_ns(pick(1, shape.max_latency_us));
            }
        }
        out.app.tasks.push_back(std::move(def));
    }
    for (std::size_t dst = 1; dst < task_count; ++dst) {
        if (shape.chain) {
            out.app.edges.push_back({out.app.tasks[dst - 1].name, out.app.tasks[dst].name,
                                     shape.comm ? pick(0, shape.max_volume) : 0});
            continue;
        }
        for (std::size_t src = 0; src < dst; ++src) {
            if (pick(0, 2) == 0) {
                out.app.edges.push_back({out.app.tasks[src].name, out.app.tasks[dst].name,
                                         shape.comm ? pick(0, shape.max_volume) : 0});
            }
        }
    }
    return out;
}

// Scheduler whose decisions come from a callback; handy for contract tests.
class ScriptedScheduler final : public Scheduler {
public:
    using Fn = std::function<std::vector<Assignment>(std::span<const TaskRef>, const SimState&)>;

    explicit ScriptedScheduler(Fn fn, std::string name = "scripted") : fn_(std::move(fn)), name_(std::move(name)) {}

    std::string name() const override { return name_; }
    std::vector<Assignment> schedule(std::span<const TaskRef> ready, const SimState& view) const override {
        return fn_(ready, view);
    }

private:
    Fn fn_;
    std::string name_;
};

// Hand-built simulation state for scheduler and kernel unit tests.
struct Harness {
    Platform platform;
    BoundApp app;
    SimState state;

    Harness(ResourceDb db, AppGraph graph, const GovernorConfig& governor = {})
        : platform(std::move(db)), app(std::move(graph), platform), state(platform, app, governor, {}) {}

    std::uint64_t add_job(Nanos t_arrive = 0) {
        const auto id = static_cast<std::uint64_t>(state.jobs.size());
        state.jobs.push_back(instantiate_job(app, id, t_arrive));
        ++state.unfinished_jobs;
        for (std::size_t t : app.sources()) state.ready_list.push_back({id, t});
        return id;
    }

    std::size_t task_index(const std::string& name) const { return *app.graph().find_task(name); }

    PeId pe(const std::string& type, std::size_t index = 0) const { return {*platform.find_type(type), index}; }

    // Marks a task finished on `where` at `t_finish` without running the
    // kernel; successors are released exactly as the kernel would.
    void force_finished(TaskRef ref, PeId where, Nanos t_start, Nanos t_finish) {
        mark_finished(ref, where, t_start, t_finish);
        for (const auto& next : ready_successors(state, ref)) state.ready_list.push_back(next);
    }

    // Same bookkeeping as force_finished but leaves successor release to the
    // caller.
    void mark_finished(TaskRef ref, PeId where, Nanos t_start, Nanos t_finish) {
        auto& t = state.task(ref);
        if (t.state == TaskState::blocked) t.t_ready = t_start;
        t.state = TaskState::running;
        t.assigned_pe = where;
        t.t_start = t_start;
        t.t_finish = t_finish;
        auto it = std::find(state.ready_list.begin(), state.ready_list.end(), ref);
        if (it != state.ready_list.end()) state.ready_list.erase(it);
        t.state = TaskState::finished;
        --state.jobs[ref.job_id].unfinished;
    }

    // Forces a task to ready regardless of its predecessors.
    void force_ready(TaskRef ref) {
        auto& t = state.task(ref);
        t.state = TaskState::ready;
        t.t_ready = state.clock;
        state.ready_list.push_back(ref);
    }

    void occupy(PeId id, Nanos until) {
        auto& p = state.pes[platform.flat_index(id)];
        p.busy = true;
        p.available_at = until;
    }
};

// Fresh directory under the system temp dir, removed on scope exit.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("dssim-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// True when no two trace records on the same PE overlap in [start, finish).
inline bool intervals_disjoint(std::vector<TraceRecord> trace) {
    std::sort(trace.begin(), trace.end(), [](const TraceRecord& a, const TraceRecord& b) {
        return std::tie(a.pe_type, a.pe_index, a.t_start) < std::tie(b.pe_type, b.pe_index, b.t_start);
    });
    for (std::size_t i = 1; i < trace.size(); ++i) {
        const auto& a = trace[i - 1];
        const auto& b = trace[i];
        if (a.pe_type == b.pe_type && a.pe_index == b.pe_index && b.t_start < a.t_finish) return false;
    }
    return true;
}

// Pairwise check, quadratic on purpose: does not rely on sorting.
inline bool intervals_disjoint_exhaustive(const std::vector<TraceRecord>& trace) {
    for (std::size_t i = 0; i < trace.size(); ++i) {
        for (std::size_t j = i + 1; j < trace.size(); ++j) {
            const auto& a = trace[i];
            const auto& b = trace[j];
            if (a.pe_type != b.pe_type || a.pe_index != b.pe_index) continue;
            if (a.t_start < b.t_finish && b.t_start < a.t_finish) return false;
        }
    }
    return true;
}

}  // namespace dssim::testing
