#include "dssim/workload.hpp"

#include <cmath>
#include <random>
#include <string>

#include "dssim/errors.hpp"

namespace dssim {

namespace {

TaskDef profiled(std::string name, std::initializer_list<std::pair<const char*, int>> latencies_us) {
    TaskDef task;
    task.name = std::move(name);
    for (const auto& [type, us] : latencies_us) task.latency_profile[type] = us_to_ns(std::int64_t{us});
    return task;
}

Opp opp(Mhz freq, double volts, double dyn_mw, double static_mw) {
    return Opp{freq, volts, mw_to_uw(dyn_mw), mw_to_uw(static_mw)};
}

}  // namespace

AppGraph builtin_wifi_tx(Bytes edge_volume) {
    AppGraph app;
    app.name = "wifi_tx";
    app.tasks = {
        profiled("Scrambler-Encoder", {{"Scrambler-Acc", 8}, {"Cortex-A7", 22}, {"Cortex-A15", 10}}),
        profiled("Interleaver", {{"Cortex-A7", 10}, {"Cortex-A15", 4}}),
        profiled("QPSK-Modulation", {{"Cortex-A7", 15}, {"Cortex-A15", 8}}),
        profiled("Pilot-Insertion", {{"Cortex-A7", 5}, {"Cortex-A15", 3}}),
        profiled("Inverse-FFT", {{"FFT-Acc", 16}, {"Cortex-A7", 296}, {"Cortex-A15", 118}}),
        profiled("CRC", {{"Cortex-A7", 5}, {"Cortex-A15", 3}}),
    };
    for (std::size_t i = 0; i + 1 < app.tasks.size(); ++i) {
        app.edges.push_back({app.tasks[i].name, app.tasks[i + 1].name, edge_volume});
    }
    return app;
}

ResourceDb table2_soc() {
    ResourceDb db;
    db.pe_types = {
        {"Cortex-A15", PeKind::general_purpose, 4, "big"},
        {"Cortex-A7", PeKind::general_purpose, 4, "little"},
        {"Scrambler-Acc", PeKind::accelerator, 2, "scrambler_acc"},
        {"FFT-Acc", PeKind::accelerator, 4, "fft_acc"},
    };
    // Synthetic power numbers shaped after a big.LITTLE part; not measured.
    db.opp_tables["big"] = {
        opp(600, 0.90, 180, 40),   opp(1000, 0.95, 400, 55),  opp(1400, 1.05, 750, 75),
        opp(1800, 1.15, 1250, 100), opp(2000, 1.25, 1650, 130),
    };
    db.opp_tables["little"] = {
        opp(600, 0.90, 45, 10),
        opp(1000, 1.00, 95, 14),
        opp(1400, 1.20, 180, 20),
    };
    db.opp_tables["scrambler_acc"] = {opp(250, 1.00, 30, 4)};
    db.opp_tables["fft_acc"] = {opp(250, 1.00, 60, 6)};
    db.comm = CommParams{0, 1000.0};
    return db;
}

std::string_view to_string(ArrivalDistribution distribution) {
    return distribution == ArrivalDistribution::exponential ? "exponential" : "deterministic";
}

ArrivalDistribution parse_distribution(std::string_view text) {
    if (text == "exponential") return ArrivalDistribution::exponential;
    if (text == "deterministic") return ArrivalDistribution::deterministic;
    throw ConfigError("unknown arrival distribution '" + std::string(text) + "'");
}

void check_plan(const ArrivalPlan& plan) {
    if (!(plan.rate_per_ms > 0.0) || !std::isfinite(plan.rate_per_ms)) {
        throw ConfigError("arrival rate must be > 0 jobs/ms");
    }
    if (plan.duration <= 0) throw ConfigError("workload duration must be > 0");
}

std::vector<Nanos> generate_arrivals(const ArrivalPlan& plan) {
    check_plan(plan);
    const double mean_gap_ns = static_cast<double>(kNsPerMs) / plan.rate_per_ms;
    std::vector<Nanos> times;

    if (plan.distribution == ArrivalDistribution::deterministic) {
        for (std::int64_t k = 0;; ++k) {
            auto t = static_cast<Nanos>(std::llround(static_cast<double>(k) * mean_gap_ns));
            if (t >= plan.duration) break;
            if (!times.empty() && t <= times.back()) t = times.back() + 1;
            times.push_back(t);
        }
        return times;
    }

    // Inverse-transform sampling on mt19937_64 output so the sequence is the
    // same on every standard library.
    std::mt19937_64 rng(plan.seed);
    Nanos t = 0;
    while (true) {
        const double u = static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        const auto gap = static_cast<Nanos>(std::llround(-std::log(u) * mean_gap_ns));
        t += std::max<Nanos>(1, gap);
        if (t >= plan.duration) break;
        times.push_back(t);
    }
    return times;
}

std::string_view to_string(TaskState state) {
    switch (state) {
        case TaskState::blocked: return "blocked";
        case TaskState::ready: return "ready";
        case TaskState::running: return "running";
        case TaskState::finished: return "finished";
    }
    return "?";
}

JobInstance instantiate_job(const BoundApp& app, std::uint64_t job_id, Nanos t_arrive) {
    JobInstance job;
    job.job_id = job_id;
    job.t_arrive = t_arrive;
    job.unfinished = app.task_count();
    job.tasks.resize(app.task_count());
    for (std::size_t t = 0; t < app.task_count(); ++t) {
        auto& inst = job.tasks[t];
        inst.task = t;
        inst.job_id = job_id;
        inst.pending_preds = app.preds(t).size();
        if (inst.pending_preds == 0) {
            inst.state = TaskState::ready;
            inst.t_ready = t_arrive;
        }
    }
    return job;
}

}  // namespace dssim
