#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "dssim/errors.hpp"
#include "dssim/oracle.hpp"
#include "dssim/report.hpp"
#include "support/support.hpp"

using namespace dssim;
using namespace dssim::testing;

namespace {

RunOptions no_warmup() {
    RunOptions o;
    o.warmup_fraction = 0.0;
    return o;
}

std::vector<std::string> lines_of(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

struct Wifi {
    Platform platform{table2_soc()};
    BoundApp app{builtin_wifi_tx(), platform};
    MetScheduler met;
    EtfScheduler etf;
    TableScheduler table{optimal_single_job(app, platform).table, app, platform};
};

}  // namespace

TEST(Summarize, SingleWifiJob) {
    Wifi w;
    const std::vector<Nanos> arrivals{0};
    const auto r = run(w.platform, w.app, arrivals, us_to_ns(std::int64_t{100}), w.etf, {}, no_warmup());
    ASSERT_TRUE(r.avg_job_exec_time_us);
    EXPECT_DOUBLE_EQ(*r.avg_job_exec_time_us, 42.0);
    EXPECT_EQ(r.elapsed, us_to_ns(std::int64_t{100}));
    EXPECT_DOUBLE_EQ(r.throughput_per_ms, 1.0 / 0.1);
    EXPECT_EQ(r.jobs_injected, 1u);
    EXPECT_EQ(r.jobs_completed, 1u);
    EXPECT_EQ(r.in_flight, 0u);
    EXPECT_EQ(r.scheduler, "etf");
    EXPECT_EQ(r.trace.size(), 6u);
}

TEST(Summarize, NoCompletedJobsLeavesAverageAbsent) {
    Wifi w;
    auto options = no_warmup();
    options.max_time = us_to_ns(std::int64_t{10});
    const std::vector<Nanos> arrivals{0};
    const auto r = run(w.platform, w.app, arrivals, us_to_ns(std::int64_t{100}), w.etf, {}, options);
    EXPECT_FALSE(r.avg_job_exec_time_us);
    EXPECT_EQ(r.jobs_completed, 0u);
    EXPECT_EQ(r.in_flight, 1u);
    EXPECT_EQ(r.throughput_per_ms, 0.0);
}

TEST(Summarize, UtilizationIsBusyOverElapsed) {
    const Platform p(flat_soc({{"A", 1}}));
    const BoundApp app(AppGraph{"one", {task("x", {{"A", 42}})}, {}}, p);
    const std::vector<Nanos> arrivals{0};
    const auto r = run(p, app, arrivals, us_to_ns(std::int64_t{100}), EtfScheduler{}, {}, no_warmup());
    ASSERT_EQ(r.pes.size(), 1u);
    EXPECT_EQ(r.pes[0].busy_time, us_to_ns(std::int64_t{42}));
    EXPECT_DOUBLE_EQ(r.pes[0].utilization, 0.42);
}

TEST(Summarize, WarmupJobsLeaveTheAverage) {
    Wifi w;
    const ArrivalPlan plan{ArrivalDistribution::deterministic, 5.0, us_to_ns(std::int64_t{1000}), 1};
    const auto r = run(w.platform, w.app, plan, w.etf, {});
    EXPECT_EQ(r.warmup_cutoff, us_to_ns(std::int64_t{100}));
    EXPECT_EQ(r.jobs_injected, 5u);
    EXPECT_EQ(r.jobs_averaged, 4u);  // the job at t=0 is inside the warm-up
    EXPECT_DOUBLE_EQ(*r.avg_job_exec_time_us, 42.0);
}

TEST(Summarize, InvariantsOnRandomRuns) {
    std::mt19937_64 rng(61);
    RandomCaseShape shape;
    shape.dvfs = true;
    for (int i = 0; i < 60; ++i) {
        const auto c = random_case(rng, shape);
        const Platform p(c.db);
        const BoundApp app(c.app, p);
        Nanos shortest = std::numeric_limits<Nanos>::max();
        for (const auto& t : c.app.tasks) {
            for (const auto& [type, lat] : t.latency_profile) shortest = std::min(shortest, lat);
        }
        const ArrivalPlan plan{ArrivalDistribution::exponential, 1.0 + static_cast<double>(rng() % 40),
                               us_to_ns(std::int64_t{3000}), rng()};
        GovernorConfig gov;
        gov.policy = static_cast<GovernorPolicy>(rng() % 3);
        const MetScheduler met;
        const EtfScheduler etf;
        const Scheduler& sched = i % 2 ? static_cast<const Scheduler&>(met) : etf;
        const auto r = run(p, app, plan, sched, gov, no_warmup());
        EXPECT_LE(r.jobs_completed, r.jobs_injected);
        EXPECT_EQ(r.in_flight, r.jobs_injected - r.jobs_completed);
        for (const auto& pe : r.pes) {
            EXPECT_GE(pe.utilization, 0.0);
            EXPECT_LE(pe.utilization, 1.0);
        }
        // Reference latencies are at the top OPP, so scaling never shortens
        // a task.
        if (r.avg_job_exec_time_us) EXPECT_GE(*r.avg_job_exec_time_us, ns_to_us(shortest));
        Femtojoules sum = 0;
        for (const auto& pe : r.pes) sum += pe.energy;
        EXPECT_EQ(sum, r.energy_total);
    }
}

TEST(Summarize, LittlesLawAtLowLoad) {
    Wifi w;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const ArrivalPlan plan{ArrivalDistribution::exponential, 5.0, 200 * kNsPerMs, seed};
        const auto r = run(w.platform, w.app, plan, w.etf, {});
        const double offered = static_cast<double>(r.jobs_injected) / (static_cast<double>(r.elapsed) / kNsPerMs);
        EXPECT_NEAR(r.throughput_per_ms, offered, 0.02 * offered);
        EXPECT_GE(static_cast<double>(r.jobs_completed), 0.98 * static_cast<double>(r.jobs_injected));
    }
    const ArrivalPlan steady{ArrivalDistribution::deterministic, 5.0, 200 * kNsPerMs, 1};
    EXPECT_NEAR(run(w.platform, w.app, steady, w.etf, {}).throughput_per_ms, 5.0, 0.1);
}

TEST(TraceEnergy, MatchesKernelAccumulators) {
    std::mt19937_64 rng(67);
    RandomCaseShape shape;
    shape.dvfs = true;
    for (int i = 0; i < 80; ++i) {
        const auto c = random_case(rng, shape);
        const Platform p(c.db);
        const BoundApp app(c.app, p);
        GovernorConfig gov;
        gov.policy = i % 4 == 0 ? GovernorPolicy::powersave : GovernorPolicy::ondemand;
        gov.period = us_to_ns(static_cast<std::int64_t>(20 + rng() % 200));
        const ArrivalPlan plan{ArrivalDistribution::exponential, 0.5 + static_cast<double>(rng() % 30),
                               us_to_ns(std::int64_t{4000}), rng()};
        auto options = no_warmup();
        if (i % 5 == 0) options.max_time = us_to_ns(std::int64_t{1500});
        const auto r = run(p, app, plan, EtfScheduler{}, gov, options);
        const auto integrated = integrate_trace_energy(p, r.trace, r.opp_log, r.elapsed);
        ASSERT_EQ(integrated.size(), r.pes.size());
        for (std::size_t k = 0; k < integrated.size(); ++k) {
            EXPECT_EQ(integrated[k], r.pes[k].energy) << "case " << i << " pe " << k;
        }
    }
}

TEST(TraceEnergy, IdleSocIsStaticPowerTimesHorizon) {
    Wifi w;
    const auto r = run(w.platform, w.app, std::span<const Nanos>{}, us_to_ns(std::int64_t{1000}), w.etf, {});
    const auto integrated = integrate_trace_energy(w.platform, r.trace, r.opp_log, r.elapsed);
    Femtojoules expected = 0;
    for (std::size_t k = 0; k < w.platform.pe_count(); ++k) {
        const auto d = w.platform.domain_of_type(w.platform.pe_id(k).type);
        expected += w.platform.opps(d).back().static_power * us_to_ns(std::int64_t{1000});
        EXPECT_EQ(integrated[k], r.pes[k].energy);
    }
    EXPECT_EQ(r.energy_total, expected);
}

TEST(Sweep, FifteenRatesThreeSchedulers) {
    Wifi w;
    SweepConfig cfg;
    for (int rate = 1; rate <= 15; ++rate) cfg.rates_per_ms.push_back(rate);
    cfg.duration = 2 * kNsPerMs;
    const auto result = sweep(w.platform, w.app, {&w.met, &w.etf, &w.table}, cfg);
    ASSERT_EQ(result.rows.size(), 45u);
    for (std::size_t i = 1; i < result.rows.size(); ++i) {
        const auto& a = result.rows[i - 1];
        const auto& b = result.rows[i];
        EXPECT_TRUE(a.scheduler < b.scheduler || (a.scheduler == b.scheduler && a.rate_per_ms < b.rate_per_ms));
    }
    EXPECT_EQ(result.rows.front().scheduler, "etf");
    EXPECT_EQ(result.rows.back().scheduler, "table");
}

TEST(Sweep, EveryCellMatchesAStandaloneRun) {
    Wifi w;
    SweepConfig cfg;
    cfg.rates_per_ms = {2, 40, 90};
    cfg.seeds = {3, 4};
    cfg.duration = 3 * kNsPerMs;
    const std::vector<const Scheduler*> scheds{&w.met, &w.etf, &w.table};
    const auto result = sweep(w.platform, w.app, scheds, cfg);
    for (const auto& row : result.rows) {
        double avg = 0, thr = 0, energy = 0;
        for (auto seed : cfg.seeds) {
            const Scheduler* s = *std::find_if(scheds.begin(), scheds.end(),
                                               [&](const Scheduler* x) { return x->name() == row.scheduler; });
            const auto r = run(w.platform, w.app,
                               ArrivalPlan{cfg.distribution, row.rate_per_ms, cfg.duration, seed}, *s, {});
            avg += *r.avg_job_exec_time_us;
            thr += r.throughput_per_ms;
            energy += r.energy_total_mj();
        }
        EXPECT_DOUBLE_EQ(*row.avg_exec_time_us, avg / 2);
        EXPECT_DOUBLE_EQ(row.throughput_per_ms, thr / 2);
        EXPECT_DOUBLE_EQ(row.energy_mj, energy / 2);
    }
}

TEST(Sweep, SchedulersSeeIdenticalArrivals) {
    // Jobs are injected regardless of the scheduler, so matching injected
    // counts and arrival stamps show the workloads were shared.
    Wifi w;
    const ArrivalPlan plan{ArrivalDistribution::exponential, 30.0, 2 * kNsPerMs, 8};
    const auto a = run(w.platform, w.app, plan, w.met, {});
    const auto b = run(w.platform, w.app, plan, w.etf, {});
    ASSERT_EQ(a.jobs.size(), b.jobs.size());
    for (std::size_t i = 0; i < a.jobs.size(); ++i) EXPECT_EQ(a.jobs[i].t_arrive, b.jobs[i].t_arrive);
}

TEST(Sweep, ThreadCountDoesNotChangeRows) {
    Wifi w;
    SweepConfig cfg;
    cfg.rates_per_ms = {1, 20, 60, 120};
    cfg.seeds = {1, 2, 3};
    cfg.duration = 2 * kNsPerMs;
    const auto serial = sweep(w.platform, w.app, {&w.met, &w.etf, &w.table}, cfg);
    cfg.parallelism = 4;
    const auto threaded = sweep(w.platform, w.app, {&w.met, &w.etf, &w.table}, cfg);
    EXPECT_EQ(serial, threaded);
    cfg.parallelism = 1;
    EXPECT_EQ(serial, sweep(w.platform, w.app, {&w.met, &w.etf, &w.table}, cfg));
}

TEST(Sweep, DeadlockNamesTheCell) {
    Wifi w;
    const ScriptedScheduler lazy([](std::span<const TaskRef>, const SimState&) { return std::vector<Assignment>{}; },
                                 "lazy");
    SweepConfig cfg;
    cfg.rates_per_ms = {7};
    cfg.seeds = {11};
    cfg.duration = kNsPerMs;
    try {
        sweep(w.platform, w.app, {&w.etf, &lazy}, cfg);
        FAIL() << "expected DeadlockError";
    } catch (const DeadlockError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("scheduler=lazy"), std::string::npos) << what;
        EXPECT_NE(what.find("rate=7"), std::string::npos) << what;
        EXPECT_NE(what.find("seed=11"), std::string::npos) << what;
    }
}

TEST(Sweep, NeedsASeed) {
    Wifi w;
    SweepConfig cfg;
    cfg.rates_per_ms = {1};
    cfg.seeds.clear();
    EXPECT_THROW(sweep(w.platform, w.app, {&w.etf}, cfg), ConfigError);
}

TEST(Files, SweepCsvRoundTrip) {
    ScratchDir dir("sweep");
    SweepResult result;
    result.rows.push_back({0.1, "etf", 42.123456789, 0.0999, 1e-7});
    result.rows.push_back({2.5, "met", std::nullopt, 0.0, 0.0});
    result.rows.push_back({1.0 / 3.0, "odd,name", 1.0 / 7.0, 2.0 / 3.0, 123456.789});
    write_sweep_csv(dir / "s.csv", result);
    EXPECT_EQ(read_sweep_csv(dir / "s.csv"), result);
    EXPECT_EQ(lines_of(dir / "s.csv").front(), "rate,scheduler,avg_exec_time_us,throughput,energy_mj");
}

TEST(Files, SweepOutputRoundTrip) {
    Wifi w;
    SweepConfig cfg;
    cfg.rates_per_ms = {3, 70};
    cfg.duration = 2 * kNsPerMs;
    const auto result = sweep(w.platform, w.app, {&w.met, &w.etf}, cfg);
    ScratchDir dir("sweep2");
    write_sweep_csv(dir / "s.csv", result);
    EXPECT_EQ(read_sweep_csv(dir / "s.csv"), result);
}

TEST(Files, TraceAndOppRoundTrip) {
    Wifi w;
    GovernorConfig gov;
    gov.policy = GovernorPolicy::ondemand;
    const ArrivalPlan plan{ArrivalDistribution::exponential, 40.0, 2 * kNsPerMs, 5};
    const auto r = run(w.platform, w.app, plan, w.etf, gov);
    ASSERT_FALSE(r.trace.empty());
    ScratchDir dir("trace");
    write_outputs(dir.path(), r, w.platform);
    EXPECT_EQ(read_trace_csv(dir / "trace.csv"), r.trace);
    EXPECT_EQ(read_opp_csv(dir / "opp.csv", w.platform), r.opp_log);
    EXPECT_EQ(lines_of(dir / "trace.csv").front(),
              "job_id,task,pe_type,pe_index,t_ready_us,t_start_us,t_finish_us,freq_mhz");
    EXPECT_EQ(lines_of(dir / "gantt.csv").size(), r.trace.size() + 1);

    // Energy re-derived from the files alone.
    const auto integrated = integrate_trace_energy(w.platform, read_trace_csv(dir / "trace.csv"),
                                                   read_opp_csv(dir / "opp.csv", w.platform), r.elapsed);
    Femtojoules total = 0;
    for (auto e : integrated) total += e;
    EXPECT_EQ(total, r.energy_total);
}

TEST(Files, SummaryJsonFields) {
    Wifi w;
    const std::vector<Nanos> arrivals{0};
    const auto r = run(w.platform, w.app, arrivals, us_to_ns(std::int64_t{100}), w.etf, {}, no_warmup());
    ScratchDir dir("summary");
    write_summary_json(dir / "summary.json", r);
    std::ifstream in(dir / "summary.json");
    const auto j = nlohmann::json::parse(in);
    EXPECT_EQ(j.at("jobs_injected"), 1);
    EXPECT_EQ(j.at("jobs_completed"), 1);
    EXPECT_EQ(j.at("in_flight"), 0);
    EXPECT_DOUBLE_EQ(j.at("avg_job_exec_time_us").get<double>(), 42.0);
    EXPECT_DOUBLE_EQ(j.at("elapsed_us").get<double>(), 100.0);
    EXPECT_EQ(j.at("synthetic_power_model"), true);
    EXPECT_EQ(j.at("pes").size(), 14u);
    EXPECT_EQ(j.at("domains").size(), 4u);
}

TEST(Files, AbsentAverageIsNullInSummary) {
    ScratchDir dir("null");
    write_summary_json(dir / "summary.json", SimReport{});
    std::ifstream in(dir / "summary.json");
    EXPECT_TRUE(nlohmann::json::parse(in).at("avg_job_exec_time_us").is_null());
}

TEST(Files, EmptyReportGivesHeaderOnlyFiles) {
    ScratchDir dir("empty");
    const Platform p(table2_soc());
    const SimReport empty;
    write_outputs(dir.path(), empty, p);
    EXPECT_EQ(lines_of(dir / "trace.csv").size(), 1u);
    EXPECT_EQ(lines_of(dir / "opp.csv").size(), 1u);
    EXPECT_EQ(lines_of(dir / "gantt.csv").size(), 1u);
    write_sweep_csv(dir / "sweep.csv", SweepResult{});
    EXPECT_EQ(lines_of(dir / "sweep.csv").size(), 1u);
    EXPECT_TRUE(read_trace_csv(dir / "trace.csv").empty());
    EXPECT_TRUE(read_sweep_csv(dir / "sweep.csv").rows.empty());
}

TEST(Files, ErrorsNameThePath) {
    ScratchDir dir("err");
    std::ofstream(dir / "blocker") << "x";
    const auto bad = dir / "blocker" / "out.csv";
    try {
        write_sweep_csv(bad, SweepResult{});
        FAIL() << "expected IoError";
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find(bad.string()), std::string::npos);
    }
    EXPECT_THROW(write_outputs(dir / "blocker", SimReport{}, Platform(table2_soc())), IoError);
    EXPECT_THROW(read_trace_csv(dir / "missing.csv"), IoError);
    std::ofstream(dir / "wrong.csv") << "a,b\n";
    EXPECT_THROW(read_sweep_csv(dir / "wrong.csv"), IoError);
    std::ofstream(dir / "short.csv") << "rate,scheduler,avg_exec_time_us,throughput,energy_mj\n1,etf\n";
    EXPECT_THROW(read_sweep_csv(dir / "short.csv"), IoError);
}
