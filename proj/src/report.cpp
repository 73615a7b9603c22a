#include "dssim/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "dssim/errors.hpp"
#include "dssim/sched.hpp"

namespace dssim {

namespace fs = std::filesystem;

namespace {

const char* const kTraceHeader = "job_id,task,pe_type,pe_index,t_ready_us,t_start_us,t_finish_us,freq_mhz";
const char* const kOppHeader = "t_us,domain,opp_index,freq_mhz";
const char* const kGanttHeader = "lane,pe_type,pe_index,job_id,task,start_us,finish_us";
const char* const kSweepHeader = "rate,scheduler,avg_exec_time_us,throughput,energy_mj";

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back().push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back().push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back().push_back(c);
        }
    }
    return fields;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
    out.close();
    if (!out) throw IoError("error while writing " + path.string());
}

// Rows of a CSV file after checking the header.
std::vector<std::vector<std::string>> read_csv(const fs::path& path, const char* header,
                                               std::size_t columns) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw IoError(path.string() + ": unexpected header, expected '" + header + "'");
    }
    std::vector<std::vector<std::string>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != columns) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(columns) + " fields");
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

template <typename Fn>
auto parse_field(const fs::path& path, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

const Opp& opp_by_freq(const Platform& platform, std::size_t domain, Mhz freq) {
    for (const auto& opp : platform.opps(domain)) {
        if (opp.freq == freq) return opp;
    }
    throw ConfigError("domain '" + platform.domain_name(domain) + "' has no OPP at " + std::to_string(freq) + " MHz");
}

}  // namespace

SimReport summarize(const SimState& state, const std::string& scheduler_name) {
    const auto& platform = *state.platform;
    SimReport report;
    report.app = state.app->name();
    report.scheduler = scheduler_name;
    report.governor = std::string(to_string(state.governor.policy));
    report.jobs_injected = state.jobs.size();
    report.jobs_completed = state.jobs_completed;
    report.in_flight = report.jobs_injected - report.jobs_completed;
    report.elapsed = state.end_time;
    report.warmup_cutoff =
        static_cast<Nanos>(std::llround(state.options.warmup_fraction * static_cast<double>(state.horizon)));

    Nanos total = 0;
    for (const auto& job : state.jobs) {
        report.jobs.push_back({job.job_id, job.t_arrive, job.t_complete});
        if (job.t_complete && job.t_arrive >= report.warmup_cutoff) {
            total += *job.t_complete - job.t_arrive;
            ++report.jobs_averaged;
        }
    }
    if (report.jobs_averaged > 0) {
        report.avg_job_exec_time_us =
            static_cast<double>(total) / static_cast<double>(report.jobs_averaged) / static_cast<double>(kNsPerUs);
    }
    if (report.elapsed > 0) {
        report.throughput_per_ms = static_cast<double>(report.jobs_completed) /
                                   (static_cast<double>(report.elapsed) / static_cast<double>(kNsPerMs));
    }

    for (std::size_t i = 0; i < state.pes.size(); ++i) {
        const PeId id = state.pes[i].id;
        PeSummary pe;
        pe.pe_type = platform.type(id.type).name;
        pe.pe_index = id.index;
        pe.domain = platform.domain_name(platform.domain_of_type(id.type));
        pe.busy_time = state.energy[i].busy_time;
        pe.utilization = report.elapsed > 0 ? static_cast<double>(pe.busy_time) / static_cast<double>(report.elapsed) : 0.0;
        pe.energy = state.energy[i].energy;
        report.energy_total += pe.energy;
        report.pes.push_back(std::move(pe));
    }
    for (std::size_t d = 0; d < state.domains.size(); ++d) {
        report.domains.push_back({platform.domain_name(d), state.domains[d].peak_temperature,
                                  state.domains[d].thermal.temperature, state.domains[d].opp_index});
    }
    report.trace = state.trace;
    report.opp_log = state.opp_log;
    return report;
}

std::vector<Femtojoules> integrate_trace_energy(const Platform& platform,
                                                const std::vector<TraceRecord>& trace,
                                                const std::vector<OppChange>& opp_log, Nanos end_time) {
    struct Busy {
        Nanos start;
        Nanos finish;
        const Opp* opp;
    };
    std::vector<std::vector<Busy>> busy(platform.pe_count());
    for (const auto& rec : trace) {
        const auto type = platform.find_type(rec.pe_type);
        if (!type) throw ConfigError("trace names unknown PE type '" + rec.pe_type + "'");
        const std::size_t domain = platform.domain_of_type(*type);
        busy[platform.flat_index({*type, rec.pe_index})].push_back(
            {rec.t_start, std::min(rec.t_finish, end_time), &opp_by_freq(platform, domain, rec.freq)});
    }

    std::vector<std::vector<OppChange>> changes(platform.domain_count());
    for (const auto& change : opp_log) changes[change.domain].push_back(change);
    for (auto& list : changes) {
        std::stable_sort(list.begin(), list.end(),
                         [](const OppChange& a, const OppChange& b) { return a.time < b.time; });
    }

    std::vector<Femtojoules> energy(platform.pe_count(), 0);
    for (std::size_t flat = 0; flat < platform.pe_count(); ++flat) {
        const std::size_t domain = platform.domain_of_type(platform.pe_id(flat).type);
        const auto& domain_changes = changes[domain];
        auto& intervals = busy[flat];
        std::sort(intervals.begin(), intervals.end(), [](const Busy& a, const Busy& b) { return a.start < b.start; });

        std::vector<Nanos> cuts{0, end_time};
        for (const auto& c : domain_changes) {
            if (c.time > 0 && c.time < end_time) cuts.push_back(c.time);
        }
        for (const auto& b : intervals) {
            if (b.start < end_time) cuts.push_back(b.start);
            if (b.finish < end_time) cuts.push_back(b.finish);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

        std::size_t next_change = 0;
        std::size_t next_busy = 0;
        const Opp* domain_opp = nullptr;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const Nanos lo = cuts[k];
            const Nanos hi = cuts[k + 1];
            while (next_change < domain_changes.size() && domain_changes[next_change].time <= lo) {
                domain_opp = &platform.opps(domain)[domain_changes[next_change].opp_index];
                ++next_change;
            }
            if (domain_opp == nullptr) throw ConfigError("OPP log has no entry at t=0 for " + platform.domain_name(domain));
            while (next_busy < intervals.size() && intervals[next_busy].finish <= lo) ++next_busy;
            const bool running = next_busy < intervals.size() && intervals[next_busy].start <= lo;
            const Opp& opp = running ? *intervals[next_busy].opp : *domain_opp;
            energy[flat] += pe_power(running, opp) * (hi - lo);
        }
    }
    return energy;
}

SweepResult sweep(const Platform& platform, const BoundApp& app,
                  const std::vector<const Scheduler*>& schedulers, const SweepConfig& config) {
    if (config.seeds.empty()) throw ConfigError("sweep needs at least one seed");
    const std::size_t n_rates = config.rates_per_ms.size();
    const std::size_t n_seeds = config.seeds.size();

    // Common random numbers: one arrival sequence per (rate, seed), shared by
    // every scheduler.
    std::vector<std::vector<Nanos>> arrivals(n_rates * n_seeds);
    for (std::size_t r = 0; r < n_rates; ++r) {
        for (std::size_t s = 0; s < n_seeds; ++s) {
            ArrivalPlan plan{config.distribution, config.rates_per_ms[r], config.duration, config.seeds[s]};
            arrivals[r * n_seeds + s] = generate_arrivals(plan);
        }
    }

    struct Cell {
        std::optional<double> avg;
        double throughput = 0.0;
        double energy_mj = 0.0;
        std::exception_ptr error;
    };
    const std::size_t n_cells = schedulers.size() * n_rates * n_seeds;
    std::vector<Cell> cells(n_cells);
    RunOptions options = config.options;
    options.record_trace = false;

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n_cells; i = next++) {
            const std::size_t sched = i / (n_rates * n_seeds);
            const std::size_t rs = i % (n_rates * n_seeds);
            try {
                const auto report = run(platform, app, arrivals[rs], config.duration, *schedulers[sched],
                                        config.governor, options);
                cells[i].avg = report.avg_job_exec_time_us;
                cells[i].throughput = report.throughput_per_ms;
                cells[i].energy_mj = report.energy_total_mj();
            } catch (...) {
                cells[i].error = std::current_exception();
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(config.parallelism, static_cast<unsigned>(n_cells)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    for (std::size_t i = 0; i < n_cells; ++i) {
        if (!cells[i].error) continue;
        const std::size_t sched = i / (n_rates * n_seeds);
        const std::size_t r = (i % (n_rates * n_seeds)) / n_seeds;
        const std::size_t s = i % n_seeds;
        const std::string where = "sweep cell (scheduler=" + schedulers[sched]->name() +
                                  ", rate=" + format_double(config.rates_per_ms[r]) +
                                  ", seed=" + std::to_string(config.seeds[s]) + "): ";
        try {
            std::rethrow_exception(cells[i].error);
        } catch (const DeadlockError& e) {
            throw DeadlockError(where + e.what());
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        } catch (const std::exception& e) {
            throw Error(where + e.what());
        }
    }

    SweepResult result;
    for (std::size_t sched = 0; sched < schedulers.size(); ++sched) {
        for (std::size_t r = 0; r < n_rates; ++r) {
            SweepRow row;
            row.rate_per_ms = config.rates_per_ms[r];
            row.scheduler = schedulers[sched]->name();
            double avg_sum = 0.0;
            std::size_t avg_count = 0;
            for (std::size_t s = 0; s < n_seeds; ++s) {
                const auto& cell = cells[(sched * n_rates + r) * n_seeds + s];
                if (cell.avg) {
                    avg_sum += *cell.avg;
                    ++avg_count;
                }
                row.throughput_per_ms += cell.throughput;
                row.energy_mj += cell.energy_mj;
            }
            if (avg_count > 0) row.avg_exec_time_us = avg_sum / static_cast<double>(avg_count);
            row.throughput_per_ms /= static_cast<double>(n_seeds);
            row.energy_mj /= static_cast<double>(n_seeds);
            result.rows.push_back(std::move(row));
        }
    }
    std::stable_sort(result.rows.begin(), result.rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.scheduler != b.scheduler) return a.scheduler < b.scheduler;
        return a.rate_per_ms < b.rate_per_ms;
    });
    return result;
}

void write_trace_csv(const fs::path& path, const SimReport& report) {
    auto out = open_out(path);
    out << kTraceHeader << '\n';
    for (const auto& r : report.trace) {
        out << r.job_id << ',' << csv_field(r.task) << ',' << csv_field(r.pe_type) << ',' << r.pe_index << ','
            << format_us(r.t_ready) << ',' << format_us(r.t_start) << ',' << format_us(r.t_finish) << ','
            << r.freq << '\n';
    }
    close_out(out, path);
}

void write_opp_csv(const fs::path& path, const SimReport& report, const Platform& platform) {
    auto out = open_out(path);
    out << kOppHeader << '\n';
    for (const auto& c : report.opp_log) {
        out << format_us(c.time) << ',' << csv_field(platform.domain_name(c.domain)) << ',' << c.opp_index << ','
            << c.freq << '\n';
    }
    close_out(out, path);
}

void write_gantt_csv(const fs::path& path, const SimReport& report) {
    std::vector<const TraceRecord*> bars;
    for (const auto& r : report.trace) bars.push_back(&r);
    std::stable_sort(bars.begin(), bars.end(), [](const TraceRecord* a, const TraceRecord* b) {
        return std::tie(a->pe_type, a->pe_index, a->t_start) < std::tie(b->pe_type, b->pe_index, b->t_start);
    });
    auto out = open_out(path);
    out << kGanttHeader << '\n';
    for (const auto* r : bars) {
        out << csv_field(r->pe_type + ":" + std::to_string(r->pe_index)) << ',' << csv_field(r->pe_type) << ','
            << r->pe_index << ',' << r->job_id << ',' << csv_field(r->task) << ',' << format_us(r->t_start) << ','
            << format_us(r->t_finish) << '\n';
    }
    close_out(out, path);
}

void write_summary_json(const fs::path& path, const SimReport& report) {
    nlohmann::ordered_json j;
    j["app"] = report.app;
    j["scheduler"] = report.scheduler;
    j["governor"] = report.governor;
    j["synthetic_power_model"] = report.synthetic_power_model;
    j["jobs_injected"] = report.jobs_injected;
    j["jobs_completed"] = report.jobs_completed;
    j["in_flight"] = report.in_flight;
    j["avg_job_exec_time_us"] =
        report.avg_job_exec_time_us ? nlohmann::ordered_json(*report.avg_job_exec_time_us) : nlohmann::ordered_json();
    j["jobs_averaged"] = report.jobs_averaged;
    j["warmup_cutoff_us"] = ns_to_us(report.warmup_cutoff);
    j["elapsed_us"] = ns_to_us(report.elapsed);
    j["throughput_jobs_per_ms"] = report.throughput_per_ms;
    j["energy_total_mj"] = report.energy_total_mj();
    j["energy_total_fj"] = report.energy_total;
    auto& pes = j["pes"] = nlohmann::ordered_json::array();
    for (const auto& pe : report.pes) {
        pes.push_back({{"pe_type", pe.pe_type},
                       {"pe_index", pe.pe_index},
                       {"domain", pe.domain},
                       {"busy_us", ns_to_us(pe.busy_time)},
                       {"utilization", pe.utilization},
                       {"energy_mj", fj_to_mj(pe.energy)},
                       {"energy_fj", pe.energy}});
    }
    auto& domains = j["domains"] = nlohmann::ordered_json::array();
    for (const auto& d : report.domains) {
        domains.push_back({{"name", d.name},
                           {"peak_temperature_k", d.peak_temperature},
                           {"final_temperature_k", d.final_temperature},
                           {"final_opp_index", d.final_opp_index}});
    }
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    close_out(out, path);
}

void write_sweep_csv(const fs::path& path, const SweepResult& result) {
    auto out = open_out(path);
    out << kSweepHeader << '\n';
    for (const auto& row : result.rows) {
        out << format_double(row.rate_per_ms) << ',' << csv_field(row.scheduler) << ','
            << (row.avg_exec_time_us ? format_double(*row.avg_exec_time_us) : std::string()) << ','
            << format_double(row.throughput_per_ms) << ',' << format_double(row.energy_mj) << '\n';
    }
    close_out(out, path);
}

std::vector<TraceRecord> read_trace_csv(const fs::path& path) {
    std::vector<TraceRecord> out;
    for (const auto& f : read_csv(path, kTraceHeader, 8)) {
        out.push_back(parse_field(path, [&] {
            return TraceRecord{std::stoull(f[0]), f[1],           f[2],           std::stoull(f[3]),
                               parse_us(f[4]),    parse_us(f[5]), parse_us(f[6]), std::stoll(f[7])};
        }));
    }
    return out;
}

std::vector<OppChange> read_opp_csv(const fs::path& path, const Platform& platform) {
    std::vector<OppChange> out;
    for (const auto& f : read_csv(path, kOppHeader, 4)) {
        std::optional<std::size_t> domain;
        for (std::size_t d = 0; d < platform.domain_count(); ++d) {
            if (platform.domain_name(d) == f[1]) domain = d;
        }
        if (!domain) throw IoError(path.string() + ": unknown domain '" + f[1] + "'");
        out.push_back(parse_field(path, [&] {
            return OppChange{parse_us(f[0]), *domain, std::stoull(f[2]), std::stoll(f[3])};
        }));
    }
    return out;
}

SweepResult read_sweep_csv(const fs::path& path) {
    SweepResult result;
    for (const auto& f : read_csv(path, kSweepHeader, 5)) {
        result.rows.push_back(parse_field(path, [&] {
            SweepRow row;
            row.rate_per_ms = parse_double(f[0]);
            row.scheduler = f[1];
            if (!f[2].empty()) row.avg_exec_time_us = parse_double(f[2]);
            row.throughput_per_ms = parse_double(f[3]);
            row.energy_mj = parse_double(f[4]);
            return row;
        }));
    }
    return result;
}

void write_outputs(const fs::path& dir, const SimReport& report, const Platform& platform) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    write_trace_csv(dir / "trace.csv", report);
    write_opp_csv(dir / "opp.csv", report, platform);
    write_gantt_csv(dir / "gantt.csv", report);
    write_summary_json(dir / "summary.json", report);
}

}  // namespace dssim
