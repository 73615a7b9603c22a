#include "dssim/oracle.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>

#include "dssim/errors.hpp"

namespace dssim {

namespace {

constexpr Nanos kNoBound = std::numeric_limits<Nanos>::max();

// A single-job schedule a table can reproduce: where each task ran and when
// it was dispatched.
struct Placement {
    Nanos makespan = kNoBound;
    std::vector<PeId> pe;
    std::vector<Nanos> dispatched;
};

// Depth-first search over every schedule that an instance-mode table with a
// priority list can produce, with all tasks pinned to the given types.
//
// Such a table dispatches a ready task the first time its PE is idle and no
// earlier-listed task wants it. So at each epoch any set of (ready task, idle
// PE) pairs may start, but a task left waiting while some PE of its type sat
// idle can never use that PE later. That rule is tracked in `banned`.
class ScheduleSearch {
public:
    ScheduleSearch(const BoundApp& app, const Platform& platform, std::span<const std::size_t> types,
                   Nanos bound)
        : app_(app), platform_(platform), types_(types), n_(app.task_count()) {
        best_.makespan = bound;
        exec_.resize(n_);
        for (std::size_t t = 0; t < n_; ++t) {
            const std::size_t type = types_[t];
            const std::size_t domain = platform_.domain_of_type(type);
            // Evaluated at the top OPP, which is what the performance governor
            // replays the table at.
            exec_[t] = scale_latency(*app_.ref_latency(t, type), platform_.type(type).kind,
                                     platform_.opps(domain).back().freq, platform_.ref_freq(domain));
        }
        pending_.resize(n_);
        for (std::size_t t = 0; t < n_; ++t) pending_[t] = app_.preds(t).size();
        finish_.assign(n_, 0);
        placed_.assign(n_, PeId{});
        dispatched_.assign(n_, 0);
        done_.assign(n_, false);
        started_.assign(n_, false);
        banned_.resize(n_);
        for (std::size_t t = 0; t < n_; ++t) banned_[t].assign(platform_.type(types_[t]).count, false);
        busy_until_.assign(platform_.pe_count(), -1);
        ready_.assign(app_.sources().begin(), app_.sources().end());
    }

    std::optional<Placement> run() {
        epoch(0);
        if (!found_) return std::nullopt;
        return best_;
    }

private:
    bool idle(std::size_t flat) const { return busy_until_[flat] < 0; }

    // Finish-time bound that ignores contention and transfers.
    Nanos lower_bound(Nanos clock) const {
        Nanos bound = clock;
        std::vector<Nanos> lb(n_, 0);
        for (std::size_t t : app_.topo_order()) {
            if (done_[t] || busy_task(t)) {
                lb[t] = finish_[t];
            } else {
                Nanos est = clock;
                for (const auto& link : app_.preds(t)) est = std::max(est, lb[link.task]);
                lb[t] = est + exec_[t];
            }
            bound = std::max(bound, lb[t]);
        }
        // Work still owed to each type, spread perfectly over its instances.
        std::vector<Nanos> work(platform_.type_count(), 0);
        for (std::size_t t = 0; t < n_; ++t) {
            if (!done_[t] && !busy_task(t)) work[types_[t]] += exec_[t];
        }
        for (std::size_t type = 0; type < work.size(); ++type) {
            if (work[type] == 0) continue;
            const auto count = static_cast<Nanos>(platform_.type(type).count);
            const std::size_t first = platform_.first_flat(type);
            for (Nanos k = 0; k < count; ++k) {
                work[type] += std::max<Nanos>(0, busy_until_[first + static_cast<std::size_t>(k)] - clock);
            }
            bound = std::max(bound, clock + (work[type] + count - 1) / count);
        }
        return bound;
    }

    bool busy_task(std::size_t t) const { return started_[t]; }

    void epoch(Nanos clock) {
        if (lower_bound(clock) >= best_.makespan) return;
        std::vector<std::size_t> chosen(ready_.size(), kSkip);
        choose(clock, 0, chosen);
    }

    static constexpr std::size_t kSkip = std::numeric_limits<std::size_t>::max();

    // Picks a PE (or none) for ready_[i], then recurses on the next task.
    void choose(Nanos clock, std::size_t i, std::vector<std::size_t>& chosen) {
        if (i == ready_.size()) {
            commit(clock, chosen);
            return;
        }
        const std::size_t t = ready_[i];
        const std::size_t type = types_[t];
        const std::size_t first = platform_.first_flat(type);
        std::vector<std::size_t> tried;
        for (int k = 0; k < platform_.type(type).count; ++k) {
            const std::size_t flat = first + static_cast<std::size_t>(k);
            if (!idle(flat) || banned_[t][static_cast<std::size_t>(k)]) continue;
            if (std::find(chosen.begin(), chosen.begin() + static_cast<std::ptrdiff_t>(i), flat) !=
                chosen.begin() + static_cast<std::ptrdiff_t>(i)) {
                continue;
            }
            if (std::any_of(tried.begin(), tried.end(),
                            [&](std::size_t other) { return interchangeable(other, flat); })) {
                continue;
            }
            tried.push_back(flat);
            chosen[i] = flat;
            choose(clock, i + 1, chosen);
        }
        chosen[i] = kSkip;
        choose(clock, i + 1, chosen);
    }

    // Two idle PEs of one type are interchangeable when nothing still pending
    // depends on what ran on them and no ready task treats them differently.
    bool interchangeable(std::size_t a, std::size_t b) const {
        const PeId pa = platform_.pe_id(a);
        const PeId pb = platform_.pe_id(b);
        for (std::size_t t = 0; t < n_; ++t) {
            if (!done_[t] && !busy_task(t)) continue;
            if (placed_[t] != pa && placed_[t] != pb) continue;
            for (const auto& link : app_.succs(t)) {
                if (!done_[link.task]) return false;
            }
        }
        for (std::size_t t : ready_) {
            if (types_[t] == pa.type && banned_[t][pa.index] != banned_[t][pb.index]) return false;
        }
        return true;
    }

    void commit(Nanos clock, const std::vector<std::size_t>& chosen) {
        // Waiting tasks lose every idle PE of their type that this epoch left
        // unused.
        std::vector<bool> used(platform_.pe_count(), false);
        for (std::size_t c : chosen) {
            if (c != kSkip) used[c] = true;
        }
        struct Undo {
            std::size_t task;
            std::size_t index;
        };
        std::vector<Undo> undo;
        bool any = false;
        for (std::size_t i = 0; i < ready_.size(); ++i) {
            const std::size_t t = ready_[i];
            if (chosen[i] != kSkip) {
                any = true;
                continue;
            }
            const std::size_t type = types_[t];
            const std::size_t first = platform_.first_flat(type);
            bool open = false;
            for (int k = 0; k < platform_.type(type).count; ++k) {
                const auto idx = static_cast<std::size_t>(k);
                if (idle(first + idx) && !used[first + idx] && !banned_[t][idx]) {
                    banned_[t][idx] = true;
                    undo.push_back({t, idx});
                }
                if (!banned_[t][idx]) open = true;
            }
            if (!open) {
                for (const auto& u : undo) banned_[u.task][u.index] = false;
                return;
            }
        }
        if (!any && running_.empty()) {
            for (const auto& u : undo) banned_[u.task][u.index] = false;
            return;
        }

        const auto saved_ready = ready_;
        std::vector<std::size_t> waiting;
        for (std::size_t i = 0; i < saved_ready.size(); ++i) {
            const std::size_t t = saved_ready[i];
            if (chosen[i] == kSkip) {
                waiting.push_back(t);
                continue;
            }
            const PeId pe = platform_.pe_id(chosen[i]);
            Nanos start = clock;
            for (const auto& link : app_.preds(t)) {
                start = std::max(start, finish_[link.task] +
                                            comm_latency(link.volume, placed_[link.task], pe, platform_.db().comm));
            }
            placed_[t] = pe;
            dispatched_[t] = clock;
            finish_[t] = start + exec_[t];
            busy_until_[chosen[i]] = finish_[t];
            started_[t] = true;
            running_.push_back(t);
        }

        advance(waiting);

        for (std::size_t i = 0; i < saved_ready.size(); ++i) {
            if (chosen[i] == kSkip) continue;
            const std::size_t t = saved_ready[i];
            busy_until_[chosen[i]] = -1;
            started_[t] = false;
            running_.erase(std::find(running_.begin(), running_.end(), t));
        }
        ready_ = saved_ready;
        for (const auto& u : undo) banned_[u.task][u.index] = false;
    }

    // Moves time to the next completion and opens the following epoch.
    void advance(const std::vector<std::size_t>& waiting) {
        if (running_.empty()) {
            if (waiting.empty()) record();
            return;
        }
        Nanos next = kNoBound;
        for (std::size_t t : running_) next = std::min(next, finish_[t]);
        std::vector<std::size_t> finished;
        for (std::size_t t : running_) {
            if (finish_[t] == next) finished.push_back(t);
        }
        std::sort(finished.begin(), finished.end());

        std::vector<std::size_t> released;
        for (std::size_t t : finished) {
            done_[t] = true;
            started_[t] = false;
            busy_until_[platform_.flat_index(placed_[t])] = -1;
            for (const auto& link : app_.succs(t)) {
                if (--pending_[link.task] == 0) released.push_back(link.task);
            }
        }
        std::erase_if(running_, [&](std::size_t t) { return finish_[t] == next; });

        ready_ = waiting;
        ready_.insert(ready_.end(), released.begin(), released.end());
        if (ready_.empty() && running_.empty()) {
            record();
        } else {
            epoch(next);
        }

        for (std::size_t t : released) banned_[t].assign(banned_[t].size(), false);
        for (std::size_t t : finished) {
            for (const auto& link : app_.succs(t)) ++pending_[link.task];
        }
        for (std::size_t t : finished) {
            done_[t] = false;
            started_[t] = true;
            busy_until_[platform_.flat_index(placed_[t])] = finish_[t];
            running_.push_back(t);
        }
    }

    void record() {
        Nanos makespan = 0;
        for (std::size_t t = 0; t < n_; ++t) makespan = std::max(makespan, finish_[t]);
        if (makespan >= best_.makespan) return;
        found_ = true;
        best_.makespan = makespan;
        best_.pe = placed_;
        best_.dispatched = dispatched_;
    }

    const BoundApp& app_;
    const Platform& platform_;
    std::span<const std::size_t> types_;
    std::size_t n_;
    std::vector<Nanos> exec_;
    std::vector<std::size_t> pending_;
    std::vector<Nanos> finish_;
    std::vector<PeId> placed_;
    std::vector<Nanos> dispatched_;
    std::vector<bool> done_;
    std::vector<bool> started_;  // dispatched and not yet finished
    std::vector<std::vector<bool>> banned_;  // by task, then instance of its type
    std::vector<Nanos> busy_until_;          // -1 when idle
    std::vector<std::size_t> ready_;
    std::vector<std::size_t> running_;
    Placement best_;
    bool found_ = false;
};

std::vector<std::vector<std::size_t>> type_choices(const BoundApp& app, const Platform& platform) {
    std::vector<std::vector<std::size_t>> choices(app.task_count());
    for (std::size_t t = 0; t < app.task_count(); ++t) {
        for (std::size_t type = 0; type < platform.type_count(); ++type) {
            if (app.supports(t, type)) choices[t].push_back(type);
        }
        if (choices[t].empty()) {
            throw UnsupportedTask("task '" + app.task(t).name + "' has no supporting PE type");
        }
    }
    return choices;
}

void check_size(const BoundApp& app) {
    const std::size_t n = app.task_count();
    if (n > kOracleMaxTasks) {
        throw OracleTooLarge("application too large for the exhaustive oracle: " + std::to_string(n) +
                             " tasks, limit " + std::to_string(kOracleMaxTasks));
    }
}

}  // namespace

Nanos evaluate_assignment(const BoundApp& app, const Platform& platform,
                          std::span<const std::size_t> type_of_task) {
    for (std::size_t t = 0; t < app.task_count(); ++t) {
        if (!app.supports(t, type_of_task[t])) {
            throw UnsupportedTask("task '" + app.task(t).name + "' is not supported by " +
                                  platform.type(type_of_task[t]).name);
        }
    }
    return ScheduleSearch(app, platform, type_of_task, kNoBound).run()->makespan;
}

OracleResult optimal_single_job(const BoundApp& app, const Platform& platform) {
    check_size(app);
    const std::size_t n = app.task_count();
    const auto choices = type_choices(app, platform);

    // Odometer over the choices with task 0 as the most significant digit.
    // Only strict improvements replace the incumbent, so the first minimum
    // found is the lexicographically smallest.
    std::uint64_t explored = 0;
    auto search = [&](Nanos bound) {
        std::vector<std::size_t> digit(n, 0);
        std::vector<std::size_t> assignment(n);
        Placement best;
        best.makespan = bound;
        explored = 0;
        while (true) {
            for (std::size_t t = 0; t < n; ++t) assignment[t] = choices[t][digit[t]];
            ++explored;
            if (auto found = ScheduleSearch(app, platform, assignment, best.makespan).run()) {
                best = std::move(*found);
            }
            bool wrapped = true;
            for (std::size_t pos = n; pos-- > 0;) {
                if (++digit[pos] < choices[pos].size()) {
                    wrapped = false;
                    break;
                }
                digit[pos] = 0;
            }
            if (wrapped) break;
        }
        return best;
    };
    // ETF's schedule is one a table can store, so it bounds the optimum and
    // lets the search prune from the start. The unbounded pass is only a
    // safety net.
    Placement best = search(single_job_makespan(platform, app, EtfScheduler{}) + 1);
    if (best.pe.empty()) best = search(kNoBound);

    OracleResult result;
    result.makespan = best.makespan;
    result.explored = explored;
    result.table.app = app.name();

    // A plain type table is easier to read; keep it when the kernel lands on
    // the same makespan with it.
    result.table.mode = TableMode::type_rr;
    for (std::size_t t = 0; t < n; ++t) result.table.entries[app.task(t).name] = platform.type(best.pe[t].type).name;
    if (verify_table(result, app, platform)) return result;

    result.table.mode = TableMode::instance;
    for (std::size_t t = 0; t < n; ++t) result.table.entries[app.task(t).name] = platform.label(best.pe[t]);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return best.dispatched[a] < best.dispatched[b]; });
    for (std::size_t t : order) result.table.priority.push_back(app.task(t).name);
    return result;
}

bool verify_table(const OracleResult& result, const BoundApp& app, const Platform& platform) {
    try {
        const TableScheduler scheduler(result.table, app, platform);
        return single_job_makespan(platform, app, scheduler, GovernorConfig{}) == result.makespan;
    } catch (const Error&) {
        return false;
    }
}

}  // namespace dssim
