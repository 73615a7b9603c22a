#include "dssim/sched.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <set>
#include <tuple>

#include "dssim/errors.hpp"

namespace dssim {

namespace {

struct PeRef {
    std::optional<std::size_t> type;
    std::optional<std::size_t> instance;
    std::string error;
};

PeRef parse_pe_ref(const std::string& text, TableMode mode, const Platform& platform) {
    PeRef out;
    std::string type_name = text;
    if (mode == TableMode::instance) {
        const auto colon = text.rfind(':');
        if (colon == std::string::npos) {
            out.error = "instance-mode entry '" + text + "' must look like Type:index";
            return out;
        }
        type_name = text.substr(0, colon);
        std::size_t index = 0;
        const char* first = text.data() + colon + 1;
        const char* last = text.data() + text.size();
        auto [end, ec] = std::from_chars(first, last, index);
        if (ec != std::errc{} || end != last || first == last) {
            out.error = "bad instance index in '" + text + "'";
            return out;
        }
        out.instance = index;
    }
    out.type = platform.find_type(type_name);
    if (!out.type) {
        out.error = "unknown PE type '" + type_name + "'";
    } else if (out.instance && *out.instance >= static_cast<std::size_t>(platform.type(*out.type).count)) {
        out.error = "PE instance '" + text + "' out of range";
    }
    return out;
}

}  // namespace

std::vector<Assignment> met_schedule(std::span<const TaskRef> ready, const SimState& view) {
    const auto& platform = *view.platform;
    const auto& app = *view.app;
    std::vector<bool> taken(platform.pe_count(), false);
    std::size_t idle = 0;
    for (const auto& pe : view.pes) idle += pe.busy ? 0 : 1;

    std::vector<Assignment> out;
    for (const auto& ref : ready) {
        if (idle == 0) break;
        std::optional<std::size_t> best;
        Nanos best_latency = 0;
        for (std::size_t type = 0; type < platform.type_count(); ++type) {
            const auto latency = app.ref_latency(ref.task, type);
            if (latency && (!best || *latency < best_latency)) {
                best = type;
                best_latency = *latency;
            }
        }
        if (!best) continue;
        const std::size_t first = platform.first_flat(*best);
        for (int i = 0; i < platform.type(*best).count; ++i) {
            const std::size_t flat = first + static_cast<std::size_t>(i);
            if (view.pes[flat].busy || taken[flat]) continue;
            taken[flat] = true;
            --idle;
            out.push_back({ref, view.pes[flat].id});
            break;
        }
    }
    return out;
}

std::vector<Assignment> etf_schedule(std::span<const TaskRef> ready, const SimState& view) {
    const auto& app = *view.app;
    std::vector<std::size_t> idle;
    for (std::size_t flat = 0; flat < view.pes.size(); ++flat) {
        if (!view.pes[flat].busy) idle.push_back(flat);
    }
    if (idle.empty() || ready.empty()) return {};

    struct Candidate {
        Nanos est;
        Nanos exec;
        std::size_t flat;
        std::size_t position;
        auto key() const { return std::tie(est, exec, flat, position); }
    };
    std::vector<Candidate> candidates;
    candidates.reserve(ready.size() * idle.size());
    for (std::size_t r = 0; r < ready.size(); ++r) {
        for (std::size_t flat : idle) {
            const PeId pe = view.pes[flat].id;
            if (!app.supports(ready[r].task, pe.type)) continue;
            candidates.push_back({view.earliest_start(ready[r], pe), view.exec_time(ready[r], pe), flat, r});
        }
    }

    std::vector<bool> task_used(ready.size(), false);
    std::vector<bool> pe_used(view.pes.size(), false);
    std::vector<Assignment> out;
    while (true) {
        const Candidate* best = nullptr;
        for (const auto& c : candidates) {
            if (task_used[c.position] || pe_used[c.flat]) continue;
            if (best == nullptr || c.key() < best->key()) best = &c;
        }
        if (best == nullptr) break;
        task_used[best->position] = true;
        pe_used[best->flat] = true;
        out.push_back({ready[best->position], view.pes[best->flat].id});
    }
    return out;
}

std::string_view to_string(TableMode mode) {
    return mode == TableMode::instance ? "instance" : "type_rr";
}

TableMode parse_table_mode(std::string_view text) {
    if (text == "instance") return TableMode::instance;
    if (text == "type_rr") return TableMode::type_rr;
    throw ConfigError("unknown table mode '" + std::string(text) + "'");
}

std::vector<Violation> validate_table(const StaticTable& table, const BoundApp& app,
                                      const Platform& platform) {
    std::vector<Violation> out;
    if (table.app != app.name()) {
        out.push_back({"app", "table is for '" + table.app + "', not '" + app.name() + "'"});
    }
    for (const auto& [task_name, pe_ref] : table.entries) {
        const std::string field = "entries." + task_name;
        const auto task = app.graph().find_task(task_name);
        if (!task) {
            out.push_back({field, "no task named '" + task_name + "' in the app"});
            continue;
        }
        const auto ref = parse_pe_ref(pe_ref, table.mode, platform);
        if (!ref.error.empty()) {
            out.push_back({field, ref.error});
        } else if (!app.supports(*task, *ref.type)) {
            out.push_back({field, "PE type '" + platform.type(*ref.type).name + "' does not support '" +
                                      task_name + "'"});
        }
    }
    for (std::size_t t = 0; t < app.task_count(); ++t) {
        if (!table.entries.contains(app.task(t).name)) {
            out.push_back({"entries", "task '" + app.task(t).name + "' has no table entry"});
        }
    }
    std::set<std::string> seen;
    for (const auto& name : table.priority) {
        if (!app.graph().find_task(name)) out.push_back({"priority", "unknown task '" + name + "'"});
        if (!seen.insert(name).second) out.push_back({"priority", "task '" + name + "' listed twice"});
    }
    return out;
}

TableScheduler::TableScheduler(StaticTable table, const BoundApp& app, const Platform& platform)
    : table_(std::move(table)), targets_(app.task_count()), rank_(app.task_count(), app.task_count()) {
    for (const auto& [task_name, pe_ref] : table_.entries) {
        const auto task = app.graph().find_task(task_name);
        if (!task) throw ConfigError("static table names unknown task '" + task_name + "'");
        const auto ref = parse_pe_ref(pe_ref, table_.mode, platform);
        if (!ref.error.empty()) throw ConfigError("static table entry '" + task_name + "': " + ref.error);
        targets_[*task] = Target{*ref.type, ref.instance};
    }
    for (std::size_t i = 0; i < table_.priority.size(); ++i) {
        if (auto task = app.graph().find_task(table_.priority[i])) rank_[*task] = std::min(rank_[*task], i);
    }
}

std::vector<Assignment> TableScheduler::schedule(std::span<const TaskRef> ready,
                                                 const SimState& view) const {
    return table_schedule(ready, view, *this);
}

std::vector<Assignment> table_schedule(std::span<const TaskRef> ready, const SimState& view,
                                       const TableScheduler& table) {
    const auto& platform = *view.platform;
    std::vector<std::size_t> order(ready.size());
    std::iota(order.begin(), order.end(), 0);
    if (!table.table_.priority.empty()) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return table.rank_[ready[a].task] < table.rank_[ready[b].task];
        });
    }

    std::vector<bool> taken(platform.pe_count(), false);
    std::vector<Assignment> out;
    for (std::size_t position : order) {
        const TaskRef ref = ready[position];
        const auto& target = table.targets_[ref.task];
        if (!target) {
            throw MissingTableEntry("static table has no entry for task '" + view.app->task(ref.task).name + "'");
        }
        if (target->instance) {
            const PeId pe{target->type, *target->instance};
            const std::size_t flat = platform.flat_index(pe);
            if (!view.pes[flat].busy && !taken[flat]) {
                taken[flat] = true;
                out.push_back({ref, pe});
            }
            continue;
        }
        // Idle instance with the earliest data-ready start; ties go round-robin
        // from job_id so consecutive jobs spread over the instances.
        const auto count = static_cast<std::size_t>(platform.type(target->type).count);
        const std::size_t start = static_cast<std::size_t>(ref.job_id % count);
        std::optional<PeId> best;
        Nanos best_est = 0;
        for (std::size_t k = 0; k < count; ++k) {
            const PeId pe{target->type, (start + k) % count};
            const std::size_t flat = platform.flat_index(pe);
            if (view.pes[flat].busy || taken[flat]) continue;
            const Nanos est = view.earliest_start(ref, pe);
            if (!best || est < best_est) {
                best = pe;
                best_est = est;
            }
        }
        if (best) {
            taken[platform.flat_index(*best)] = true;
            out.push_back({ref, *best});
        }
    }
    return out;
}

std::unique_ptr<Scheduler> make_scheduler(std::string_view name, const BoundApp& app,
                                          const Platform& platform, const std::optional<StaticTable>& table) {
    if (name == "met") return std::make_unique<MetScheduler>();
    if (name == "etf") return std::make_unique<EtfScheduler>();
    if (name == "table") {
        if (!table) throw ConfigError("the table scheduler needs a static table (--table)");
        return std::make_unique<TableScheduler>(*table, app, platform);
    }
    throw ConfigError("unknown scheduler '" + std::string(name) + "' (expected met, etf or table)");
}

}  // namespace dssim
