#include "dssim/model.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <utility>

#include "dssim/errors.hpp"

namespace dssim {

namespace {

std::string join_violations(const std::vector<Violation>& violations) {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += "; ";
        out += to_string(v);
    }
    return out;
}

void check_opp_table(const std::string& domain, const std::vector<Opp>& opps,
                     std::vector<Violation>& out) {
    const std::string field = "opp_tables." + domain;
    if (opps.empty()) {
        out.push_back({field, "OPP table is empty"});
        return;
    }
    for (std::size_t i = 0; i < opps.size(); ++i) {
        const auto& opp = opps[i];
        const std::string at = field + "[" + std::to_string(i) + "]";
        if (opp.freq <= 0) out.push_back({at + ".freq_mhz", "frequency must be > 0"});
        if (opp.dyn_power < 0 || opp.static_power < 0) {
            out.push_back({at, "power values must be >= 0"});
        }
        if (i > 0) {
            const auto& prev = opps[i - 1];
            if (opp.freq <= prev.freq) {
                out.push_back({at + ".freq_mhz", "OPPs must be sorted by strictly ascending frequency"});
            }
            if (opp.dyn_power < prev.dyn_power || opp.static_power < prev.static_power) {
                out.push_back({at, "power must be non-decreasing along the OPP table"});
            }
        }
    }
}

}  // namespace

std::string_view to_string(PeKind kind) {
    return kind == PeKind::accelerator ? "accelerator" : "general-purpose";
}

PeKind parse_pe_kind(std::string_view text) {
    if (text == "general-purpose") return PeKind::general_purpose;
    if (text == "accelerator") return PeKind::accelerator;
    throw ConfigError("unknown PE kind '" + std::string(text) + "'");
}

std::optional<std::size_t> AppGraph::find_task(std::string_view task_name) const {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (tasks[i].name == task_name) return i;
    }
    return std::nullopt;
}

std::string to_string(const Violation& violation) {
    return violation.field + ": " + violation.message;
}

std::vector<Violation> validate_soc(const ResourceDb& db) {
    std::vector<Violation> out;
    if (db.pe_types.empty()) out.push_back({"pe_types", "SoC has no PE types"});

    std::set<std::string> names;
    for (std::size_t i = 0; i < db.pe_types.size(); ++i) {
        const auto& pe = db.pe_types[i];
        const std::string field = "pe_types[" + std::to_string(i) + "]";
        if (pe.name.empty()) out.push_back({field + ".name", "name must not be empty"});
        if (!names.insert(pe.name).second) {
            out.push_back({field + ".name", "duplicate PE type name '" + pe.name + "'"});
        }
        if (pe.count < 1) out.push_back({field + ".count", "count must be ≥ 1"});
        auto table = db.opp_tables.find(pe.freq_domain);
        if (table == db.opp_tables.end()) {
            out.push_back({field + ".freq_domain",
                           "frequency domain '" + pe.freq_domain + "' has no OPP table"});
        } else if (pe.kind == PeKind::accelerator && table->second.size() != 1) {
            out.push_back({field + ".freq_domain",
                           "accelerator domain '" + pe.freq_domain + "' must have exactly one OPP"});
        }
    }

    for (const auto& [domain, opps] : db.opp_tables) check_opp_table(domain, opps, out);

    for (const auto& [domain, freq] : db.ref_freq) {
        const std::string field = "ref_freq_mhz." + domain;
        if (!db.opp_tables.contains(domain)) {
            out.push_back({field, "unknown frequency domain '" + domain + "'"});
        }
        if (freq <= 0) out.push_back({field, "reference frequency must be > 0"});
    }

    // Accelerators are never rescaled, so a reference point that differs from
    // their only OPP would silently mislabel their latencies.
    for (const auto& pe : db.pe_types) {
        if (pe.kind != PeKind::accelerator) continue;
        auto table = db.opp_tables.find(pe.freq_domain);
        auto ref = db.ref_freq.find(pe.freq_domain);
        if (table != db.opp_tables.end() && table->second.size() == 1 && ref != db.ref_freq.end() &&
            ref->second != table->second.front().freq) {
            out.push_back({"ref_freq_mhz." + pe.freq_domain,
                           "accelerator reference frequency must equal its OPP frequency"});
        }
    }

    if (db.comm.latency < 0) out.push_back({"comm.latency_us", "latency must be ≥ 0"});
    if (!(db.comm.bandwidth_bytes_per_us > 0.0)) {
        out.push_back({"comm.bandwidth_bytes_per_us", "bandwidth must be > 0"});
    }
    return out;
}

std::vector<Violation> validate_app(const AppGraph& app, const ResourceDb& db) {
    std::vector<Violation> out;
    if (app.name.empty()) out.push_back({"name", "application name must not be empty"});
    if (app.tasks.empty()) out.push_back({"tasks", "application has no tasks"});

    std::set<std::string> known_types;
    for (const auto& pe : db.pe_types) {
        if (pe.count >= 1) known_types.insert(pe.name);
    }

    std::set<std::string> task_names;
    for (std::size_t i = 0; i < app.tasks.size(); ++i) {
        const auto& task = app.tasks[i];
        const std::string field = "tasks[" + std::to_string(i) + "]";
        if (!task_names.insert(task.name).second) {
            out.push_back({field + ".name", "duplicate task name '" + task.name + "'"});
        }
        if (task.latency_profile.empty()) {
            out.push_back({field + ".profile", "latency profile is empty"});
        }
        bool runnable = false;
        for (const auto& [type, latency] : task.latency_profile) {
            if (latency <= 0) {
                out.push_back({field + ".profile." + type, "latency must be > 0"});
            }
            if (known_types.contains(type)) {
                runnable = true;
            } else {
                out.push_back({field + ".profile." + type,
                               "PE type '" + type + "' is not present in the SoC"});
            }
        }
        if (!runnable && !task.latency_profile.empty()) {
            out.push_back({field, "unschedulable task '" + task.name +
                                      "': no PE type in the SoC supports it"});
        }
    }

    // Adjacency over the edges whose endpoints resolve.
    const std::size_t n = app.tasks.size();
    std::vector<std::vector<std::size_t>> succ(n);
    std::vector<std::size_t> indegree(n, 0);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    bool self_loop = false;
    for (std::size_t i = 0; i < app.edges.size(); ++i) {
        const auto& edge = app.edges[i];
        const std::string field = "edges[" + std::to_string(i) + "]";
        auto src = app.find_task(edge.src);
        auto dst = app.find_task(edge.dst);
        if (!src) out.push_back({field + ".src", "unknown task '" + edge.src + "'"});
        if (!dst) out.push_back({field + ".dst", "unknown task '" + edge.dst + "'"});
        if (edge.volume < 0) out.push_back({field + ".volume_bytes", "volume must be ≥ 0"});
        if (!src || !dst) continue;
        if (*src == *dst) {
            self_loop = true;
            continue;
        }
        if (!seen.insert({*src, *dst}).second) {
            out.push_back({field, "duplicate edge " + edge.src + " -> " + edge.dst});
            continue;
        }
        succ[*src].push_back(*dst);
        ++indegree[*dst];
    }

    // Kahn: anything left unvisited sits on a cycle.
    std::vector<std::size_t> stack;
    for (std::size_t t = 0; t < n; ++t) {
        if (indegree[t] == 0) stack.push_back(t);
    }
    std::size_t visited = 0;
    while (!stack.empty()) {
        auto t = stack.back();
        stack.pop_back();
        ++visited;
        for (auto s : succ[t]) {
            if (--indegree[s] == 0) stack.push_back(s);
        }
    }
    if (self_loop || visited != n) {
        out.push_back({"edges", "dependency graph contains a cycle"});
    }
    return out;
}

Nanos scale_latency(Nanos reference, PeKind kind, Mhz freq, Mhz ref_freq) {
    if (kind == PeKind::accelerator || freq == ref_freq) return reference;
    // ceil(reference * ref_freq / freq) in integers
    return (reference * ref_freq + freq - 1) / freq;
}

Nanos execution_time(const TaskDef& task, const PeType& pe_type, Mhz freq, Mhz ref_freq) {
    auto it = task.latency_profile.find(pe_type.name);
    if (it == task.latency_profile.end()) {
        throw UnsupportedTask("task '" + task.name + "' cannot run on PE type '" + pe_type.name + "'");
    }
    return scale_latency(it->second, pe_type.kind, freq, ref_freq);
}

Platform::Platform(ResourceDb db) : db_(std::move(db)) {
    if (auto violations = validate_soc(db_); !violations.empty()) {
        throw ConfigError("invalid SoC description: " + join_violations(violations));
    }
    for (std::size_t t = 0; t < db_.pe_types.size(); ++t) {
        const auto& pe = db_.pe_types[t];
        first_flat_.push_back(pe_ids_.size());
        for (int i = 0; i < pe.count; ++i) pe_ids_.push_back({t, static_cast<std::size_t>(i)});

        auto existing = std::find_if(domains_.begin(), domains_.end(),
                                     [&](const Domain& d) { return d.name == pe.freq_domain; });
        if (existing == domains_.end()) {
            Domain domain;
            domain.name = pe.freq_domain;
            domain.opps = db_.opp_tables.at(pe.freq_domain);
            auto ref = db_.ref_freq.find(pe.freq_domain);
            domain.ref_freq = ref != db_.ref_freq.end() ? ref->second : domain.opps.back().freq;
            domains_.push_back(std::move(domain));
            existing = std::prev(domains_.end());
        }
        existing->pe_count += pe.count;
        type_domain_.push_back(static_cast<std::size_t>(existing - domains_.begin()));
    }
}

std::optional<std::size_t> Platform::find_type(std::string_view name) const {
    for (std::size_t t = 0; t < db_.pe_types.size(); ++t) {
        if (db_.pe_types[t].name == name) return t;
    }
    return std::nullopt;
}

std::string Platform::label(PeId id) const {
    return type(id.type).name + ":" + std::to_string(id.index);
}

BoundApp::BoundApp(AppGraph app, const Platform& platform)
    : app_(std::move(app)), type_count_(platform.type_count()) {
    if (auto violations = validate_app(app_, platform.db()); !violations.empty()) {
        throw ConfigError("invalid application '" + app_.name + "': " + join_violations(violations));
    }
    const std::size_t n = app_.tasks.size();
    latency_.resize(n * type_count_);
    for (std::size_t t = 0; t < n; ++t) {
        for (const auto& [type, latency] : app_.tasks[t].latency_profile) {
            latency_[t * type_count_ + *platform.find_type(type)] = latency;
        }
    }

    preds_.resize(n);
    succs_.resize(n);
    for (const auto& edge : app_.edges) {
        auto src = *app_.find_task(edge.src);
        auto dst = *app_.find_task(edge.dst);
        succs_[src].push_back({dst, edge.volume});
        preds_[dst].push_back({src, edge.volume});
    }
    auto by_task = [](const Link& a, const Link& b) { return a.task < b.task; };
    for (auto& links : preds_) std::sort(links.begin(), links.end(), by_task);
    for (auto& links : succs_) std::sort(links.begin(), links.end(), by_task);

    // Topological order, smallest index first among the available tasks.
    std::vector<std::size_t> indegree(n);
    std::set<std::size_t> frontier;
    for (std::size_t t = 0; t < n; ++t) {
        indegree[t] = preds_[t].size();
        if (indegree[t] == 0) {
            frontier.insert(t);
            sources_.push_back(t);
        }
    }
    while (!frontier.empty()) {
        auto t = *frontier.begin();
        frontier.erase(frontier.begin());
        topo_.push_back(t);
        for (const auto& link : succs_[t]) {
            if (--indegree[link.task] == 0) frontier.insert(link.task);
        }
    }
}

}  // namespace dssim
