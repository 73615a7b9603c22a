#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dssim/power.hpp"
#include "dssim/units.hpp"

namespace dssim {

enum class PeKind { general_purpose, accelerator };

std::string_view to_string(PeKind kind);
PeKind parse_pe_kind(std::string_view text);

struct PeType {
    std::string name;
    PeKind kind = PeKind::general_purpose;
    int count = 1;
    std::string freq_domain;
};

// Analytical interconnect: fixed setup cost plus volume over bandwidth.
struct CommParams {
    Nanos latency = 0;
    double bandwidth_bytes_per_us = 1000.0;
};

struct ResourceDb {
    std::vector<PeType> pe_types;
    CommParams comm;
    std::map<std::string, std::vector<Opp>> opp_tables;
    // Frequency at which task latency profiles were measured. Domains not
    // listed default to their highest OPP.
    std::map<std::string, Mhz> ref_freq;
};

struct PeId {
    std::size_t type = 0;
    std::size_t index = 0;

    friend auto operator<=>(const PeId&, const PeId&) = default;
};

struct TaskDef {
    std::string name;
    // PE type name -> latency at the domain reference frequency. A missing
    // entry means the task cannot run on that type.
    std::map<std::string, Nanos> latency_profile;
};

struct Edge {
    std::string src;
    std::string dst;
    Bytes volume = 0;
};

struct AppGraph {
    std::string name;
    std::vector<TaskDef> tasks;
    std::vector<Edge> edges;

    std::optional<std::size_t> find_task(std::string_view task_name) const;
};

struct Violation {
    std::string field;
    std::string message;
};

std::string to_string(const Violation& violation);

std::vector<Violation> validate_soc(const ResourceDb& db);
std::vector<Violation> validate_app(const AppGraph& app, const ResourceDb& db);

// Latency of `task` on `pe_type` at `freq`. General-purpose cores scale as
// 1/f from the reference point (rounded up to the ns); accelerators ignore
// frequency. Throws UnsupportedTask when the profile has no entry.
Nanos execution_time(const TaskDef& task, const PeType& pe_type, Mhz freq, Mhz ref_freq);

// Same rule on an already-resolved reference latency.
Nanos scale_latency(Nanos reference, PeKind kind, Mhz freq, Mhz ref_freq);

// Validated, index-resolved SoC. Immutable once built.
class Platform {
public:
    // Throws ConfigError listing every violation.
    explicit Platform(ResourceDb db);

    const ResourceDb& db() const { return db_; }

    std::size_t type_count() const { return db_.pe_types.size(); }
    const PeType& type(std::size_t type_index) const { return db_.pe_types[type_index]; }
    std::optional<std::size_t> find_type(std::string_view name) const;

    std::size_t pe_count() const { return pe_ids_.size(); }
    PeId pe_id(std::size_t flat) const { return pe_ids_[flat]; }
    std::size_t flat_index(PeId id) const { return first_flat_[id.type] + id.index; }
    std::size_t first_flat(std::size_t type_index) const { return first_flat_[type_index]; }

    std::size_t domain_count() const { return domains_.size(); }
    std::size_t domain_of_type(std::size_t type_index) const { return type_domain_[type_index]; }
    const std::string& domain_name(std::size_t domain) const { return domains_[domain].name; }
    std::span<const Opp> opps(std::size_t domain) const { return domains_[domain].opps; }
    Mhz ref_freq(std::size_t domain) const { return domains_[domain].ref_freq; }
    // Number of PE instances clocked by the domain.
    int domain_pe_count(std::size_t domain) const { return domains_[domain].pe_count; }

    std::string label(PeId id) const;

private:
    struct Domain {
        std::string name;
        std::vector<Opp> opps;
        Mhz ref_freq = 0;
        int pe_count = 0;
    };

    ResourceDb db_;
    std::vector<PeId> pe_ids_;
    std::vector<std::size_t> first_flat_;
    std::vector<std::size_t> type_domain_;
    std::vector<Domain> domains_;
};

// Validated application bound to a platform: latency lookups by type index
// and adjacency by task index.
class BoundApp {
public:
    struct Link {
        std::size_t task = 0;
        Bytes volume = 0;
    };

    // Throws ConfigError listing every violation.
    BoundApp(AppGraph app, const Platform& platform);

    const AppGraph& graph() const { return app_; }
    const std::string& name() const { return app_.name; }
    std::size_t task_count() const { return app_.tasks.size(); }
    const TaskDef& task(std::size_t index) const { return app_.tasks[index]; }

    std::optional<Nanos> ref_latency(std::size_t task, std::size_t type_index) const {
        return latency_[task * type_count_ + type_index];
    }
    bool supports(std::size_t task, std::size_t type_index) const {
        return ref_latency(task, type_index).has_value();
    }

    std::span<const Link> preds(std::size_t task) const { return preds_[task]; }
    std::span<const Link> succs(std::size_t task) const { return succs_[task]; }
    std::span<const std::size_t> sources() const { return sources_; }
    std::span<const std::size_t> topo_order() const { return topo_; }

private:
    AppGraph app_;
    std::size_t type_count_ = 0;
    std::vector<std::optional<Nanos>> latency_;
    std::vector<std::vector<Link>> preds_;
    std::vector<std::vector<Link>> succs_;
    std::vector<std::size_t> sources_;
    std::vector<std::size_t> topo_;
};

}  // namespace dssim
