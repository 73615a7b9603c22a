#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dssim/kernel.hpp"
#include "dssim/model.hpp"

namespace dssim {

struct Assignment {
    TaskRef task;
    PeId pe;
};

// Plug-in point. Called at every decision epoch with the ready list in
// arrival-of-readiness order. May place any subset of the ready tasks, but
// only on idle PEs, one task per PE and each task at most once.
class Scheduler {
public:
    virtual ~Scheduler() = default;
    virtual std::string name() const = 0;
    virtual std::vector<Assignment> schedule(std::span<const TaskRef> ready,
                                             const SimState& view) const = 0;
};

// Fastest PE type by reference latency only; waits if every instance of
// that type is busy.
std::vector<Assignment> met_schedule(std::span<const TaskRef> ready, const SimState& view);

// Repeatedly commits the (task, idle PE) pair with the earliest start time,
// breaking ties by execution time, PE index, then ready-list position.
std::vector<Assignment> etf_schedule(std::span<const TaskRef> ready, const SimState& view);

enum class TableMode { instance, type_rr };

std::string_view to_string(TableMode mode);
TableMode parse_table_mode(std::string_view text);

// Offline task -> PE mapping. In instance mode each entry names "Type:index";
// in type_rr mode it names a type and the instance is picked at run time.
struct StaticTable {
    std::string app;
    TableMode mode = TableMode::type_rr;
    std::map<std::string, std::string> entries;
    std::vector<std::string> priority;
};

std::vector<Violation> validate_table(const StaticTable& table, const BoundApp& app,
                                      const Platform& platform);

class MetScheduler final : public Scheduler {
public:
    std::string name() const override { return "met"; }
    std::vector<Assignment> schedule(std::span<const TaskRef> ready,
                                     const SimState& view) const override {
        return met_schedule(ready, view);
    }
};

class EtfScheduler final : public Scheduler {
public:
    std::string name() const override { return "etf"; }
    std::vector<Assignment> schedule(std::span<const TaskRef> ready,
                                     const SimState& view) const override {
        return etf_schedule(ready, view);
    }
};

class TableScheduler;

// Ready tasks in priority order (ready-list order when no priority is set)
// go to their mapped PE if it is idle and are deferred otherwise. Throws
// MissingTableEntry for an unmapped task.
std::vector<Assignment> table_schedule(std::span<const TaskRef> ready, const SimState& view,
                                       const TableScheduler& table);

class TableScheduler final : public Scheduler {
public:
    // Resolves entries against the platform; throws ConfigError for PE
    // references that do not exist. Coverage of the app is checked lazily:
    // an unmapped ready task raises MissingTableEntry at schedule time.
    TableScheduler(StaticTable table, const BoundApp& app, const Platform& platform);

    std::string name() const override { return "table"; }
    std::vector<Assignment> schedule(std::span<const TaskRef> ready,
                                     const SimState& view) const override;

    const StaticTable& table() const { return table_; }

private:
    friend std::vector<Assignment> table_schedule(std::span<const TaskRef> ready, const SimState& view,
                                                  const TableScheduler& table);

    struct Target {
        std::size_t type = 0;
        std::optional<std::size_t> instance;
    };

    StaticTable table_;
    std::vector<std::optional<Target>> targets_;  // by task index
    std::vector<std::size_t> rank_;               // priority position by task index
};

// "met", "etf" or "table" (the latter needs a table).
std::unique_ptr<Scheduler> make_scheduler(std::string_view name, const BoundApp& app,
                                          const Platform& platform,
                                          const std::optional<StaticTable>& table = std::nullopt);

}  // namespace dssim
