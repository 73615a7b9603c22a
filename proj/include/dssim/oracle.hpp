#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dssim/model.hpp"
#include "dssim/sched.hpp"

namespace dssim {

inline constexpr std::size_t kOracleMaxTasks = 12;

struct OracleResult {
    StaticTable table;
    Nanos makespan = 0;
    std::uint64_t explored = 0;
};

// Shortest makespan of one job on an idle SoC, at the top OPP, when every
// task is pinned to the PE type in `type_of_task`. Searches every schedule an
// instance table with a priority list can reproduce in the kernel.
Nanos evaluate_assignment(const BoundApp& app, const Platform& platform,
                          std::span<const std::size_t> type_of_task);

// Tries every task -> PE type assignment and keeps the lexicographically
// smallest one with minimum makespan. The table is a type_rr table when that
// replays to the same makespan, else an instance table with a priority list.
// Throws OracleTooLarge above kOracleMaxTasks tasks.
OracleResult optimal_single_job(const BoundApp& app, const Platform& platform);

// Replays the table through the simulation kernel on a single job and
// checks that it lands on exactly the claimed makespan.
bool verify_table(const OracleResult& result, const BoundApp& app, const Platform& platform);

}  // namespace dssim
