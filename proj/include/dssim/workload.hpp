#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "dssim/model.hpp"
#include "dssim/units.hpp"

namespace dssim {

// Default data volume on every WiFi-TX edge. Zero keeps communication cost
// opt-in since no volumes are published for the benchmark.
inline constexpr Bytes kDefaultEdgeVolume = 0;

// Six-stage WiFi transmitter as a linear chain, latencies in µs at the
// reference frequency:
//
//   task               Scrambler-Acc  FFT-Acc  Cortex-A7  Cortex-A15
//   Scrambler-Encoder        8           -        22         10
//   Interleaver              -           -        10          4
//   QPSK-Modulation          -           -        15          8
//   Pilot-Insertion          -           -         5          3
//   Inverse-FFT              -          16       296        118
//   CRC                      -           -         5          3
AppGraph builtin_wifi_tx(Bytes edge_volume = kDefaultEdgeVolume);

// 4x Cortex-A15, 4x Cortex-A7, 2x scrambler-encoder accelerators and 4x FFT
// accelerators, zero-cost interconnect, synthetic OPP tables.
ResourceDb table2_soc();

enum class ArrivalDistribution { exponential, deterministic };

std::string_view to_string(ArrivalDistribution distribution);
ArrivalDistribution parse_distribution(std::string_view text);

struct ArrivalPlan {
    ArrivalDistribution distribution = ArrivalDistribution::exponential;
    double rate_per_ms = 1.0;
    Nanos duration = kNsPerMs;
    std::uint64_t seed = 1;
};

// Throws ConfigError when rate or duration is not positive.
void check_plan(const ArrivalPlan& plan);

// Strictly increasing arrival times in [0, duration). Deterministic plans
// start at 0 and space jobs exactly 1/rate apart; exponential plans are a
// Poisson process started at 0, so the first job lands one gap in.
std::vector<Nanos> generate_arrivals(const ArrivalPlan& plan);

enum class TaskState { blocked, ready, running, finished };

std::string_view to_string(TaskState state);

struct TaskInstance {
    std::size_t task = 0;  // index into the bound app
    std::uint64_t job_id = 0;
    TaskState state = TaskState::blocked;
    std::optional<PeId> assigned_pe;
    std::optional<Nanos> t_ready;
    std::optional<Nanos> t_start;
    std::optional<Nanos> t_finish;
    Mhz freq = 0;  // frequency the task was dispatched at
    std::size_t pending_preds = 0;
};

struct JobInstance {
    std::uint64_t job_id = 0;
    Nanos t_arrive = 0;
    std::optional<Nanos> t_complete;
    std::vector<TaskInstance> tasks;
    std::size_t unfinished = 0;
};

// Sources come out ready at t_arrive, everything else blocked.
JobInstance instantiate_job(const BoundApp& app, std::uint64_t job_id, Nanos t_arrive);

}  // namespace dssim
