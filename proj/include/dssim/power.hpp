#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "dssim/units.hpp"

namespace dssim {

// Operating performance point of a frequency domain.
struct Opp {
    Mhz freq = 0;
    double voltage = 0.0;
    MicroWatts dyn_power = 0;     // extra draw while executing a task
    MicroWatts static_power = 0;  // draw whether busy or idle
};

enum class GovernorPolicy { performance, powersave, ondemand };

std::string_view to_string(GovernorPolicy policy);
GovernorPolicy parse_governor_policy(std::string_view text);

struct GovernorConfig {
    GovernorPolicy policy = GovernorPolicy::performance;
    Nanos period = us_to_ns(std::int64_t{100});
    double up_threshold = 0.8;
    double down_threshold = 0.3;
};

// Empty string when the config is usable, otherwise a description of the
// first broken invariant.
std::string check_governor(const GovernorConfig& config);

// OPP index a domain starts at. ondemand boots at the lowest point and has
// to earn its way up.
std::size_t initial_opp_index(GovernorPolicy policy, std::size_t opp_count);

MicroWatts pe_power(bool busy, const Opp& opp);

// Power-relevant state of one PE over an interval with fixed OPPs. A PE can
// switch from idle to busy inside an interval when its task waits on an
// input transfer, so the busy window is clipped rather than assumed.
struct PeEnergyState {
    const Opp* idle_opp = nullptr;  // domain OPP currently in force
    const Opp* busy_opp = nullptr;  // OPP the running task was dispatched at
    Nanos exec_start = 0;           // [exec_start, exec_finish) is execution
    Nanos exec_finish = 0;
    Femtojoules energy = 0;
    Nanos busy_time = 0;
};

Nanos busy_overlap(const PeEnergyState& pe, Nanos from, Nanos to);

// Adds the energy drawn over [from, to) to every PE. Returns the total added.
Femtojoules accumulate_energy(std::span<PeEnergyState> pes, Nanos from, Nanos to);

// New OPP index for a domain after observing `utilization` over one period.
std::size_t governor_tick(const GovernorConfig& config, double utilization, std::size_t current,
                          std::size_t opp_count);

// First-order lumped RC node.
struct ThermalNode {
    double resistance = 2.0;    // K/W
    double capacitance = 0.01;  // J/K
    double ambient = 300.0;     // K
    double temperature = 300.0; // K

    double time_constant_s() const { return resistance * capacitance; }
};

// One explicit Euler step. Caller keeps dt within a tenth of R·C;
// thermal_advance does the subdividing.
double thermal_step(const ThermalNode& node, double power_w, Nanos dt);

// Advances the node over an arbitrary dt in stable sub-steps; returns the
// highest temperature seen.
double thermal_advance(ThermalNode& node, double power_w, Nanos dt);

}  // namespace dssim
