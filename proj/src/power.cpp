#include "dssim/power.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dssim/errors.hpp"

namespace dssim {

std::string_view to_string(GovernorPolicy policy) {
    switch (policy) {
        case GovernorPolicy::performance: return "performance";
        case GovernorPolicy::powersave: return "powersave";
        case GovernorPolicy::ondemand: return "ondemand";
    }
    return "?";
}

GovernorPolicy parse_governor_policy(std::string_view text) {
    if (text == "performance") return GovernorPolicy::performance;
    if (text == "powersave") return GovernorPolicy::powersave;
    if (text == "ondemand") return GovernorPolicy::ondemand;
    throw ConfigError("unknown governor policy '" + std::string(text) + "'");
}

std::string check_governor(const GovernorConfig& config) {
    if (config.period <= 0) return "governor period must be > 0";
    if (!(config.down_threshold > 0.0 && config.down_threshold < config.up_threshold &&
          config.up_threshold <= 1.0)) {
        return "governor thresholds must satisfy 0 < down < up <= 1";
    }
    return {};
}

std::size_t initial_opp_index(GovernorPolicy policy, std::size_t opp_count) {
    return policy == GovernorPolicy::performance ? opp_count - 1 : 0;
}

MicroWatts pe_power(bool busy, const Opp& opp) {
    return busy ? opp.dyn_power + opp.static_power : opp.static_power;
}

Nanos busy_overlap(const PeEnergyState& pe, Nanos from, Nanos to) {
    if (pe.busy_opp == nullptr) return 0;
    Nanos lo = std::max(from, pe.exec_start);
    Nanos hi = std::min(to, pe.exec_finish);
    return hi > lo ? hi - lo : 0;
}

Femtojoules accumulate_energy(std::span<PeEnergyState> pes, Nanos from, Nanos to) {
    if (to <= from) return 0;
    Femtojoules total = 0;
    for (auto& pe : pes) {
        Nanos busy = busy_overlap(pe, from, to);
        Nanos idle = (to - from) - busy;
        Femtojoules added = pe_power(false, *pe.idle_opp) * idle;
        if (busy > 0) added += pe_power(true, *pe.busy_opp) * busy;
        pe.energy += added;
        pe.busy_time += busy;
        total += added;
    }
    return total;
}

std::size_t governor_tick(const GovernorConfig& config, double utilization, std::size_t current,
                          std::size_t opp_count) {
    const std::size_t highest = opp_count - 1;
    switch (config.policy) {
        case GovernorPolicy::performance: return highest;
        case GovernorPolicy::powersave: return 0;
        case GovernorPolicy::ondemand:
            if (utilization > config.up_threshold) return highest;
            if (utilization < config.down_threshold) return current > 0 ? current - 1 : 0;
            return std::min(current, highest);
    }
    return current;
}

double thermal_step(const ThermalNode& node, double power_w, Nanos dt) {
    const double dt_s = static_cast<double>(dt) * 1e-9;
    const double rc = node.time_constant_s();
    return node.temperature +
           (dt_s / rc) * (power_w * node.resistance - (node.temperature - node.ambient));
}

double thermal_advance(ThermalNode& node, double power_w, Nanos dt) {
    double peak = node.temperature;
    if (dt <= 0) return peak;
    const auto max_step = static_cast<Nanos>(node.time_constant_s() * 1e9 / 10.0);
    const Nanos step = std::max<Nanos>(1, max_step);
    Nanos remaining = dt;
    while (remaining > 0) {
        const Nanos chunk = std::min(step, remaining);
        node.temperature = thermal_step(node, power_w, chunk);
        peak = std::max(peak, node.temperature);
        remaining -= chunk;
    }
    return peak;
}

}  // namespace dssim
