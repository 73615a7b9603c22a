#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dssim/power.hpp"
#include "dssim/units.hpp"
#include "dssim/workload.hpp"

namespace dssim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDeadlock = 3;

// Overrides the default output directory ("results").
inline constexpr const char* kOutDirEnv = "DSSIM_OUT_DIR";

struct RunConfig {
    std::string soc = "table2";   // path or builtin name
    std::string app = "wifi_tx";  // path or builtin name
    Bytes edge_volume = kDefaultEdgeVolume;  // builtin app only
    std::vector<std::string> schedulers{"etf"};
    std::optional<std::string> table;
    ArrivalDistribution distribution = ArrivalDistribution::exponential;
    std::vector<double> rates{5.0};  // jobs per ms
    Nanos duration = 1000 * kNsPerMs;
    std::vector<std::uint64_t> seeds{1};
    GovernorConfig governor;
    double warmup = 0.1;
    std::filesystem::path out;
    unsigned jobs = 1;
};

// "a:b:step" (inclusive) or "a,b,c".
std::vector<double> parse_rates(const std::string& text);
std::vector<std::uint64_t> parse_seeds(const std::string& text);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dssim::cli
