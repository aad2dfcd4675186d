#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace airsync
{

/// Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Precedence: --seed, then AIRSYNC_SEED, then the config seed.
/// Throws std::invalid_argument if the environment value is not an unsigned integer.
std::uint64_t resolve_seed(std::optional<std::uint64_t> cli_seed, const char* env_value, std::uint64_t config_seed);

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace airsync
