#pragma once

// Run configuration: `key = value` lines with `#` comments. Command-line
// flags use the same keys and are applied on top of the file.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmd/error.hpp"

namespace mmd {

class ConfigError : public Error {
public:
    ConfigError(std::size_t line, const std::string& what)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct RunConfig {
    std::string command;
    std::string map = "gauss";          // mdim target, or `delayed` / `full-square`
    std::string set = "gauss_points";   // boxdim target, delayed F
    double alpha = 1.0;
    std::size_t k_max = 1'000'000;
    std::size_t n_max = 20'000;
    std::size_t pieces = 100'000;
    std::size_t branches = 4;
    std::size_t cantor_depth = 12;
    std::size_t points = 100'000;
    int delay_k = 2;
    double eps_start = 0x1p-6;
    double eps_stop = 0x1p-18;
    double eps_ratio = 2.0;
    std::vector<std::size_t> depths{2, 3, 4};
    std::size_t budget = 10'000'000;
    std::string convention = "tightest";
    unsigned threads = 0;
    std::uint64_t seed = 0;
    std::string out = "out";
    bool check = false;
    bool export_matrix = false;
    std::string generators = "prop49";
    std::string walk = "atomic(12;21)";
    std::size_t samples = 64;
    std::size_t walk_n = 2;
    std::optional<double> tolerance;
};

/// Applies one setting; `name(a=1, b=2)` values also set the listed keys.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// Parses config text on top of `base`. Errors carry the line number.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Checks cross-field invariants (ladder, budgets, command).
void validate(const RunConfig& cfg);

/// eps_start, eps_start / ratio, ... down to eps_stop.
std::vector<double> ladder(const RunConfig& cfg);

/// Canonical `key = value` listing of every field, and its FNV-1a hash.
std::string canonical_text(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace mmd
