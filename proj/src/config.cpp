#include "mmd/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mmd/geometry.hpp"

namespace mmd {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_real(std::string_view key, std::string_view v) {
    v = trim(v);
    // `2^-6` style powers
    if (auto caret = v.find('^'); caret != std::string_view::npos)
        return std::pow(parse_real(key, v.substr(0, caret)), parse_real(key, v.substr(caret + 1)));
    double x = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(x))
        throw Error(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
    return x;
}

std::uint64_t parse_count(std::string_view key, std::string_view v) {
    const double x = parse_real(key, v);
    if (x < 0.0 || x != std::floor(x) || x > 1e18)
        throw Error(std::string(key) + ": expected a nonnegative integer");
    return static_cast<std::uint64_t>(x);
}

bool parse_bool(std::string_view key, std::string_view v) {
    v = trim(v);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw Error(std::string(key) + ": expected true or false");
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t depth = 0, start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '(') ++depth;
        if (s[i] == ')' && depth > 0) --depth;
        if (s[i] == sep && depth == 0) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    out.push_back(trim(s.substr(start)));
    return out;
}

// `name(a=1, b=2)` -> name and the argument list
std::pair<std::string_view, std::string_view> call_form(std::string_view v) {
    v = trim(v);
    const auto open = v.find('(');
    if (open == std::string_view::npos) return {v, {}};
    if (v.back() != ')') throw Error("unbalanced parentheses in '" + std::string(v) + "'");
    return {trim(v.substr(0, open)), v.substr(open + 1, v.size() - open - 2)};
}

std::string_view alias(std::string_view k) {
    if (k == "F") return "set";
    if (k == "k") return "delay_k";
    if (k == "depth") return "cantor_depth";
    if (k == "c") return "branches";
    if (k == "n") return "points";
    return k;
}

void apply_arguments(RunConfig& cfg, std::string_view args) {
    if (trim(args).empty()) return;
    for (auto a : split(args, ',')) {
        const auto eq = a.find('=');
        if (eq == std::string_view::npos) throw Error("expected key=value in '" + std::string(a) + "'");
        apply_setting(cfg, alias(trim(a.substr(0, eq))), trim(a.substr(eq + 1)));
    }
}

}  // namespace

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
    key = trim(key);
    value = trim(value);
    if (key == "command") {
        cfg.command = value;
    } else if (key == "map") {
        auto [name, args] = call_form(value);
        cfg.map = name;
        apply_arguments(cfg, args);
    } else if (key == "set") {
        auto [name, args] = call_form(value);
        if (name == "delayed") {
            cfg.map = "delayed";
        } else {
            cfg.set = name;
        }
        apply_arguments(cfg, args);
    } else if (key == "alpha") {
        cfg.alpha = parse_real(key, value);
    } else if (key == "k_max") {
        cfg.k_max = parse_count(key, value);
    } else if (key == "n_max") {
        cfg.n_max = parse_count(key, value);
    } else if (key == "pieces") {
        cfg.pieces = parse_count(key, value);
    } else if (key == "branches") {
        cfg.branches = parse_count(key, value);
    } else if (key == "cantor_depth") {
        cfg.cantor_depth = parse_count(key, value);
    } else if (key == "points") {
        cfg.points = parse_count(key, value);
    } else if (key == "delay_k") {
        cfg.delay_k = static_cast<int>(parse_count(key, value));
    } else if (key == "eps_start" || key == "eps-start") {
        cfg.eps_start = parse_real(key, value);
    } else if (key == "eps_stop" || key == "eps-stop") {
        cfg.eps_stop = parse_real(key, value);
    } else if (key == "eps_ratio" || key == "eps-ratio") {
        cfg.eps_ratio = parse_real(key, value);
    } else if (key == "depth" || key == "depths") {
        cfg.depths.clear();
        for (auto d : split(value, ','))
            if (!d.empty()) cfg.depths.push_back(parse_count(key, d));
    } else if (key == "budget") {
        cfg.budget = parse_count(key, value);
    } else if (key == "convention") {
        if (value != "closed" && value != "halfopen" && value != "tightest")
            throw Error("convention: expected closed, halfopen or tightest");
        cfg.convention = value;
    } else if (key == "threads") {
        cfg.threads = static_cast<unsigned>(parse_count(key, value));
    } else if (key == "seed") {
        cfg.seed = parse_count(key, value);
    } else if (key == "out") {
        cfg.out = value;
    } else if (key == "check") {
        cfg.check = parse_bool(key, value);
    } else if (key == "export_matrix" || key == "export-matrix") {
        cfg.export_matrix = parse_bool(key, value);
    } else if (key == "generators") {
        cfg.generators = value;
    } else if (key == "walk") {
        cfg.walk = value;
    } else if (key == "samples") {
        cfg.samples = parse_count(key, value);
    } else if (key == "walk_n" || key == "n") {
        cfg.walk_n = parse_count(key, value);
    } else if (key == "tolerance") {
        if (value == "default")
            cfg.tolerance.reset();
        else
            cfg.tolerance = parse_real(key, value);
    } else {
        throw Error("unknown key '" + std::string(key) + "'");
    }
}

RunConfig parse_config(std::string_view text, RunConfig base) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                              : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(line_no, "expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(line_no, "missing key");
        try {
            apply_setting(base, key, line.substr(eq + 1));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(line_no, e.what());
        }
    }
    return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

void validate(const RunConfig& cfg) {
    if (!(cfg.eps_ratio > 1.0)) throw ConfigError(0, "eps_ratio must exceed 1");
    if (!(cfg.eps_start > 0.0) || !(cfg.eps_stop > 0.0) || cfg.eps_stop > cfg.eps_start)
        throw ConfigError(0, "need 0 < eps_stop <= eps_start");
    if (cfg.budget == 0) throw ConfigError(0, "budget must be positive");
    if (cfg.samples == 0) throw ConfigError(0, "samples must be positive");
    if (cfg.walk_n == 0) throw ConfigError(0, "n must be positive");
    if (cfg.depths.empty()) throw ConfigError(0, "depth schedule is empty");
    for (auto d : cfg.depths)
        if (d == 0) throw ConfigError(0, "depths must be positive");
    if (cfg.out.empty()) throw ConfigError(0, "output directory is empty");
}

std::vector<double> ladder(const RunConfig& cfg) {
    return geometric_ladder(cfg.eps_start, cfg.eps_stop, cfg.eps_ratio);
}

std::string canonical_text(const RunConfig& c) {
    std::string depths;
    for (std::size_t i = 0; i < c.depths.size(); ++i)
        depths += (i ? "," : "") + std::to_string(c.depths[i]);
    std::ostringstream s;
    s << "command = " << c.command << '\n'
      << "map = " << c.map << '\n'
      << "set = " << c.set << '\n'
      << "alpha = " << format_decimal(c.alpha) << '\n'
      << "k_max = " << c.k_max << '\n'
      << "n_max = " << c.n_max << '\n'
      << "pieces = " << c.pieces << '\n'
      << "branches = " << c.branches << '\n'
      << "cantor_depth = " << c.cantor_depth << '\n'
      << "points = " << c.points << '\n'
      << "delay_k = " << c.delay_k << '\n'
      << "eps_start = " << format_decimal(c.eps_start) << '\n'
      << "eps_stop = " << format_decimal(c.eps_stop) << '\n'
      << "eps_ratio = " << format_decimal(c.eps_ratio) << '\n'
      << "depth = " << depths << '\n'
      << "budget = " << c.budget << '\n'
      << "convention = " << c.convention << '\n'
      << "seed = " << c.seed << '\n'
      << "generators = " << c.generators << '\n'
      << "walk = " << c.walk << '\n'
      << "samples = " << c.samples << '\n'
      << "n = " << c.walk_n << '\n'
      << "tolerance = " << (c.tolerance ? format_decimal(*c.tolerance) : "default") << '\n';
    return s.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : canonical_text(cfg)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace mmd
