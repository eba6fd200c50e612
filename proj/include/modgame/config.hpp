#pragma once

// Scenario configuration: a flat `key = value` document, one entry per line,
// `#` starts a comment. Command-line flags are applied on top through the
// same set_key() entry point.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "modgame/extensions.hpp"
#include "modgame/game_core.hpp"

namespace modgame {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ModelKind { standard, incentives, epidemic };

inline std::string_view to_string(ModelKind m) {
  switch (m) {
    case ModelKind::incentives: return "incentives";
    case ModelKind::epidemic: return "epidemic";
    case ModelKind::standard: break;
  }
  return "standard";
}

struct ScenarioConfig {
  ModelKind model = ModelKind::standard;
  double np = 0.9;
  double a = 7.0;

  // epidemic mode; lambda defaults to mu (constant total population)
  double beta = 0.0;
  double rho = 0.0;
  double mu = 0.0;
  std::optional<double> lambda;

  double x0 = 0.5;
  double z0 = 0.5;
  double T = 200.0;
  double dt = kDefaultStep;
  double t_max = kDefaultHorizon;
  std::size_t stride = 10;
  std::size_t grid = 21;

  // sweep ranges (inclusive, `steps` samples per axis)
  double np_min = 0.05;
  double np_max = 0.95;
  std::size_t np_steps = 19;
  double a_min = 0.5;
  double a_max = 20.0;
  std::size_t a_steps = 40;

  std::string out;
  std::string svg;

  EpidemicParams epidemic() const { return {beta, rho, mu, lambda.value_or(mu)}; }

  bool operator==(const ScenarioConfig&) const = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(out)) {
    throw ConfigError("invalid number for '" + std::string(key) + "': '" + std::string(v) + "'");
  }
  return out;
}

inline std::size_t parse_count(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ConfigError("invalid count for '" + std::string(key) + "': '" + std::string(v) + "'");
  }
  return out;
}

}  // namespace detail

/// Assigns one key. Unknown keys and malformed values raise ConfigError.
inline void set_key(ScenarioConfig& c, std::string_view key, std::string_view value) {
  using detail::parse_count;
  using detail::parse_double;
  value = detail::trim(value);
  if (key == "model") {
    if (value == "standard") c.model = ModelKind::standard;
    else if (value == "incentives") c.model = ModelKind::incentives;
    else if (value == "epidemic") c.model = ModelKind::epidemic;
    else throw ConfigError("unknown model '" + std::string(value) + "'");
  } else if (key == "np") c.np = parse_double(key, value);
  else if (key == "a") c.a = parse_double(key, value);
  else if (key == "beta") c.beta = parse_double(key, value);
  else if (key == "rho") c.rho = parse_double(key, value);
  else if (key == "mu") c.mu = parse_double(key, value);
  else if (key == "lambda") c.lambda = parse_double(key, value);
  else if (key == "x0") c.x0 = parse_double(key, value);
  else if (key == "z0") c.z0 = parse_double(key, value);
  else if (key == "T") c.T = parse_double(key, value);
  else if (key == "dt") c.dt = parse_double(key, value);
  else if (key == "t_max") c.t_max = parse_double(key, value);
  else if (key == "stride") c.stride = parse_count(key, value);
  else if (key == "grid") c.grid = parse_count(key, value);
  else if (key == "np_min") c.np_min = parse_double(key, value);
  else if (key == "np_max") c.np_max = parse_double(key, value);
  else if (key == "np_steps") c.np_steps = parse_count(key, value);
  else if (key == "a_min") c.a_min = parse_double(key, value);
  else if (key == "a_max") c.a_max = parse_double(key, value);
  else if (key == "a_steps") c.a_steps = parse_count(key, value);
  else if (key == "out") c.out = std::string(value);
  else if (key == "svg") c.svg = std::string(value);
  else throw ConfigError("unknown key '" + std::string(key) + "'");
}

/// Checks every parameter bound; throws ConfigError on the first violation.
inline void validate(const ScenarioConfig& c) {
  const auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(c.np > 0.0 && c.np < 1.0)) fail("np must lie in (0, 1)");
  if (!(c.a > 0.0)) fail("a must be positive");
  for (double r : {c.beta, c.rho, c.mu}) {
    if (r < 0.0) fail("epidemic rates must be non-negative");
  }
  if (c.lambda && *c.lambda < 0.0) fail("lambda must be non-negative");
  if (!(c.x0 >= 0.0 && c.x0 <= 1.0 && c.z0 >= 0.0 && c.z0 <= 1.0)) fail("x0, z0 must lie in [0, 1]");
  if (!(c.T > 0.0)) fail("T must be positive");
  if (!(c.dt > 0.0 && c.dt <= c.T)) fail("dt must satisfy 0 < dt <= T");
  if (!(c.t_max > 0.0 && c.dt <= c.t_max)) fail("t_max must be positive and at least dt");
  if (c.stride == 0) fail("stride must be at least 1");
  if (c.grid < 2) fail("grid must be at least 2");
  if (!(c.np_min > 0.0 && c.np_max < 1.0 && c.np_min <= c.np_max)) {
    fail("sweep requires 0 < np_min <= np_max < 1");
  }
  if (!(c.a_min > 0.0 && c.a_min <= c.a_max)) fail("sweep requires 0 < a_min <= a_max");
  if (c.np_steps == 0 || c.a_steps == 0) fail("sweep step counts must be at least 1");
}

inline ScenarioConfig parse_config(std::string_view text, ScenarioConfig base = {}) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      set_key(base, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

/// Inverse of parse_config for every key.
inline std::string format_config(const ScenarioConfig& c) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "model = " << to_string(c.model) << '\n'
     << "np = " << c.np << '\n'
     << "a = " << c.a << '\n'
     << "beta = " << c.beta << '\n'
     << "rho = " << c.rho << '\n'
     << "mu = " << c.mu << '\n';
  if (c.lambda) os << "lambda = " << *c.lambda << '\n';
  os << "x0 = " << c.x0 << '\n'
     << "z0 = " << c.z0 << '\n'
     << "T = " << c.T << '\n'
     << "dt = " << c.dt << '\n'
     << "t_max = " << c.t_max << '\n'
     << "stride = " << c.stride << '\n'
     << "grid = " << c.grid << '\n'
     << "np_min = " << c.np_min << '\n'
     << "np_max = " << c.np_max << '\n'
     << "np_steps = " << c.np_steps << '\n'
     << "a_min = " << c.a_min << '\n'
     << "a_max = " << c.a_max << '\n'
     << "a_steps = " << c.a_steps << '\n';
  if (!c.out.empty()) os << "out = " << c.out << '\n';
  if (!c.svg.empty()) os << "svg = " << c.svg << '\n';
  return os.str();
}

}  // namespace modgame
