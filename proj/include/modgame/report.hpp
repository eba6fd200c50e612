#pragma once

// Machine-readable outputs (CSV tables, JSON equilibrium records, SVG phase
// portraits) and their readers.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "modgame/analysis.hpp"
#include "modgame/extensions.hpp"
#include "modgame/integrate.hpp"

namespace modgame {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest text that reads back to the same double (17 significant digits).
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double read_number(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw FormatError("trailing characters in number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw FormatError("invalid number '" + s + "'");
  }
}

inline void expect_header(std::istream& in, std::string_view header) {
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw FormatError("expected header '" + std::string(header) + "', got '" + line + "'");
  }
}

}  // namespace detail

/// Writes content to path via a sibling temporary and a rename.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Trajectories: t,x,z[,np]

struct TrajectoryRow {
  double t = 0.0;
  double x = 0.0;
  double z = 0.0;
  std::optional<double> np;

  bool operator==(const TrajectoryRow&) const = default;
};

inline std::vector<TrajectoryRow> trajectory_rows(const Trajectory& traj) {
  std::vector<TrajectoryRow> rows;
  rows.reserve(traj.samples.size());
  for (const auto& s : traj.samples) rows.push_back({s.t, s.state.x, s.state.z, std::nullopt});
  return rows;
}

inline std::vector<TrajectoryRow> trajectory_rows(const EpidemicTrajectory& traj) {
  std::vector<TrajectoryRow> rows;
  rows.reserve(traj.samples.size());
  for (const auto& s : traj.samples) rows.push_back({s.t, s.state.x, s.state.z, s.state.np});
  return rows;
}

inline void write_trajectory_csv(std::ostream& os, std::span<const TrajectoryRow> rows) {
  const bool with_np = !rows.empty() && rows.front().np.has_value();
  os << (with_np ? "t,x,z,np\n" : "t,x,z\n");
  for (const auto& r : rows) {
    os << format_number(r.t) << ',' << format_number(r.x) << ',' << format_number(r.z);
    if (with_np) os << ',' << format_number(r.np.value_or(0.0));
    os << '\n';
  }
}

inline std::vector<TrajectoryRow> read_trajectory_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw FormatError("empty trajectory file");
  bool with_np = false;
  if (header == "t,x,z,np") with_np = true;
  else if (header != "t,x,z") throw FormatError("unexpected trajectory header '" + header + "'");
  std::vector<TrajectoryRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != (with_np ? 4u : 3u)) throw FormatError("bad trajectory row '" + line + "'");
    TrajectoryRow r{detail::read_number(cells[0]), detail::read_number(cells[1]),
                    detail::read_number(cells[2]), std::nullopt};
    if (with_np) r.np = detail::read_number(cells[3]);
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Basin maps: x,z,label

inline void write_basin_csv(std::ostream& os, const BasinMap& map) {
  os << "x,z,label\n";
  for (std::size_t j = 0; j < map.n; ++j) {
    for (std::size_t i = 0; i < map.n; ++i) {
      os << format_number(map.center(i)) << ',' << format_number(map.center(j)) << ','
         << to_string(map.at(i, j)) << '\n';
    }
  }
}

inline BasinMap read_basin_csv(std::istream& in) {
  detail::expect_header(in, "x,z,label");
  std::vector<Outcome> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != 3) throw FormatError("bad basin row '" + line + "'");
    const auto o = outcome_from_string(cells[2]);
    if (!o) throw FormatError("unknown basin label '" + cells[2] + "'");
    labels.push_back(*o);
  }
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(labels.size()))));
  if (n * n != labels.size() || n < 2) throw FormatError("basin file is not a square grid");
  return {n, std::move(labels)};
}

// ---------------------------------------------------------------------------
// Vector field: x,z,dx,dz

inline void write_field_csv(std::ostream& os, std::span<const FieldSample> samples) {
  os << "x,z,dx,dz\n";
  for (const auto& s : samples) {
    os << format_number(s.at.x) << ',' << format_number(s.at.z) << ','
       << format_number(s.velocity.x) << ',' << format_number(s.velocity.z) << '\n';
  }
}

inline std::vector<FieldSample> read_field_csv(std::istream& in) {
  detail::expect_header(in, "x,z,dx,dz");
  std::vector<FieldSample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = detail::split_csv(line);
    if (c.size() != 4) throw FormatError("bad field row '" + line + "'");
    out.push_back({{detail::read_number(c[0]), detail::read_number(c[1])},
                   {detail::read_number(c[2]), detail::read_number(c[3])}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Regime sweep

struct RegimeCell {
  double np = 0.0;
  double a = 0.0;
  bool utopia_stable = false;
  bool dystopia_stable = false;
  bool interior_exists = false;
  bool corner01_stable = false;
  bool corner10_stable = false;

  std::string_view regime() const {
    if (utopia_stable && dystopia_stable) return "both-stable";
    if (utopia_stable) return "utopia-only";
    if (dystopia_stable) return "dystopia-only";
    return "neither";
  }
  bool operator==(const RegimeCell&) const = default;
};

inline constexpr std::string_view kSweepHeader =
    "np,a,utopia_stable,dystopia_stable,interior_exists,corner01_stable,corner10_stable,regime";

inline void write_sweep_csv(std::ostream& os, std::span<const RegimeCell> cells) {
  os << kSweepHeader << '\n';
  for (const auto& c : cells) {
    os << format_number(c.np) << ',' << format_number(c.a) << ',' << int(c.utopia_stable) << ','
       << int(c.dystopia_stable) << ',' << int(c.interior_exists) << ',' << int(c.corner01_stable)
       << ',' << int(c.corner10_stable) << ',' << c.regime() << '\n';
  }
}

inline std::vector<RegimeCell> read_sweep_csv(std::istream& in) {
  detail::expect_header(in, kSweepHeader);
  std::vector<RegimeCell> out;
  std::string line;
  const auto flag = [](const std::string& s) {
    if (s == "0") return false;
    if (s == "1") return true;
    throw FormatError("expected 0/1, got '" + s + "'");
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = detail::split_csv(line);
    if (c.size() != 8) throw FormatError("bad sweep row '" + line + "'");
    RegimeCell cell{detail::read_number(c[0]), detail::read_number(c[1]), flag(c[2]), flag(c[3]),
                    flag(c[4]),                flag(c[5]),                flag(c[6])};
    if (cell.regime() != c[7]) throw FormatError("regime column disagrees with flags: '" + line + "'");
    out.push_back(cell);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Equilibrium records (JSON)

inline nlohmann::json to_json(const Equilibrium& e) {
  nlohmann::json j;
  j["index"] = e.index;
  j["x"] = e.point.x;
  j["z"] = e.point.z;
  j["spurious"] = e.spurious;
  if (e.classification == Stability::unclassified) {
    j["eigenvalues"] = nullptr;
  } else {
    j["eigenvalues"] = nlohmann::json::array(
        {{e.eigenvalues[0].real(), e.eigenvalues[0].imag()},
         {e.eigenvalues[1].real(), e.eigenvalues[1].imag()}});
  }
  j["classification"] = std::string(to_string(e.classification));
  return j;
}

inline Equilibrium equilibrium_from_json(const nlohmann::json& j) {
  Equilibrium e;
  try {
    e.index = j.at("index").get<int>();
    // Non-finite coordinates are serialised as null.
    const auto coord = [](const nlohmann::json& v) {
      return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
    };
    e.point = {coord(j.at("x")), coord(j.at("z"))};
    e.spurious = j.at("spurious").get<bool>();
    const auto cls = stability_from_string(j.at("classification").get<std::string>());
    if (!cls) throw FormatError("unknown classification");
    e.classification = *cls;
    const auto& ev = j.at("eigenvalues");
    if (!ev.is_null()) {
      for (int k = 0; k < 2; ++k) {
        e.eigenvalues[k] = {ev.at(k).at(0).get<double>(), ev.at(k).at(1).get<double>()};
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("malformed equilibrium record: ") + ex.what());
  }
  return e;
}

struct EquilibriumReport {
  std::string model;
  double np = 0.0;
  double a = 0.0;
  std::vector<Equilibrium> equilibria;
};

inline std::string equilibria_json(const EquilibriumReport& r) {
  nlohmann::json j;
  j["model"] = r.model;
  j["np"] = r.np;
  j["a"] = r.a;
  j["equilibria"] = nlohmann::json::array();
  for (const auto& e : r.equilibria) j["equilibria"].push_back(to_json(e));
  return j.dump(2) + "\n";
}

inline EquilibriumReport parse_equilibria_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("invalid JSON: ") + ex.what());
  }
  EquilibriumReport r;
  try {
    r.model = j.at("model").get<std::string>();
    r.np = j.at("np").get<double>();
    r.a = j.at("a").get<double>();
    for (const auto& e : j.at("equilibria")) r.equilibria.push_back(equilibrium_from_json(e));
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("malformed equilibrium report: ") + ex.what());
  }
  return r;
}

/// Fixed-width human-readable table.
inline std::string equilibria_table(std::span<const Equilibrium> eqs) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-3s %12s %12s  %-8s  %-30s  %s\n", "#", "x", "z", "spurious",
                "eigenvalues", "classification");
  os << buf;
  for (const auto& e : eqs) {
    std::string ev = "-";
    if (e.classification != Stability::unclassified) {
      char eb[96];
      const auto fmt_c = [](const std::complex<double>& c) {
        char cb[48];
        if (c.imag() == 0.0) std::snprintf(cb, sizeof cb, "%.6f", c.real());
        else std::snprintf(cb, sizeof cb, "%.6f%+.6fi", c.real(), c.imag());
        return std::string(cb);
      };
      std::snprintf(eb, sizeof eb, "%s, %s", fmt_c(e.eigenvalues[0]).c_str(),
                    fmt_c(e.eigenvalues[1]).c_str());
      ev = eb;
    }
    std::snprintf(buf, sizeof buf, "%-3d %12.6f %12.6f  %-8s  %-30s  %s\n", e.index, e.point.x,
                  e.point.z, e.spurious ? "yes" : "no", ev.c_str(),
                  e.spurious ? "spurious" : std::string(to_string(e.classification)).c_str());
    os << buf;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// SVG phase portrait

struct PortraitStyle {
  int size = 600;     // drawing area, pixels
  int margin = 50;
  double max_arrow = 0.8;  // longest arrow, in grid spacings
};

/// Quiver plot of the sampled field with arrows scaled by speed, plus a dot
/// for each supplied equilibrium (filled when stable).
inline std::string render_portrait_svg(std::span<const FieldSample> samples,
                                       std::span<const Equilibrium> equilibria,
                                       std::string_view title, const PortraitStyle& style = {}) {
  const double size = style.size;
  const double m = style.margin;
  const auto px = [&](double x) { return m + x * size; };
  const auto py = [&](double z) { return m + (1.0 - z) * size; };
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(samples.size()))));
  const double spacing = n > 1 ? size / static_cast<double>(n - 1) : size;
  double vmax = 0.0;
  for (const auto& s : samples) vmax = std::max(vmax, std::hypot(s.velocity.x, s.velocity.z));

  std::ostringstream os;
  char buf[256];
  const int total = style.size + 2 * style.margin;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n",
                total, total, total, total);
  os << buf;
  os << "<defs><marker id=\"head\" markerWidth=\"6\" markerHeight=\"6\" refX=\"5\" refY=\"3\" "
        "orient=\"auto\"><path d=\"M0,0 L6,3 L0,6 z\" fill=\"#335\"/></marker></defs>\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" "
                "stroke=\"black\"/>\n",
                m, m, size, size);
  os << buf;
  os << "<text x=\"" << total / 2 << "\" y=\"" << style.margin / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" << title
     << "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                "font-size=\"12\">x (cooperating users)</text>\n",
                m + size / 2, m + size + 35);
  os << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"15\" y=\"%.1f\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                "font-size=\"12\" transform=\"rotate(-90 15 %.1f)\">z (positive moderators)</text>\n",
                m + size / 2, m + size / 2);
  os << buf;

  os << "<g stroke=\"#335\" stroke-width=\"1\">\n";
  for (const auto& s : samples) {
    const double speed = std::hypot(s.velocity.x, s.velocity.z);
    if (speed == 0.0 || vmax == 0.0) continue;
    const double len = style.max_arrow * spacing * speed / vmax;
    const double ux = s.velocity.x / speed;
    const double uz = s.velocity.z / speed;
    const double x0 = px(s.at.x);
    const double y0 = py(s.at.z);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" marker-end=\"url(#head)\"/>\n",
                  x0, y0, x0 + ux * len, y0 - uz * len);
    os << buf;
  }
  os << "</g>\n";

  for (const auto& e : equilibria) {
    if (e.spurious) continue;
    const bool stable = e.classification == Stability::stable_node;
    std::snprintf(buf, sizeof buf,
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"5\" fill=\"%s\" stroke=\"#a00\" "
                  "stroke-width=\"1.5\"/>\n",
                  px(e.point.x), py(e.point.z), stable ? "#a00" : "white");
    os << buf;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace modgame
