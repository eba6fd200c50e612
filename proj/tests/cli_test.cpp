#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "modgame/commands.hpp"

namespace modgame {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            (std::string("modgame_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const char* name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Config

TEST(Config, ParsesCommentsAndWhitespace) {
  const auto c = parse_config("# comment\n model = incentives \nnp=0.8  # trailing\n\na = 15\ngrid = 7\n");
  EXPECT_EQ(c.model, ModelKind::incentives);
  EXPECT_EQ(c.np, 0.8);
  EXPECT_EQ(c.a, 15.0);
  EXPECT_EQ(c.grid, 7u);
  EXPECT_EQ(c.x0, 0.5);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config("speed = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("np 0.9\n"), ConfigError);
  EXPECT_THROW(parse_config("np = nine\n"), ConfigError);
  EXPECT_THROW(parse_config("grid = -3\n"), ConfigError);
  EXPECT_THROW(parse_config("model = chaotic\n"), ConfigError);
  try {
    parse_config("np = 0.9\n\nfoo = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Config, ValidationBounds) {
  ScenarioConfig c;
  EXPECT_NO_THROW(validate(c));
  c.np = 1.0;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.a = 0.0;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.x0 = 1.5;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.dt = 300;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.grid = 1;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.beta = -0.1;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Config, FormatRoundTrip) {
  ScenarioConfig c;
  c.model = ModelKind::epidemic;
  c.np = 0.1 + 0.2;
  c.a = 1.0 / 3.0;
  c.beta = 0.5;
  c.lambda = 0.07;
  c.T = 12.5;
  c.stride = 3;
  c.out = "out/trajectory.csv";
  c.svg = "p.svg";
  EXPECT_EQ(parse_config(format_config(c)), c);
  EXPECT_EQ(parse_config(format_config(ScenarioConfig{})), ScenarioConfig{});
}

TEST(Config, ScenarioConfigsLoad) {
  const fs::path dir = fs::path(MODGAME_SOURCE_DIR) / "configs";
  const auto f2 = parse_config(slurp((dir / "coexistence.cfg").string()));
  EXPECT_EQ(f2.model, ModelKind::standard);
  EXPECT_EQ(f2.np, 0.9);
  EXPECT_EQ(f2.a, 7.0);
  const auto f3 = parse_config(slurp((dir / "strong_punishment.cfg").string()));
  EXPECT_EQ(f3.a, 12.0);
  const auto f4 = parse_config(slurp((dir / "incentives.cfg").string()));
  EXPECT_EQ(f4.model, ModelKind::incentives);
  EXPECT_EQ(f4.a, 15.0);
  for (const auto& c : {f2, f3, f4}) EXPECT_NO_THROW(validate(c));
}

// ---------------------------------------------------------------------------
// File formats

TEST(Formats, TrajectoryRoundTrip) {
  const auto traj = simulate(ModelParams(0.9, 12), {0.03, 0.99}, SimulationOptions{5.0, 0.01, 7});
  const auto rows = trajectory_rows(traj);
  std::stringstream ss;
  write_trajectory_csv(ss, rows);
  EXPECT_EQ(read_trajectory_csv(ss), rows);

  const auto etraj = simulate_epidemic(7.0, EpidemicParams::stable(0.5, 0.1, 0.05), {0.5, 0.5, 0.9},
                                       SimulationOptions{2.0, 0.01, 10});
  const auto erows = trajectory_rows(etraj);
  std::stringstream es;
  write_trajectory_csv(es, erows);
  EXPECT_EQ(es.str().substr(0, 9), "t,x,z,np\n");
  EXPECT_EQ(read_trajectory_csv(es), erows);
}

TEST(Formats, BasinRoundTrip) {
  const auto map = basin_map(ModelParams(0.9, 7), 5);
  std::stringstream ss;
  write_basin_csv(ss, map);
  EXPECT_EQ(ss.str().substr(0, 11), "x,z,label\n0");
  EXPECT_EQ(read_basin_csv(ss), map);
}

TEST(Formats, FieldRoundTrip) {
  const auto f = field_sample(ModelParams(0.9, 7), 6);
  std::stringstream ss;
  write_field_csv(ss, f);
  const auto back = read_field_csv(ss);
  ASSERT_EQ(back.size(), f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    EXPECT_EQ(back[k].at, f[k].at);
    EXPECT_EQ(back[k].velocity, f[k].velocity);
  }
}

TEST(Formats, SweepRoundTrip) {
  ScenarioConfig c;
  c.np_steps = 5;
  c.a_steps = 6;
  const auto cells = regime_sweep(c);
  std::stringstream ss;
  write_sweep_csv(ss, cells);
  EXPECT_EQ(read_sweep_csv(ss), cells);
}

TEST(Formats, EquilibriaJsonRoundTrip) {
  for (const auto& report :
       {EquilibriumReport{"standard", 0.9, 7, {}}, EquilibriumReport{"incentives", 0.9, 15, {}}}) {
    auto r = report;
    if (r.model == "standard") {
      const auto e = classified_equilibria(ModelParams(r.np, r.a));
      r.equilibria.assign(e.begin(), e.end());
    } else {
      const auto e = incentives_equilibria(IncentiveParams(r.np, r.a));
      r.equilibria.assign(e.begin(), e.end());
    }
    const auto back = parse_equilibria_json(equilibria_json(r));
    EXPECT_EQ(back.model, r.model);
    EXPECT_EQ(back.np, r.np);
    EXPECT_EQ(back.a, r.a);
    ASSERT_EQ(back.equilibria.size(), 9u);
    for (std::size_t k = 0; k < 9; ++k) {
      const auto& x = r.equilibria[k];
      const auto& y = back.equilibria[k];
      EXPECT_EQ(y.index, x.index);
      EXPECT_EQ(y.spurious, x.spurious);
      EXPECT_EQ(y.classification, x.classification);
      if (std::isfinite(x.point.x)) {
        EXPECT_EQ(y.point, x.point);
      } else {
        EXPECT_TRUE(std::isnan(y.point.x));
      }
      EXPECT_EQ(y.eigenvalues[0], x.eigenvalues[0]);
      EXPECT_EQ(y.eigenvalues[1], x.eigenvalues[1]);
    }
  }
  EXPECT_THROW(parse_equilibria_json("{"), FormatError);
  EXPECT_THROW(parse_equilibria_json(R"({"model": "standard"})"), FormatError);
}

TEST(Formats, NumbersCarryFullPrecision) {
  EXPECT_EQ(std::stod(format_number(17.0 / 27)), 17.0 / 27);
  EXPECT_EQ(std::stod(format_number(0.1)), 0.1);
}

// ---------------------------------------------------------------------------
// Commands

TEST(Commands, EquilibriaReport) {
  TempDir tmp;
  ScenarioConfig c;
  c.out = tmp.file("eq.json");
  std::ostringstream log;
  const auto r = cmd_equilibria(c, log);
  ASSERT_EQ(r.equilibria.size(), 9u);
  const auto& e9 = r.equilibria[8];
  EXPECT_NEAR(e9.point.x, 0.629630, 5e-7);
  EXPECT_NEAR(e9.point.z, 0.416667, 5e-7);
  EXPECT_TRUE(e9.classification == Stability::saddle ||
              e9.classification == Stability::unstable_node);
  EXPECT_EQ(r.equilibria[0].classification, Stability::stable_node);
  EXPECT_EQ(r.equilibria[3].classification, Stability::stable_node);
  EXPECT_NE(log.str().find("0.629630"), std::string::npos);
  EXPECT_EQ(parse_equilibria_json(slurp(c.out)).equilibria.size(), 9u);

  c.a = 12;
  EXPECT_TRUE(cmd_equilibria(c, log).equilibria[8].spurious);
  c.model = ModelKind::epidemic;
  EXPECT_THROW(cmd_equilibria(c, log), ConfigError);
}

TEST(Commands, SimulateStandard) {
  TempDir tmp;
  ScenarioConfig c;
  c.a = 12;
  c.x0 = 0.03;
  c.z0 = 0.99;
  c.out = tmp.file("traj.csv");
  std::ostringstream log;
  const auto s = cmd_simulate(c, log);
  EXPECT_EQ(s.terminal, Outcome::utopia);
  EXPECT_NE(log.str().find("terminal label: utopia"), std::string::npos);
  std::ifstream in(c.out);
  const auto rows = read_trajectory_csv(in);
  EXPECT_EQ(rows, s.rows);
  EXPECT_EQ(rows.size(), 20000u / 10 + 1);
}

TEST(Commands, SimulateCornerStartIsConstant) {
  TempDir tmp;
  ScenarioConfig c;
  c.x0 = 0.0;
  c.z0 = 1.0;
  c.T = 10;
  c.out = tmp.file("traj.csv");
  std::ostringstream log;
  const auto s = cmd_simulate(c, log);
  for (const auto& r : s.rows) {
    EXPECT_EQ(r.x, 0.0);
    EXPECT_EQ(r.z, 1.0);
  }
  EXPECT_EQ(s.terminal, Outcome::corner01);
}

TEST(Commands, SimulateEpidemic) {
  TempDir tmp;
  ScenarioConfig c;
  c.model = ModelKind::epidemic;
  c.T = 20;
  c.out = tmp.file("traj.csv");
  std::ostringstream log;
  const auto s = cmd_simulate(c, log);
  for (const auto& r : s.rows) EXPECT_EQ(r.np, 0.9);
  EXPECT_EQ(slurp(c.out).substr(0, 9), "t,x,z,np\n");

  c.beta = 0.5;
  c.rho = 0.1;
  c.mu = 0.05;
  c.lambda = 0.2;
  std::ostringstream log2;
  cmd_simulate(c, log2);
  EXPECT_NE(log2.str().find("not conserved"), std::string::npos);
}

TEST(Commands, SimulateReportsRegimeCrossings) {
  TempDir tmp;
  ScenarioConfig c;
  c.model = ModelKind::epidemic;
  c.a = 3;
  c.np = 0.95;
  c.beta = 1.0;
  c.rho = 0.55;
  c.mu = 0.05;
  c.T = 100;
  c.out = tmp.file("traj.csv");
  std::ostringstream log;
  const auto s = cmd_simulate(c, log);
  EXPECT_FALSE(s.crossings.empty());
  EXPECT_NE(log.str().find("regime crossing"), std::string::npos);
}

TEST(Commands, BasinSeparatrix) {
  TempDir tmp;
  ScenarioConfig c;
  c.grid = 41;
  c.out = tmp.file("basin.csv");
  std::ostringstream log;
  const auto b = cmd_basin(c, log);
  ASSERT_TRUE(b.separatrix.mean.has_value());
  EXPECT_NEAR(*b.separatrix.mean, 17.0 / 27, 0.025);
  ASSERT_TRUE(b.analytic_x.has_value());
  EXPECT_NEAR(*b.analytic_x, 17.0 / 27, 1e-12);
  EXPECT_NE(log.str().find("analytic separatrix"), std::string::npos);
  std::ifstream in(c.out);
  EXPECT_EQ(read_basin_csv(in), b.map);
}

TEST(Commands, BasinStrongPunishmentAndSmoke) {
  TempDir tmp;
  ScenarioConfig c;
  c.a = 12;
  c.out = tmp.file("basin.csv");
  std::ostringstream log;
  EXPECT_EQ(cmd_basin(c, log).map.fraction(Outcome::utopia), 1.0);
  c.a = 7;
  c.grid = 2;
  const auto small = cmd_basin(c, log).map;
  EXPECT_EQ(small.at(0, 0), Outcome::dystopia);
  EXPECT_EQ(small.at(1, 1), Outcome::utopia);
}

TEST(Commands, PortraitAndSvg) {
  TempDir tmp;
  ScenarioConfig c;
  c.grid = 28;  // x = 17/27 is node 17
  c.out = tmp.file("field.csv");
  c.svg = tmp.file("p1.svg");
  std::ostringstream log;
  const auto f = cmd_portrait(c, log);
  for (const auto& s : f) {
    const bool corner = (s.at.x == 0 || s.at.x == 1) && (s.at.z == 0 || s.at.z == 1);
    if (corner) {
      EXPECT_EQ(s.velocity, (ReducedState{0, 0}));
    }
    if (s.at.z > 0 && s.at.z < 1 && s.at.x > 0 && s.at.x < 1) {
      if (s.at.x < 17.0 / 27 - 1e-9) {
        EXPECT_LT(s.velocity.x, 0.0);
      }
      if (s.at.x > 17.0 / 27 + 1e-9) {
        EXPECT_GT(s.velocity.x, 0.0);
      }
    }
  }
  const std::string first = slurp(c.svg);
  EXPECT_EQ(first.rfind("<svg", 0), 0u);
  c.svg = tmp.file("p2.svg");
  cmd_portrait(c, log);
  EXPECT_EQ(slurp(c.svg), first);
}

TEST(Commands, SweepRegions) {
  EXPECT_EQ(regime_cell(ModelKind::standard, 0.9, 7).regime(), "both-stable");
  EXPECT_EQ(regime_cell(ModelKind::standard, 0.9, 12).regime(), "utopia-only");
  EXPECT_EQ(regime_cell(ModelKind::standard, 0.9, 4).regime(), "dystopia-only");

  TempDir tmp;
  ScenarioConfig c;
  c.np_min = 0.1;
  c.np_max = 0.9;
  c.np_steps = 9;
  c.a_min = 0.5;
  c.a_max = 12;
  c.a_steps = 24;
  c.out = tmp.file("sweep.csv");
  std::ostringstream log;
  const auto cells = cmd_sweep(c, log);
  EXPECT_EQ(cells.size(), 9u * 24u);
  // The utopia frontier is a = n/(2(1-n)).
  for (const auto& cell : cells) {
    EXPECT_EQ(cell.utopia_stable, cell.a > cell.np / (2 * (1 - cell.np)));
  }
  std::ifstream in(c.out);
  EXPECT_EQ(read_sweep_csv(in), cells);
}

TEST(Commands, IncentivesRunEndToEnd) {
  TempDir tmp;
  ScenarioConfig c;
  c.model = ModelKind::incentives;
  c.a = 15;
  c.grid = 5;
  std::ostringstream log;
  c.out = tmp.file("eq.json");
  const auto r = cmd_equilibria(c, log);
  EXPECT_EQ(r.equilibria[3].classification, Stability::stable_node);
  c.out = tmp.file("b.csv");
  EXPECT_GT(cmd_basin(c, log).map.count(Outcome::utopia), 0u);
  c.out = tmp.file("f.csv");
  EXPECT_EQ(cmd_portrait(c, log).size(), 25u);
}

}  // namespace
}  // namespace modgame
