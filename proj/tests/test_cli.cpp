#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "levinson2d/levinson2d.hpp"
#include "oracles.hpp"

using namespace levinson2d;
using std::numbers::pi;

namespace {

RunConfig config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string config_error_field(const std::string& text) {
  try {
    (void)config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

std::size_t column(const Table& t, const std::string& name) {
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    if (t.columns[i] == name) return i;
  ADD_FAILURE() << "no column " << name;
  return 0;
}

double number(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* l = std::get_if<long>(&c)) return static_cast<double>(*l);
  ADD_FAILURE() << "cell is not numeric";
  return std::nan("");
}

std::string text(const Cell& c) { return std::get<std::string>(c); }

std::string csv(const Table& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

// Rows of a long sweep table for one series, in x order.
std::vector<std::pair<double, double>> series(const Table& t, const std::string& name, const std::string& j = "1/2") {
  std::vector<std::pair<double, double>> out;
  for (const auto& row : t.rows)
    if (text(row[3]) == name && text(row[2]) == j) out.emplace_back(number(row[1]), number(row[4]));
  return out;
}

const char* kFree = R"(
[potential]
kind = square_well
V0 = 0
[physics]
j = 1/2, 3/2, 5/2, -1/2, -3/2
)";

const char* kDepthSweep = R"(
[potential]
kind = square_well
[physics]
j = 1/2
[sweep]
parameter = V0
from = 0
to = -12
steps = 50
)";

}  // namespace

TEST(Config, IntegerJNamesTheField) {
  EXPECT_EQ(config_error_field("[physics]\nj = 1\n"), "physics.j");
  EXPECT_EQ(config_error_field("[physics]\nj = 1/2, 2\n"), "physics.j");
  EXPECT_EQ(config_error_field("[physics]\nj = 3/4\n"), "physics.j");
}

TEST(Config, OtherFieldErrors) {
  EXPECT_EQ(config_error_field("[potential]\nkind = gaussian\n"), "potential.kind");
  EXPECT_EQ(config_error_field("[potential]\nkind = piecewise_linear\n"), "potential.r");
  EXPECT_EQ(config_error_field("[potential]\nkind = sampled_table\nr = 0.5, 1\nV = -1\n"), "potential.V");
  EXPECT_EQ(config_error_field("[potential]\nr0 = -1\n"), "potential.r0");
  EXPECT_EQ(config_error_field("[tolerances]\ntol_E = 0\n"), "tolerances.tol_E");
  EXPECT_EQ(config_error_field("[tolerances]\nresidual_tol = abc\n"), "tolerances.residual_tol");
  EXPECT_EQ(config_error_field("[phase]\nE = 0.5\n"), "phase.E");
  EXPECT_EQ(config_error_field("[sweep]\nsteps = 2.5\n"), "sweep.steps");
  EXPECT_EQ(config_error_field("[output]\nformat = xml\n"), "output.format");
  EXPECT_EQ(config_error_field("[physics]\nM = 0\n"), "physics.M");
}

TEST(Config, ParsesListsAndHalfIntegers) {
  const RunConfig c = config("[physics]\nj = 1/2, -3/2, 2.5\n[phase]\nE = 1.5, -2\n");
  ASSERT_EQ(c.j_list.size(), 3u);
  EXPECT_EQ(c.j_list[1].twice, -3);
  EXPECT_EQ(c.j_list[2].twice, 5);
  EXPECT_EQ(c.energies, (std::vector<double>{1.5, -2.0}));
}

TEST(Config, SweepRangeIsInclusive) {
  SweepRange r{"V0", 0.0, -2.0, 5, false};
  EXPECT_EQ(r.values(0), (std::vector<double>{0.0, -0.5, -1.0, -1.5, -2.0}));
  r.random = true;
  EXPECT_EQ(r.values(7), r.values(7));
  EXPECT_NE(r.values(7), r.values(8));
  for (double v : r.values(7)) {
    EXPECT_LE(v, 0.0);
    EXPECT_GE(v, -2.0);
  }
}

TEST(Verify, FreeParticleRows) {
  const auto res = cmd_verify(config(kFree));
  EXPECT_EQ(res.exit_code, 0);
  ASSERT_EQ(res.table.rows.size(), 5u);
  for (const auto& row : res.table.rows) {
    EXPECT_EQ(number(row[column(res.table, "lhs_over_pi")]), 0.0);
    EXPECT_EQ(number(row[column(res.table, "n_j")]), 0.0);
    EXPECT_EQ(text(row[column(res.table, "classification")]), "VERIFIED");
  }
}

TEST(Verify, TwoBoundStateWellRow) {
  // Depth where the oracle count first reaches two at r0 = 2, then a margin past it.
  const auto count = [](double V0) { return oracle::well_bound_energies(V0, 0.5, 1.0, 2.0, 4000).size(); };
  double a = -0.5, b = -2.0;
  ASSERT_EQ(count(a), 1u);
  ASSERT_EQ(count(b), 2u);
  for (int i = 0; i < 30; ++i) {
    const double m = 0.5 * (a + b);
    (count(m) >= 2 ? b : a) = m;
  }
  std::ostringstream ini;
  ini.precision(17);
  ini << "[potential]\nkind = square_well\nr0 = 2\nV0 = " << b - 0.25 << "\n[physics]\nj = 1/2\n";
  const auto res = cmd_verify(config(ini.str()));
  EXPECT_EQ(res.exit_code, 0);
  ASSERT_EQ(res.table.rows.size(), 1u);
  const auto& row = res.table.rows[0];
  EXPECT_EQ(number(row[column(res.table, "n_j")]), 2.0);
  EXPECT_NEAR(number(row[column(res.table, "lhs_over_pi")]), 2.0, 1e-9);
}

TEST(Verify, ExitCodes) {
  auto tail = config("[potential]\nV0 = -2.5\ntail_b = 0.3\n[physics]\nj = 5/2\n");
  EXPECT_EQ(cmd_verify(tail).exit_code, 0);
  tail.residual_tol = 1e-300;  // any rounding in the residual now counts as a violation
  EXPECT_EQ(cmd_verify(tail).exit_code, 4);
  EXPECT_EQ(cmd_verify(config("[potential]\nV0 = -1\ntail_b = 0.5\ntail_n = 1\n")).exit_code, 3);
}

TEST(Phase, ZeroCouplingRowsHaveZeroPhase) {
  const auto res = cmd_phase(config("[potential]\nV0 = -4\n[physics]\nj = 1/2, -1/2, 3/2\n[phase]\nE = 1.05, -1.5\n"));
  std::size_t zero_rows = 0;
  for (const auto& row : res.table.rows) {
    if (number(row[1]) != 0.0) continue;
    ++zero_rows;
    EXPECT_EQ(number(row[5]), 0.0);
  }
  EXPECT_EQ(zero_rows, 6u);
}

TEST(Phase, EtaContinuousAlongEachPath) {
  const auto res = cmd_phase(config("[potential]\nV0 = -9\n[physics]\nj = 1/2, -3/2\n[phase]\nE = 1.02, 3, -1.1\n"
                                    "lambda_steps = 8\n"));
  ASSERT_GT(res.table.rows.size(), 6u * 9u - 1);
  for (std::size_t i = 1; i < res.table.rows.size(); ++i) {
    const auto& a = res.table.rows[i - 1];
    const auto& b = res.table.rows[i];
    if (number(b[1]) == 0.0) continue;  // a new (j, E) path starts
    EXPECT_LT(std::abs(number(b[5]) - number(a[5])), pi / 2) << i;
    EXPECT_GT(number(b[1]) * number(a[1]), -1e-300);
  }
  // tan_eta agrees with eta.
  for (const auto& row : res.table.rows) {
    const double eta = number(row[5]), t = number(row[4]);
    if (std::abs(std::cos(eta)) > 1e-3) {
      EXPECT_NEAR(std::tan(eta), t, 1e-6 * (1 + std::abs(t)));
    }
  }
}

TEST(Phase, RequiresEnergies) {
  try {
    (void)cmd_phase(config(kFree));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "phase.E");
  }
}

TEST(Output, JsonRoundTripsEveryDouble) {
  const auto res = cmd_phase(config("[potential]\nV0 = -4\n[physics]\nj = 1/2\n[phase]\nE = 1.3\n"));
  const auto doc = nlohmann::json::parse(to_json(res.table, {}, res.metadata).dump());
  ASSERT_EQ(doc["rows"].size(), res.table.rows.size());
  for (std::size_t i = 0; i < res.table.rows.size(); ++i)
    for (std::size_t c = 1; c < res.table.columns.size(); ++c)
      EXPECT_EQ(doc["rows"][i][res.table.columns[c]].get<double>(), number(res.table.rows[i][c]));
  EXPECT_EQ(doc["schema_version"], "1.0.0");
}

TEST(Output, CsvRoundTripsEveryDouble) {
  const auto res = cmd_phase(config("[potential]\nV0 = -4\n[physics]\nj = 1/2\n[phase]\nE = 1.3\n"));
  std::istringstream in(csv(res.table));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "j,lambda,E,k,tan_eta,eta");
  for (const auto& row : res.table.rows) {
    ASSERT_TRUE(std::getline(in, line));
    std::istringstream fields(line);
    std::string f;
    std::getline(fields, f, ',');
    for (std::size_t c = 1; c < row.size(); ++c) {
      std::getline(fields, f, ',');
      EXPECT_EQ(std::strtod(f.c_str(), nullptr), number(row[c])) << f;
      EXPECT_LE(f.size(), 24u);
    }
  }
}

TEST(Output, CsvQuotingAndNonFinite) {
  Table t{{"a", "b", "c"}, {{std::string("x,\"y\""), std::nan(""), std::vector<double>{1.5, -0.25}}}};
  EXPECT_EQ(csv(t), "a,b,c\n\"x,\"\"y\"\"\",nan,1.5;-0.25\n");
  const auto doc = to_json(t, {}, {});
  EXPECT_TRUE(doc["rows"][0]["b"].is_null());
}

TEST(Output, DeterministicAcrossRunsAndThreads) {
  RunConfig c = config(kDepthSweep);
  c.sweep.steps = 12;
  const std::string first = csv(cmd_sweep_family(c).table);
  EXPECT_EQ(first, csv(cmd_sweep_family(c).table));
  c.threads = 3;
  EXPECT_EQ(first, csv(cmd_sweep_family(c).table));
  RunConfig v = config(kFree);
  v.threads = 4;
  EXPECT_EQ(csv(cmd_verify(config(kFree)).table), csv(cmd_verify(v).table));
}

TEST(Spectrum, FreeRows) {
  const auto res = cmd_spectrum(config(kFree));
  ASSERT_EQ(res.table.rows.size(), 5u);
  const char* expected[] = {"at_plus_M", "none", "none", "at_minus_M", "none"};
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& row = res.table.rows[i];
    EXPECT_TRUE(std::get<std::vector<double>>(row[column(res.table, "bound_energies")]).empty());
    EXPECT_EQ(text(row[column(res.table, "half_bound")]), expected[i]);
  }
}

TEST(Spectrum, MethodAgreementAcrossRegressionFamily) {
  // V0 = +-3 is avoided: for r0 = M = 1 it puts j = 1/2 (and j = -1/2 mirrored) exactly on a threshold.
  for (double V0 : {-0.5, -2.0, -4.5, -7.0, 3.5, 6.0}) {
    std::ostringstream ini;
    ini << "[potential]\nV0 = " << V0 << "\n[physics]\nj = 1/2, 3/2, -1/2\n";
    const auto res = cmd_spectrum(config(ini.str()));
    for (const auto& row : res.table.rows) {
      ASSERT_FALSE(std::get<bool>(row[column(res.table, "critical_plus")]) ||
                   std::get<bool>(row[column(res.table, "critical_minus")]));
      EXPECT_TRUE(std::get<bool>(row[column(res.table, "method_agreement")])) << V0;
      EXPECT_EQ(number(row[column(res.table, "sweep_count")]), number(row[column(res.table, "direct_count")]));
    }
  }
}

TEST(Spectrum, ToleranceOverrideInMetadata) {
  const auto res = cmd_spectrum(config("[tolerances]\ntol_E = 1e-9\ntol_half = 2e-6\n"));
  EXPECT_EQ(res.metadata["tolerances"]["tol_E"].get<double>(), 1e-9);
  EXPECT_EQ(res.metadata["tolerances"]["tol_half"].get<double>(), 2e-6);
}

TEST(SweepFamily, BirthsCoLocateWithPhaseJumps) {
  const auto res = cmd_sweep_family(config(kDepthSweep));
  const auto n = series(res.table, "n_j");
  const auto up = series(res.table, "eta_plus_over_pi");
  const auto down = series(res.table, "eta_minus_over_pi");
  ASSERT_EQ(n.size(), 50u);
  // A jump of the given sign in s within one grid step of index i.
  const auto jump_near = [](const std::vector<std::pair<double, double>>& s, std::size_t i, long sign) {
    for (std::size_t k = std::max<std::size_t>(i, 2) - 1; k <= std::min(i + 1, s.size() - 1); ++k)
      if (sign * std::lround(s[k].second - s[k - 1].second) >= 1) return true;
    return false;
  };
  int births = 0, losses = 0;
  for (std::size_t i = 1; i < n.size(); ++i) {
    const long dn = std::lround(n[i].second - n[i - 1].second);
    if (dn > 0) {
      ++births;
      EXPECT_TRUE(jump_near(up, i, +1)) << "birth at V0 = " << n[i].first;
    }
    if (dn < 0) {
      ++losses;
      EXPECT_TRUE(jump_near(down, i, -1)) << "loss at V0 = " << n[i].first;
    }
  }
  EXPECT_GE(births, 3);
  EXPECT_GE(losses, 2);
}

TEST(SweepFamily, RepulsiveSeriesFlat) {
  const auto res = cmd_sweep_family(config("[physics]\nj = 1/2, 3/2\n[sweep]\nparameter = V0\nfrom = 0\nto = 1.5\nsteps = 7\n"));
  EXPECT_EQ(res.exit_code, 0);
  for (const char* name : {"n_j", "eta_plus_over_pi", "eta_minus_over_pi"})
    for (const char* j : {"1/2", "3/2"}) {
      const auto s = series(res.table, name, j);
      ASSERT_EQ(s.size(), 7u);
      for (const auto& [x, y] : s) EXPECT_NEAR(y, 0.0, 1e-9) << name << ' ' << x;
    }
}

TEST(SweepFamily, EmptyRange) {
  const auto res = cmd_sweep_family(config("[sweep]\nparameter = V0\nfrom = 0\nto = -1\nsteps = 0\n"));
  EXPECT_EQ(res.exit_code, 0);
  EXPECT_TRUE(res.table.rows.empty());
  EXPECT_EQ(csv(res.table), "parameter,value,j,series,y\n");
}

TEST(SweepFamily, TailCouplingAxis) {
  const auto res = cmd_sweep_family(config("[potential]\nV0 = -2.5\ntail_b = 0.1\n[physics]\nj = 3/2\n"
                                           "[sweep]\nparameter = b\nfrom = -0.2\nto = 0.4\nsteps = 4\n"));
  EXPECT_EQ(res.exit_code, 0);
  const auto n = series(res.table, "n_j", "3/2");
  ASSERT_EQ(n.size(), 4u);
  EXPECT_DOUBLE_EQ(n.front().first, -0.2);
  EXPECT_DOUBLE_EQ(n.back().first, 0.4);
}

namespace {

struct CliRun {
  int status;
  std::string err;
};

CliRun run_cli(const std::string& args, const std::string& ini) {
  const auto dir = std::filesystem::temp_directory_path() / "levinson2d_test_cli";
  std::filesystem::create_directories(dir);
  const auto cfg = dir / "run.ini";
  std::ofstream(cfg) << ini;
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string(LEVINSON2D_CLI) + " " + args + " --config " + cfg.string() + " --out " +
                          (dir / "out.txt").string() + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, ss.str()};
}

}  // namespace

TEST(Cli, ExitStatus) {
  EXPECT_EQ(run_cli("verify", kFree).status, 0);
  const CliRun bad_j = run_cli("verify", "[physics]\nj = 1\n");
  EXPECT_EQ(bad_j.status, 2);
  EXPECT_NE(bad_j.err.find("physics.j"), std::string::npos) << bad_j.err;
  EXPECT_EQ(run_cli("verify", "[potential]\nV0 = -1\ntail_b = 0.5\ntail_n = 1\n").status, 3);
  EXPECT_EQ(run_cli("verify", "[potential]\nV0 = -2.5\ntail_b = 0.3\n[physics]\nj = 5/2\n"
                              "[tolerances]\nresidual_tol = 1e-300\n").status, 4);
  EXPECT_EQ(run_cli("spectrum --format xml", kFree).status, 2);
  EXPECT_EQ(run_cli("sweep-family", "[sweep]\nsteps = 0\n").status, 0);
}
