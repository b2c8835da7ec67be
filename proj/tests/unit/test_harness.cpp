#include "hatlab/harness.hpp"

#include <cmath>
#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace hatlab;

namespace {

ExperimentConfig flags(ConfigValues v) { return resolve_config({}, v); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("flags alone get defaults") {
  const ExperimentConfig c = flags({{"experiment", "EXP-A"}, {"f", "exp"}, {"t", "1"}});
  CHECK(c.experiment == "EXP-A");
  CHECK(c.bits == 256);
  CHECK(c.guard_bits == 32);
  CHECK(c.order == 0);
  CHECK(c.delta == 0.1);
  CHECK(c.format == OutputFormat::csv);
  CHECK(c.out.empty());
}

TEST_CASE("config file parsing and precedence") {
  const ConfigValues file = parse_config_text("# comment\nexperiment = EXP-B\nbits = 128   # trailing\n\nt=-0.6\n");
  CHECK(file.at("bits") == "128");
  CHECK(file.at("t") == "-0.6");
  const ExperimentConfig c = resolve_config(file, {{"bits", "512"}});
  CHECK(c.bits == 512);
  CHECK(c.experiment == "EXP-B");
  CHECK(resolve_config(file, {}).bits == 128);

  CHECK_THROWS_WITH_AS(parse_config_text("bitz = 12\n"), doctest::Contains("unknown key"), UsageError);
  CHECK_THROWS_AS(parse_config_text("bits = 1\nbits = 2\n"), UsageError);
  CHECK_THROWS_AS(parse_config_text("just words\n"), UsageError);
  CHECK_THROWS_AS(flags({{"bits", "12x"}}), UsageError);
  CHECK_THROWS_AS(flags({{"format", "xml"}}), UsageError);
  CHECK_THROWS_AS(read_config_file("/nonexistent/config.txt"), IoError);
}

TEST_CASE("caps are enforced with the cap in the message") {
  CHECK_THROWS_WITH_AS(flags({{"bits", "8"}}), doctest::Contains("precision too small"), CapError);
  CHECK_THROWS_WITH_AS(flags({{"order", "100000"}}), doctest::Contains("512"), CapError);
  CHECK_THROWS_AS(flags({{"delta", "1.5"}}), CapError);
  CHECK_THROWS_AS(flags({{"guard", "-1"}}), CapError);
}

TEST_CASE("grid grammar") {
  const PrecisionContext ctx = make_context(64, 0);
  const auto g = parse_grid("-1:1:5", ctx);
  REQUIRE(g.size() == 5);
  CHECK(g[1].exact_value()->coefficient == mpq_class(-1, 2));
  CHECK(g[4].exact_value()->coefficient == 1);
  const auto p = parse_grid("pi/8:pi/4:2", ctx);
  CHECK(p[1].exact_value()->times_pi);
  CHECK(parse_grid("1/3, 0.5 ,2", ctx).size() == 3);
  CHECK(parse_grid("7", ctx).size() == 1);
  CHECK_THROWS_AS(parse_grid("1:2", ctx), UsageError);
  CHECK_THROWS_AS(parse_grid("1:2:0", ctx), UsageError);
  CHECK_THROWS_AS(parse_grid("1:2:100000", ctx), CapError);
}

TEST_CASE("EXP-A hat-run table starts with f(t)") {
  const ExperimentResult r = run_experiment(flags({{"experiment", "EXP-A"}, {"f", "exp"}, {"t", "1"}}));
  CHECK_FALSE(r.exploratory);
  const Table* run = r.table("hat-run f=exp t=1");
  REQUIRE(run);
  CHECK(run->columns == std::vector<std::string>{"n", "term_re", "term_im", "partial_re", "partial_im", "abs_term"});
  const auto& row = run->rows.front();
  CHECK(row[0] == "0");
  CHECK(row[1].rfind("2.71828", 0) == 0);
  CHECK(row[2] == "0");
  CHECK(row[3] == row[1]);
  CHECK(row[5] == row[1]);
  REQUIRE(r.verdicts.size() == 1);
  CHECK(r.verdicts[0].pass);
  CHECK(r.verdicts[0].threshold == "abs_error<=1e-30");
  CHECK(to_csv(r).find("\n0,2.71828") != std::string::npos);
}

TEST_CASE("EXP-B flags t = -0.6 as divergent") {
  const ExperimentResult r = run_experiment(flags({{"experiment", "EXP-B"}, {"t", "-0.6"}}));
  const Table* c = r.table("classification");
  REQUIRE(c);
  CHECK(c->columns == std::vector<std::string>{"t", "R_hat", "abs_t", "delta", "case"});
  CHECK(c->rows.at(0).back() == "diverges");
  CHECK(r.table("partial-sums")->rows.at(0).at(4) == "fails");
}

TEST_CASE("EXP-D routes exact 1/3 down the non-dyadic path") {
  const ExperimentResult r = run_experiment(flags({{"experiment", "EXP-D"}, {"t", "1/3"}, {"order", "4"}}));
  CHECK(r.exploratory);
  CHECK(r.verdicts.empty());
  const Table& d = r.tables.front();
  CHECK(d.rows.at(0).at(0) == "1/3");
  CHECK(d.rows.at(0).at(1) == "false");
  CHECK(d.rows.at(0).at(5) == "false");
}

TEST_CASE("EXP-E reports e^8 for the third derivative at 0") {
  const ExperimentResult r = run_experiment(flags({{"experiment", "EXP-E"}, {"f", "lacunary:base=2"}, {"t", "pi/8"}}));
  const Table* d = r.table("derivatives-at-zero f=lacunary:base=2");
  REQUIRE(d);
  CHECK(d->rows.at(3).at(3).rfind("2.98095798704172827", 0) == 0);
  for (const auto& v : r.verdicts) CHECK(v.pass);
}

TEST_CASE("exploratory experiments carry no verdicts") {
  for (const char* id : {"EXP-C", "EXP-H"}) {
    const ExperimentResult r = run_experiment(flags({{"experiment", id}, {"order", "20"}}));
    CHECK(r.exploratory);
    CHECK(r.verdicts.empty());
    CHECK(to_csv(r).find("# label: exploratory") != std::string::npos);
  }
}

TEST_CASE("every verdict cites a threshold") {
  for (const char* id : {"EXP-A", "EXP-B", "EXP-F", "EXP-G"}) {
    const ExperimentResult r = run_experiment(flags({{"experiment", id}, {"t", "1/2"}}));
    CHECK_FALSE(r.verdicts.empty());
    for (const auto& v : r.verdicts) {
      CAPTURE(v.name);
      CHECK(v.pass);
      CHECK((v.threshold.find("<=") != std::string::npos || v.threshold.find(">=") != std::string::npos));
    }
  }
}

TEST_CASE("JSON round-trips every field") {
  const ExperimentResult r = run_experiment(flags({{"experiment", "EXP-F"}, {"t", "1"}}));
  const ExperimentResult back = from_json(to_json(r));
  CHECK(back.id == r.id);
  CHECK(back.metadata == r.metadata);
  REQUIRE(back.tables.size() == r.tables.size());
  for (size_t i = 0; i < r.tables.size(); ++i) {
    CHECK(back.tables[i].name == r.tables[i].name);
    CHECK(back.tables[i].rows == r.tables[i].rows);
  }
  REQUIRE(back.verdicts.size() == r.verdicts.size());
  CHECK(to_json(back) == to_json(r));
  // numeric cells parse back to the same value at the working precision
  const std::string cell = r.table("identity-residuals")->rows.at(0).at(2);
  const BigReal v = parse_real(cell, 288);
  CHECK(format(v) == cell);
}

TEST_CASE("re-running a config reproduces the output byte for byte") {
  const auto dir = std::filesystem::temp_directory_path() / "hatlab_harness_test";
  std::filesystem::create_directories(dir);
  for (auto fmt : {OutputFormat::csv, OutputFormat::json}) {
    const ExperimentConfig c = flags({{"experiment", "EXP-H"}, {"order", "16"}});
    emit(run_experiment(c), fmt, (dir / "a").string());
    emit(run_experiment(c), fmt, (dir / "b").string());
    CHECK(slurp(dir / "a") == slurp(dir / "b"));
    CHECK_FALSE(slurp(dir / "a").empty());
  }
  CHECK_THROWS_AS(emit(run_experiment(flags({{"experiment", "EXP-A"}, {"t", "1"}, {"f", "exp"}})), OutputFormat::csv,
                       "/nonexistent/dir/out.csv"),
                  IoError);
}

TEST_CASE("unknown experiments and missing shortcut arguments") {
  CHECK_THROWS_AS(run_experiment(flags({{"experiment", "EXP-Z"}})), UsageError);
  CHECK_THROWS_AS(classify_command(flags({{"f", "exp"}})), UsageError);
  const ExperimentResult c = classify_command(flags({{"f", "rational1p"}, {"t", "1"}, {"order", "200"}}));
  CHECK(c.table("classification")->rows.at(0).back() == "converges_to_taylor_at_zero");
  const ExperimentResult r = radius_command(flags({{"f", "exp"}, {"t", "1"}}));
  CHECK(r.table("radius-map")->rows.at(0).at(3) == "inf");
}

TEST_CASE("format_double is shortest round-trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  CHECK(format_double(1.0 / 0.0) == "inf");
}

TEST_CASE("radius shortcut adds grid-relative aggregates") {
  const ExperimentResult r = radius_command(flags({{"f", "rational1p"}, {"t", "0.5,1,2"}}));
  const Table* summary = r.table("radius-summary f=rational1p");
  REQUIRE(summary != nullptr);
  REQUIRE(summary->rows.size() == 1);
  const auto& row = summary->rows[0];
  CHECK(row[0] == "grid-relative");
  CHECK(row[2] == "3");
  // R = 1/alpha_hat is the smallest pole distance on the grid, S the largest
  CHECK(std::stod(row[7]) == doctest::Approx(1.5).epsilon(0.05));
  CHECK(std::stod(row[8]) == doctest::Approx(3.0).epsilon(0.05));

  const ExperimentResult e = radius_command(flags({{"f", "exp"}, {"t", "-1:1:3"}}));
  CHECK(e.table("radius-summary f=exp")->rows[0][7] == "inf");
}

TEST_CASE("EXP-C reports the bound fit over its grid") {
  const ExperimentResult r = run_experiment(flags({{"experiment", "EXP-C"}, {"t", "1/4,1/2,1"}, {"order", "12"}}));
  const Table* b = r.table("bound-report f=flatexp:s=2");
  REQUIRE(b != nullptr);
  CHECK(b->rows[0][0] == "grid-relative");
  CHECK(std::isfinite(std::stod(b->rows[0][1])));
  CHECK(std::isfinite(std::stod(b->rows[0][2])));
  CHECK(r.verdicts.empty());
}
