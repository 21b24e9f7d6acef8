#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lebopt/errors.hpp"
#include "lebopt/io.hpp"
#include "reference_tables.hpp"

using namespace lebopt;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static const fs::path dir = [] {
    auto p = fs::temp_directory_path() / ("lebopt_test_io_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

OptimResult small_run(Domain dom = Domain::cube(2), int degree = 2) {
  OptimConfig cfg;
  cfg.domain = dom;
  cfg.degree = degree;
  cfg.starts = 2;
  cfg.seed = 3;
  return optimize(cfg);
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

PointFile random_point_file(Domain dom, int degree, std::uint64_t seed) {
  Rng rng(seed);
  return PointFile{dom, degree, sample_uniform(dom, total_degree_dimension(degree, dom.dim), rng), 1.5, std::nullopt};
}

}  // namespace

TEST_CASE("result files round trip exactly") {
  const auto r = small_run();
  const auto path = (scratch_dir() / "round.json").string();
  save_result(r, path);
  CHECK_FALSE(fs::exists(path + ".tmp"));
  const auto back = load_result(path);
  CHECK(back.lambda == r.lambda);
  CHECK(back.best.points == r.best.points);
  CHECK(back.terminal_m == r.terminal_m);
  CHECK(back.terminal_cardinality == r.terminal_cardinality);
  CHECK(back.wall_time == r.wall_time);
  CHECK(back.best.meta.seed == r.best.meta.seed);
  REQUIRE(back.per_start.size() == r.per_start.size());
  for (std::size_t i = 0; i < r.per_start.size(); ++i) {
    CHECK(back.per_start[i].lambda == r.per_start[i].lambda);
    CHECK(back.per_start[i].points == r.per_start[i].points);
    CHECK(back.per_start[i].seed == r.per_start[i].seed);
    CHECK(back.per_start[i].trace.size() == r.per_start[i].trace.size());
  }
  CHECK(config_to_json(back.config) == config_to_json(r.config));
  CHECK(result_to_json(back) == result_to_json(r));
}

TEST_CASE("saving to an unwritable path fails without leaving files") {
  const auto r = small_run(Domain::cube(1), 1);
  const auto path = (scratch_dir() / "missing_dir" / "r.json").string();
  CHECK_THROWS_AS(save_result(r, path), IoError);
  CHECK_FALSE(fs::exists(path));
  CHECK_FALSE(fs::exists(path + ".tmp"));
  try {
    save_result(r, path);
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find(path) != std::string::npos);
  }
}

TEST_CASE("load errors") {
  const auto r = small_run(Domain::cube(1), 2);
  auto j = result_to_json(r);
  j["schema_version"] = kSchemaVersion + 1;
  const auto wrong = scratch_dir() / "version.json";
  write_file(wrong, j.dump());
  try {
    load_result(wrong.string());
    FAIL("expected a load error");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find("schema_version") != std::string::npos);
  }

  const auto good = scratch_dir() / "good.json";
  save_result(r, good.string());
  std::ifstream in(good);
  std::stringstream text;
  text << in.rdbuf();
  const auto truncated = scratch_dir() / "truncated.json";
  write_file(truncated, text.str().substr(0, text.str().size() / 2));
  CHECK_THROWS_AS(load_result(truncated.string()), LoadError);
  CHECK_THROWS_AS(resume(truncated.string(), r.config), LoadError);

  auto missing = result_to_json(r);
  missing["result"].erase("best");
  const auto partial = scratch_dir() / "partial.json";
  write_file(partial, missing.dump());
  CHECK_THROWS_AS(load_result(partial.string()), LoadError);
  CHECK_THROWS_AS(load_result((scratch_dir() / "nope.json").string()), LoadError);
}

TEST_CASE("resume from a file records its parent") {
  const auto r = small_run(Domain::cube(1), 3);
  const auto path = (scratch_dir() / "parent.json").string();
  save_result(r, path);
  const auto again = resume(path, r.config);
  CHECK(again.parent == path);
  CHECK(std::abs(again.lambda - r.lambda) <= 1e-6);
  const auto child = (scratch_dir() / "child.json").string();
  save_result(again, child);
  CHECK(load_result(child).parent == path);
}

TEST_CASE("point export") {
  const auto pf66 = random_point_file(Domain::cube(2), 10, 1);
  std::ostringstream csv66;
  export_points(pf66, ExportFormat::Csv, csv66);
  const auto l66 = lines(csv66.str());
  CHECK(l66.size() == 66 + 2);
  CHECK(l66[0] == "# domain=cube,n=10,d=2,N=66,lambda=1.5");
  CHECK(l66[1] == "x1,x2");

  const auto pf56 = random_point_file(Domain::ball(3), 5, 2);
  std::ostringstream proj;
  export_points(pf56, ExportFormat::Csv, proj, std::make_pair(1, 2));
  const auto lp = lines(proj.str());
  CHECK(lp.size() == 56 + 2);
  CHECK(lp[1] == "x1,x2");
  for (std::size_t i = 2; i < lp.size(); ++i) CHECK(std::count(lp[i].begin(), lp[i].end(), ',') == 1);

  std::ostringstream sink;
  CHECK_THROWS_AS(export_points(pf56, ExportFormat::Csv, sink, std::make_pair(1, 4)), UsageError);
  CHECK_THROWS_AS(export_points(pf56, ExportFormat::Csv, sink, std::make_pair(2, 2)), UsageError);
  CHECK_THROWS_AS(export_points(pf56, ExportFormat::Csv, sink, std::make_pair(0, 1)), UsageError);
}

TEST_CASE("CSV to JSON to CSV keeps every digit") {
  const auto pf = random_point_file(Domain::ball(2), 4, 9);
  const auto csv_path = scratch_dir() / "pts.csv";
  const auto json_path = scratch_dir() / "pts.json";
  std::ostringstream first;
  export_points(pf, ExportFormat::Csv, first);
  write_file(csv_path, first.str());
  const auto from_csv = read_point_file(csv_path.string());
  CHECK(from_csv.points == pf.points);
  CHECK(from_csv.domain == pf.domain);
  CHECK(from_csv.degree == pf.degree);
  CHECK(from_csv.lambda == pf.lambda);
  std::ostringstream as_json;
  export_points(from_csv, ExportFormat::Json, as_json);
  write_file(json_path, as_json.str());
  const auto from_json = read_point_file(json_path.string());
  CHECK(from_json.points == pf.points);
  std::ostringstream second;
  export_points(from_json, ExportFormat::Csv, second);
  CHECK(second.str() == first.str());
}

TEST_CASE("result files are point files") {
  const auto r = small_run();
  const auto path = (scratch_dir() / "pf.json").string();
  save_result(r, path);
  const auto pf = read_point_file(path);
  CHECK(pf.points == r.best.points);
  CHECK(pf.lambda == r.lambda);
  CHECK(pf.mesh_m == r.terminal_m);
  CHECK(pf.to_point_set().size() == 6);
}

TEST_CASE("campaign parsing") {
  std::istringstream empty("# nothing here\n\n");
  CHECK_THROWS_AS(parse_campaign(empty), UsageError);
  std::istringstream blank("");
  CHECK_THROWS_AS(parse_campaign(blank), UsageError);
  std::istringstream bad("cube,2,3\n");
  CHECK_THROWS_AS(parse_campaign(bad), UsageError);
  std::istringstream bad_domain("simplex,2,3,1,1\n");
  CHECK_THROWS_AS(parse_campaign(bad_domain), UsageError);
  std::istringstream ok("domain,dim,degree,starts,seed\ncube, 2, 3, 10, 7  # comment\nball,3,2,4,1\n");
  const auto rows = parse_campaign(ok);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].domain == Domain::cube(2));
  CHECK(rows[0].degree == 3);
  CHECK(rows[0].starts == 10);
  CHECK(rows[0].seed == 7);
  CHECK(rows[1].domain == Domain::ball(3));
  CHECK(campaign_file_name(rows[0]) == "cube_d2_n3_s7.json");
}

TEST_CASE("campaign over the interval and the disk") {
  std::istringstream spec(
      "cube,1,1,3,1\ncube,1,2,3,1\ncube,1,3,3,1\ncube,1,4,3,1\n"
      "ball,2,1,3,1\nball,2,2,3,1\nball,2,3,3,1\n"
      "ball,4,1,1,1\n");
  const auto rows = parse_campaign(spec);
  const auto dir = (scratch_dir() / "campaign").string();
  const auto outcome = run_campaign(rows, OptimConfig{}, dir, 2);
  CHECK(outcome.result_files.size() == 7);
  REQUIRE(outcome.failures.size() == 1);
  CHECK(outcome.failures[0].rfind("row 8:", 0) == 0);

  std::ifstream in(outcome.summary_path);
  std::stringstream text;
  text << in.rdbuf();
  const auto summary = lines(text.str());
  REQUIRE(summary.size() == 3);
  CHECK(summary[0].rfind("domain,d,n1,n1_full,n2,n2_full,n3,n3_full,n4,n4_full", 0) == 0);
  CHECK(summary[1].rfind("ball,2,1.67,", 0) == 0);
  CHECK(summary[2].rfind("cube,1,1.00,", 0) == 0);

  // Full-precision columns against the published rows.
  auto values = [](const std::string& line) {
    std::vector<double> out;
    std::istringstream s(line);
    std::string field;
    int column = 0;
    while (std::getline(s, field, ',')) {
      if (column >= 3 && column % 2 == 1 && !field.empty()) out.push_back(std::stod(field));
      ++column;
    }
    return out;
  };
  const auto ball = values(summary[1]);
  const auto cube = values(summary[2]);
  REQUIRE(ball.size() == 3);
  REQUIRE(cube.size() == 4);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(ball[k] - test::kBallTable.at(2)[k]) <= 0.03 * test::kBallTable.at(2)[k]);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(cube[k] - test::kCubeTable.at(1)[k]) <= 0.02);

  // The summary regenerates byte for byte from the stored files.
  CHECK(summarize_files(outcome.result_files) == text.str());
}
