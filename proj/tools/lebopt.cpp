// lebopt: optimal interpolation points for total-degree polynomials on the
// cube and the ball.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>

#include "CLI11.hpp"
#include "lebopt/analysis.hpp"
#include "lebopt/errors.hpp"
#include "lebopt/io.hpp"

using namespace lebopt;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;

void progress_to_stderr(const std::string& line) { std::cerr << line << std::endl; }

// Writes to `path`, or to stdout when it is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

std::string full(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

struct OptimizeFlags {
  std::string domain = "cube";
  int dim = 1;
  int degree = 1;
  int starts = 10;
  std::uint64_t seed = 0;
  double refine_tol = 1e-3;
  int mesh_cap = kDefaultMeshCap;
  std::size_t max_mesh_points = 400000;
  int max_iterations = 500;
  int threads = 0;
  std::string out;
};

void add_search_flags(CLI::App* cmd, OptimizeFlags& f, bool with_out = true) {
  cmd->add_option("--refine-tol", f.refine_tol, "Stop refining when lambda changes less than this")
      ->capture_default_str();
  cmd->add_option("--mesh-cap", f.mesh_cap, "Largest per-coordinate mesh resolution")
      ->capture_default_str();
  cmd->add_option("--max-mesh-points", f.max_mesh_points, "Largest mesh cardinality")
      ->capture_default_str();
  cmd->add_option("--max-iterations", f.max_iterations, "Inner iterations per temperature stage")
      ->capture_default_str();
  cmd->add_option("--threads", f.threads, "Worker threads for the starts (0: all cores)")
      ->capture_default_str();
  if (with_out) cmd->add_option("--out", f.out, "Result JSON file (default: stdout)");
}

void apply_search_flags(const OptimizeFlags& f, OptimConfig& cfg) {
  cfg.refine_tol = f.refine_tol;
  cfg.mesh_cap = f.mesh_cap;
  cfg.max_mesh_points = f.max_mesh_points;
  cfg.inner.max_iterations = f.max_iterations;
  cfg.threads = f.threads;
}

void write_result(const OptimResult& r, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << result_to_json(r).dump(2) << "\n";
  } else {
    save_result(r, out);
  }
  std::cerr << "lambda " << full(r.lambda) << " on m=" << r.terminal_m
            << " (" << r.terminal_cardinality << " points), " << std::fixed
            << std::setprecision(1) << r.wall_time << " s" << std::endl;
}

int run_optimize(const OptimizeFlags& f) {
  OptimConfig cfg;
  cfg.domain = Domain(parse_domain_kind(f.domain), f.dim);
  cfg.degree = f.degree;
  cfg.starts = f.starts;
  cfg.seed = f.seed;
  apply_search_flags(f, cfg);
  cfg.validate();
  write_result(optimize(cfg, progress_to_stderr), f.out);
  return 0;
}

int run_resume(const std::string& from, const OptimizeFlags& f, const std::set<std::string>& given) {
  const OptimResult previous = load_result(from);
  OptimConfig cfg = previous.config;
  // Flags that were not given keep the stored values.
  if (given.contains("--refine-tol")) cfg.refine_tol = f.refine_tol;
  if (given.contains("--mesh-cap")) cfg.mesh_cap = f.mesh_cap;
  if (given.contains("--max-mesh-points")) cfg.max_mesh_points = f.max_mesh_points;
  if (given.contains("--max-iterations")) cfg.inner.max_iterations = f.max_iterations;
  if (given.contains("--threads")) cfg.threads = f.threads;
  cfg.validate();
  OptimResult r = resume(previous, cfg, progress_to_stderr);
  r.parent = from;
  write_result(r, f.out);
  return 0;
}

int run_evaluate(const std::string& points, int m, int mesh_cap, const std::string& dump,
                 const std::string& out) {
  const PointFile pf = read_point_file(points);
  const PointSet ps = pf.to_point_set();
  ps.validate();
  if (m == 0) m = pf.mesh_m ? *pf.mesh_m : default_resolution(pf.degree, mesh_cap);
  const Mesh mesh = make_mesh(pf.domain, pf.degree, m);
  const LebesgueReport rep = lebesgue_constant(ps, mesh, !dump.empty());
  json j = {{"lambda", rep.value},
            {"argmax", rep.argmax},
            {"argmax_index", rep.argmax_index},
            {"mesh", {{"id", rep.mesh_id}, {"m", rep.mesh_m}, {"cardinality", rep.mesh_cardinality}}},
            {"N", ps.size()}};
  if (!dump.empty()) {
    std::ostringstream csv;
    for (int a = 0; a < pf.domain.dim; ++a) csv << "x" << a + 1 << ",";
    csv << "lebesgue\n";
    for (Eigen::Index i = 0; i < mesh.points.rows(); ++i) {
      for (int a = 0; a < pf.domain.dim; ++a) csv << full(mesh.points(i, a)) << ",";
      csv << full((*rep.per_point)(i)) << "\n";
    }
    emit(dump, csv.str());
  }
  emit(out, j.dump(2) + "\n");
  return 0;
}

int run_mesh_info(const std::string& domain, int dim, int degree, int m, int mesh_cap,
                  const std::string& csv) {
  const Domain dom(parse_domain_kind(domain), dim);
  if (m == 0) m = default_resolution(degree, mesh_cap);
  const Mesh mesh = make_mesh(dom, degree, m);
  json j = {{"id", mesh.id()},
            {"domain", to_string(dom.kind)},
            {"dim", dim},
            {"degree", degree},
            {"m", mesh.m},
            {"cardinality", mesh.size()},
            {"raw_cardinality", mesh.raw_cardinality},
            {"constant", mesh.constant ? json(*mesh.constant) : json(nullptr)}};
  if (!csv.empty()) {
    std::ostringstream s;
    write_mesh_csv(mesh, s);
    emit(csv, s.str());
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_fit(const std::vector<std::string>& files, const std::string& csv) {
  std::map<std::pair<DomainKind, int>, std::map<int, double>> groups;
  for (const auto& path : files) {
    const OptimResult r = load_result(path);
    auto& g = groups[{r.config.domain.kind, r.config.domain.dim}];
    auto [it, inserted] = g.emplace(r.config.degree, r.lambda);
    if (!inserted) it->second = std::min(it->second, r.lambda);
  }
  json fits = json::array();
  std::ostringstream table;
  table << "domain,d,n,lambda,model\n";
  for (const auto& [key, by_degree] : groups) {
    const auto [kind, dim] = key;
    const std::vector<std::pair<int, double>> data(by_degree.begin(), by_degree.end());
    const GrowthFit fit = kind == DomainKind::Cube ? fit_cube_growth(data, dim)
                                                   : fit_ball_growth(data, dim);
    json j = fit_to_json(fit);
    j["domain"] = to_string(kind);
    fits.push_back(std::move(j));
    for (const auto& [n, lambda] : data) {
      table << to_string(kind) << "," << dim << "," << n << "," << full(lambda) << ","
            << full(fit.predict(n)) << "\n";
    }
  }
  if (!csv.empty()) emit(csv, table.str());
  std::cout << fits.dump(2) << "\n";
  return 0;
}

int run_compare(const std::string& a_path, const std::string& b_path, const std::string& pairs) {
  const PointSet a = read_point_file(a_path).to_point_set();
  const PointSet b = read_point_file(b_path).to_point_set();
  const SetMatch match = setdistance(a, b);
  if (!pairs.empty()) {
    const Points image = match.symmetry.apply(b.points);
    std::ostringstream csv;
    const int d = a.dim();
    for (int a_i = 0; a_i < d; ++a_i) csv << "a" << a_i + 1 << ",";
    for (int b_i = 0; b_i < d; ++b_i) csv << "b" << b_i + 1 << ",";
    csv << "distance\n";
    for (Eigen::Index i = 0; i < a.points.rows(); ++i) {
      const auto k = match.assignment[static_cast<std::size_t>(i)];
      for (int c = 0; c < d; ++c) csv << full(a.points(i, c)) << ",";
      for (int c = 0; c < d; ++c) csv << full(image(k, c)) << ",";
      csv << full((a.points.row(i) - image.row(k)).norm()) << "\n";
    }
    emit(pairs, csv.str());
  }
  json j = {{"distance", match.distance},
            {"group_restricted", match.group_restricted},
            {"symmetry", {{"permutation", match.symmetry.permutation}, {"signs", match.symmetry.signs}}}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_export(const std::string& input, const std::string& format, const std::vector<int>& proj,
               const std::string& out) {
  const PointFile pf = read_point_file(input);
  std::optional<std::pair<int, int>> projection;
  if (!proj.empty()) {
    if (proj.size() != 2) throw UsageError("export: --proj takes exactly two indices");
    projection = std::make_pair(proj[0], proj[1]);
  }
  std::ostringstream s;
  export_points(pf, format == "json" ? ExportFormat::Json : ExportFormat::Csv, s, projection);
  emit(out, s.str());
  return 0;
}

int run_campaign_cmd(const std::string& file, const std::string& out_dir, int jobs,
                     const OptimizeFlags& f, bool summarize_only) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot open campaign file " + file);
  const auto rows = parse_campaign(in);
  if (summarize_only) {
    std::vector<std::string> paths;
    for (const auto& row : rows) {
      paths.push_back((std::filesystem::path(out_dir) / campaign_file_name(row)).string());
    }
    std::cout << summarize_files(paths);
    return 0;
  }
  OptimConfig base;
  apply_search_flags(f, base);
  const CampaignOutcome outcome = run_campaign(rows, base, out_dir, jobs, progress_to_stderr);
  for (const auto& failure : outcome.failures) std::cerr << "failed: " << failure << std::endl;
  std::ifstream summary(outcome.summary_path);
  std::cout << summary.rdbuf();
  return outcome.failures.empty() ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal interpolation points for total-degree polynomials on the cube and ball"};
  app.require_subcommand(1);

  OptimizeFlags opt;
  auto* optimize_cmd = app.add_subcommand("optimize", "Multi-start search for a minimal Lebesgue constant");
  optimize_cmd->add_option("--domain", opt.domain, "cube or ball")
      ->check(CLI::IsMember({"cube", "ball"}))
      ->capture_default_str();
  optimize_cmd->add_option("--dim", opt.dim, "Dimension d")->required();
  optimize_cmd->add_option("--degree", opt.degree, "Total degree n")->required();
  optimize_cmd->add_option("--starts", opt.starts, "Random starts")->capture_default_str();
  optimize_cmd->add_option("--seed", opt.seed, "RNG seed")->capture_default_str();
  add_search_flags(optimize_cmd, opt);

  OptimizeFlags res;
  std::string resume_from;
  auto* resume_cmd = app.add_subcommand("resume", "Continue from a stored result file");
  resume_cmd->add_option("result", resume_from, "Result JSON")->required();
  add_search_flags(resume_cmd, res);

  std::string eval_points, eval_dump, eval_out;
  int eval_m = 0, eval_cap = kDefaultMeshCap;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Lebesgue constant of a point set on a mesh");
  evaluate_cmd->add_option("points", eval_points, "Result JSON, point JSON or point CSV")->required();
  evaluate_cmd->add_option("--m", eval_m, "Mesh resolution (default: the stored terminal mesh, else min(2^(n-1)+1, cap))");
  evaluate_cmd->add_option("--mesh-cap", eval_cap, "Cap for the default resolution")->capture_default_str();
  evaluate_cmd->add_option("--dump", eval_dump, "CSV of the Lebesgue function over the mesh");
  evaluate_cmd->add_option("--out", eval_out, "Report JSON (default: stdout)");

  std::string mesh_domain = "cube", mesh_csv;
  int mesh_dim = 1, mesh_degree = 1, mesh_m = 0, mesh_cap = kDefaultMeshCap;
  auto* mesh_cmd = app.add_subcommand("mesh-info", "Describe (and optionally export) an admissible mesh");
  mesh_cmd->add_option("--domain", mesh_domain, "cube or ball")
      ->check(CLI::IsMember({"cube", "ball"}))
      ->capture_default_str();
  mesh_cmd->add_option("--dim", mesh_dim, "Dimension d")->required();
  mesh_cmd->add_option("--degree", mesh_degree, "Total degree n")->required();
  mesh_cmd->add_option("--m", mesh_m, "Resolution (default: min(2^(n-1)+1, cap))");
  mesh_cmd->add_option("--mesh-cap", mesh_cap, "Cap for the default resolution")->capture_default_str();
  mesh_cmd->add_option("--csv", mesh_csv, "Write the mesh points as CSV");

  std::vector<std::string> fit_files;
  std::string fit_csv;
  auto* fit_cmd = app.add_subcommand("fit", "Growth-law fits over stored results");
  fit_cmd->add_option("results", fit_files, "Result JSON files")->required();
  fit_cmd->add_option("--csv", fit_csv, "CSV of (n, lambda, model(n))");

  std::string cmp_a, cmp_b, cmp_pairs;
  auto* compare_cmd = app.add_subcommand("compare", "Symmetry-aware distance between two point sets");
  compare_cmd->add_option("a", cmp_a, "First point file")->required();
  compare_cmd->add_option("b", cmp_b, "Second point file")->required();
  compare_cmd->add_option("--pairs", cmp_pairs, "CSV of the aligned pairing");

  std::string exp_input, exp_format = "csv", exp_out;
  std::vector<int> exp_proj;
  auto* export_cmd = app.add_subcommand("export", "Export the points of a result or point file");
  export_cmd->add_option("input", exp_input, "Result JSON, point JSON or point CSV")->required();
  export_cmd->add_option("--format", exp_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  export_cmd->add_option("--proj", exp_proj, "Two 1-based coordinates to keep")->expected(2);
  export_cmd->add_option("--out", exp_out, "Output file (default: stdout)");

  std::string camp_file, camp_dir = "campaign";
  int camp_jobs = 1;
  bool camp_summarize = false;
  OptimizeFlags camp;
  auto* campaign_cmd = app.add_subcommand("campaign", "Run a grid of experiments from a campaign file");
  campaign_cmd->add_option("file", camp_file, "CSV rows domain,dim,degree,starts,seed")->required();
  campaign_cmd->add_option("--out-dir", camp_dir, "Directory for result files and summary.csv")
      ->capture_default_str();
  campaign_cmd->add_option("--jobs", camp_jobs, "Rows run concurrently")->capture_default_str();
  campaign_cmd->add_flag("--summarize-only", camp_summarize, "Rebuild the summary from stored results");
  add_search_flags(campaign_cmd, camp, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*optimize_cmd) return run_optimize(opt);
    if (*resume_cmd) {
      std::set<std::string> given;
      for (const auto* o : resume_cmd->get_options()) {
        if (o->count() > 0) given.insert(o->get_name());
      }
      return run_resume(resume_from, res, given);
    }
    if (*evaluate_cmd) return run_evaluate(eval_points, eval_m, eval_cap, eval_dump, eval_out);
    if (*mesh_cmd) return run_mesh_info(mesh_domain, mesh_dim, mesh_degree, mesh_m, mesh_cap, mesh_csv);
    if (*fit_cmd) return run_fit(fit_files, fit_csv);
    if (*compare_cmd) return run_compare(cmp_a, cmp_b, cmp_pairs);
    if (*export_cmd) return run_export(exp_input, exp_format, exp_proj, exp_out);
    if (*campaign_cmd) return run_campaign_cmd(camp_file, camp_dir, camp_jobs, camp, camp_summarize);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitFailure;
  }
  return kExitUsage;
}
