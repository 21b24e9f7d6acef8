#include "lebopt/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "lebopt/errors.hpp"

namespace lebopt {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

json points_to_json(const Points& p) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index a = 0; a < p.cols(); ++a) row.push_back(p(i, a));
    rows.push_back(std::move(row));
  }
  return rows;
}

Points points_from_json(const json& rows, int dim) {
  if (!rows.is_array()) throw LoadError("points must be an array of rows");
  Points p(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || static_cast<int>(row.size()) != dim) {
      throw LoadError("point row " + std::to_string(i) + " does not have " + std::to_string(dim) +
                      " coordinates");
    }
    for (int a = 0; a < dim; ++a) p(static_cast<Eigen::Index>(i), a) = row[a].get<double>();
  }
  return p;
}

// JSON has no infinity; a collapsed start stores null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number_or_inf(const json& v) {
  return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
}

json domain_to_json(const Domain& d) { return {{"domain", to_string(d.kind)}, {"dim", d.dim}}; }
Domain domain_from_json(const json& j) {
  return Domain(parse_domain_kind(j.at("domain").get<std::string>()), j.at("dim").get<int>());
}

std::string format_fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string format_full(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

void write_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path + ": unable to open temporary file");
    out << text;
    out.flush();
    if (!out) {
      out.close();
      std::remove(tmp.c_str());
      throw IoError("cannot write " + path + ": write failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw IoError("cannot write " + path + ": " + ec.message());
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

std::string build_identifier() {
  return std::string("lebopt ") + kVersion + " (" + __VERSION__ + ")";
}

json config_to_json(const OptimConfig& cfg) {
  return {{"degree", cfg.degree},
          {"domain", domain_to_json(cfg.domain)},
          {"starts", cfg.starts},
          {"seed", cfg.seed},
          {"refine_tol", cfg.refine_tol},
          {"mesh_cap", cfg.mesh_cap},
          {"max_mesh_points", cfg.max_mesh_points},
          {"threads", cfg.threads},
          {"inner",
           {{"max_iterations", cfg.inner.max_iterations},
            {"temperatures", cfg.inner.temperatures},
            {"convergence", cfg.inner.convergence},
            {"patience", cfg.inner.patience},
            {"memory", cfg.inner.memory},
            {"perturb_seed", cfg.inner.perturb_seed}}}};
}

OptimConfig config_from_json(const json& j) {
  OptimConfig cfg;
  cfg.degree = j.at("degree").get<int>();
  cfg.domain = domain_from_json(j.at("domain"));
  cfg.starts = j.at("starts").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.refine_tol = j.at("refine_tol").get<double>();
  cfg.mesh_cap = j.at("mesh_cap").get<int>();
  cfg.max_mesh_points = j.at("max_mesh_points").get<std::size_t>();
  cfg.threads = j.value("threads", 0);
  const auto& in = j.at("inner");
  cfg.inner.max_iterations = in.at("max_iterations").get<int>();
  cfg.inner.temperatures = in.at("temperatures").get<std::vector<double>>();
  cfg.inner.convergence = in.at("convergence").get<double>();
  cfg.inner.patience = in.at("patience").get<int>();
  cfg.inner.memory = in.at("memory").get<int>();
  cfg.inner.perturb_seed = in.at("perturb_seed").get<std::uint64_t>();
  return cfg;
}

json result_to_json(const OptimResult& r) {
  json starts = json::array();
  for (const auto& s : r.per_start) {
    json trace = json::array();
    for (const auto& t : s.trace) {
      trace.push_back({{"m", t.m},
                       {"cardinality", t.cardinality},
                       {"start_lambda", number_or_null(t.start_lambda)},
                       {"lambda", number_or_null(t.lambda)},
                       {"iterations", t.iterations},
                       {"iteration_limit", t.iteration_limit},
                       {"collapse", t.collapse}});
    }
    starts.push_back({{"index", s.index},
                      {"seed", s.seed},
                      {"lambda", number_or_null(s.lambda)},
                      {"points", points_to_json(s.points)},
                      {"trace", std::move(trace)}});
  }
  json best = {{"points", points_to_json(r.best.points)}, {"source", r.best.meta.source}};
  if (r.best.meta.seed) best["seed"] = *r.best.meta.seed;
  return {{"schema_version", kSchemaVersion},
          {"config", config_to_json(r.config)},
          {"result",
           {{"lambda", number_or_null(r.lambda)},
            {"terminal_m", r.terminal_m},
            {"terminal_cardinality", r.terminal_cardinality},
            {"N", r.best.points.rows()},
            {"best", std::move(best)},
            {"per_start", std::move(starts)}}},
          {"environment", {{"build", build_identifier()}, {"wall_time", r.wall_time}}},
          {"provenance", {{"parent", r.parent.empty() ? json(nullptr) : json(r.parent)}}}};
}

OptimResult result_from_json(const json& j) {
  try {
    if (!j.contains("schema_version")) throw LoadError("missing schema_version");
    const int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion) {
      throw LoadError("unsupported schema_version " + std::to_string(version) + " (expected " +
                      std::to_string(kSchemaVersion) + ")");
    }
    const OptimConfig cfg = config_from_json(j.at("config"));
    const int d = cfg.domain.dim;
    auto space = std::make_shared<const PolySpace>(cfg.degree, d);
    const auto& res = j.at("result");
    const auto& best = res.at("best");
    Provenance meta;
    meta.source = best.value("source", "");
    if (best.contains("seed")) meta.seed = best.at("seed").get<std::uint64_t>();
    OptimResult r{PointSet(points_from_json(best.at("points"), d), space, cfg.domain, meta),
                  number_or_inf(res.at("lambda")),
                  {},
                  j.at("environment").at("wall_time").get<double>(),
                  cfg,
                  res.at("terminal_m").get<int>(),
                  res.at("terminal_cardinality").get<std::size_t>(),
                  {}};
    if (r.best.size() != space->size()) throw LoadError("best point set has the wrong size");
    for (const auto& s : res.at("per_start")) {
      StartResult sr;
      sr.index = s.at("index").get<int>();
      sr.seed = s.at("seed").get<std::uint64_t>();
      sr.lambda = number_or_inf(s.at("lambda"));
      sr.points = points_from_json(s.at("points"), d);
      for (const auto& t : s.at("trace")) {
        sr.trace.push_back({t.at("m").get<int>(), t.at("cardinality").get<std::size_t>(),
                            number_or_inf(t.at("start_lambda")), number_or_inf(t.at("lambda")),
                            t.at("iterations").get<int>(), t.at("iteration_limit").get<bool>(),
                            t.at("collapse").get<bool>()});
      }
      r.per_start.push_back(std::move(sr));
    }
    const auto& parent = j.at("provenance").at("parent");
    if (!parent.is_null()) r.parent = parent.get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw LoadError(std::string("malformed result file: ") + e.what());
  } catch (const UsageError& e) {
    throw LoadError(std::string("invalid result file: ") + e.what());
  } catch (const OverflowError& e) {
    throw LoadError(std::string("invalid result file: ") + e.what());
  }
}

void save_result(const OptimResult& r, const std::string& path) {
  write_atomic(path, result_to_json(r).dump(2) + "\n");
}

OptimResult load_result(const std::string& path) {
  const std::string text = read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw LoadError(path + ": " + e.what());
  }
  try {
    return result_from_json(j);
  } catch (const LoadError& e) {
    throw LoadError(path + ": " + e.what());
  }
}

OptimResult resume(const std::string& path, const OptimConfig& cfg, const ProgressFn& progress) {
  const OptimResult previous = load_result(path);
  OptimResult out = resume(previous, cfg, progress);
  out.parent = path;
  return out;
}

PointSet PointFile::to_point_set() const {
  return PointSet(points, std::make_shared<const PolySpace>(degree, domain.dim), domain,
                  Provenance{std::nullopt, "file"});
}

PointFile point_file_from_result(const OptimResult& r) {
  return PointFile{r.config.domain, r.config.degree, r.best.points,
                   std::isfinite(r.lambda) ? std::optional<double>(r.lambda) : std::nullopt,
                   r.terminal_m > 0 ? std::optional<int>(r.terminal_m) : std::nullopt};
}

namespace {

PointFile read_point_csv(const std::string& path, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::map<std::string, std::string> meta;
  std::vector<std::vector<double>> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream fields(line.substr(1));
      std::string field;
      while (std::getline(fields, field, ',')) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
          s.erase(0, s.find_first_not_of(' '));
          s.erase(s.find_last_not_of(' ') + 1);
          return s;
        };
        meta[trim(field.substr(0, eq))] = trim(field.substr(eq + 1));
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      if (line.find_first_of("xX") != std::string::npos) continue;
    }
    std::vector<double> row;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw LoadError(path + ": bad number '" + field + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw LoadError(path + ": ragged point rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw LoadError(path + ": no points");
  if (!meta.contains("n")) throw LoadError(path + ": missing '# n=...' metadata line");
  PointFile pf;
  const int d = static_cast<int>(rows.front().size());
  try {
    pf.domain = Domain(parse_domain_kind(meta.contains("domain") ? meta["domain"] : "cube"), d);
    pf.degree = std::stoi(meta["n"]);
    if (meta.contains("lambda") && meta["lambda"] != "nan") pf.lambda = std::stod(meta["lambda"]);
  } catch (const std::exception& e) {
    throw LoadError(path + ": bad metadata: " + e.what());
  }
  pf.points.resize(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int a = 0; a < d; ++a) pf.points(static_cast<Eigen::Index>(i), a) = rows[i][a];
  }
  return pf;
}

}  // namespace

PointFile read_point_file(const std::string& path) {
  const std::string text = read_text(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw LoadError(path + ": " + e.what());
    }
    if (j.contains("schema_version")) return point_file_from_result(load_result(path));
    try {
      PointFile pf;
      pf.domain = domain_from_json(j.at("domain"));
      pf.degree = j.at("n").get<int>();
      pf.points = points_from_json(j.at("points"), pf.domain.dim);
      if (j.contains("lambda") && !j.at("lambda").is_null()) pf.lambda = j.at("lambda").get<double>();
      return pf;
    } catch (const json::exception& e) {
      throw LoadError(path + ": " + e.what());
    } catch (const UsageError& e) {
      throw LoadError(path + ": " + e.what());
    }
  }
  return read_point_csv(path, text);
}

void export_points(const PointFile& pf, ExportFormat format, std::ostream& out,
                   std::optional<std::pair<int, int>> projection) {
  const int d = pf.domain.dim;
  std::vector<int> columns;
  if (projection) {
    const auto [i, k] = *projection;
    if (i < 1 || k < 1 || i > d || k > d || i == k) {
      throw UsageError("export: projection indices must be two distinct values in 1.." +
                       std::to_string(d));
    }
    columns = {i - 1, k - 1};
  } else {
    for (int a = 0; a < d; ++a) columns.push_back(a);
  }
  if (format == ExportFormat::Json) {
    if (projection) throw UsageError("export: --proj applies to CSV output only");
    json j = {{"domain", domain_to_json(pf.domain)},
              {"n", pf.degree},
              {"d", d},
              {"N", pf.points.rows()},
              {"lambda", pf.lambda ? json(*pf.lambda) : json(nullptr)},
              {"points", points_to_json(pf.points)}};
    out << j.dump(2) << "\n";
    return;
  }
  out << "# domain=" << to_string(pf.domain.kind) << ",n=" << pf.degree << ",d=" << d
      << ",N=" << pf.points.rows() << ",lambda=" << (pf.lambda ? format_full(*pf.lambda) : "nan")
      << "\n";
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << "x" << columns[c] + 1;
  out << "\n";
  for (Eigen::Index i = 0; i < pf.points.rows(); ++i) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out << (c ? "," : "") << format_full(pf.points(i, columns[c]));
    }
    out << "\n";
  }
}

std::vector<CampaignRow> parse_campaign(std::istream& in) {
  std::vector<CampaignRow> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields;
    std::istringstream s(line);
    std::string f;
    while (std::getline(s, f, ',')) {
      f.erase(0, f.find_first_not_of(" \t"));
      f.erase(f.find_last_not_of(" \t\r") + 1);
      fields.push_back(f);
    }
    if (fields.size() != 5) {
      throw UsageError("campaign line " + std::to_string(lineno) +
                       ": expected domain,dim,degree,starts,seed");
    }
    if (fields[0] == "domain") continue;
    try {
      CampaignRow row;
      row.domain = Domain(parse_domain_kind(fields[0]), std::stoi(fields[1]));
      row.degree = std::stoi(fields[2]);
      row.starts = std::stoi(fields[3]);
      row.seed = std::stoull(fields[4]);
      rows.push_back(row);
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      throw UsageError("campaign line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (rows.empty()) throw UsageError("campaign file lists no experiments");
  return rows;
}

std::string campaign_file_name(const CampaignRow& row) {
  return to_string(row.domain.kind) + "_d" + std::to_string(row.domain.dim) + "_n" +
         std::to_string(row.degree) + "_s" + std::to_string(row.seed) + ".json";
}

std::string summarize(const std::vector<OptimResult>& results) {
  // (domain, d) -> degree -> lambda; the smallest value wins on repeats.
  std::map<std::pair<std::string, int>, std::map<int, double>> table;
  int max_degree = 0;
  for (const auto& r : results) {
    auto& row = table[{to_string(r.config.domain.kind), r.config.domain.dim}];
    const int n = r.config.degree;
    max_degree = std::max(max_degree, n);
    auto [it, inserted] = row.emplace(n, r.lambda);
    if (!inserted) it->second = std::min(it->second, r.lambda);
  }
  std::ostringstream out;
  out << "domain,d";
  for (int n = 1; n <= max_degree; ++n) out << ",n" << n << ",n" << n << "_full";
  out << "\n";
  for (const auto& [key, row] : table) {
    out << key.first << "," << key.second;
    for (int n = 1; n <= max_degree; ++n) {
      const auto it = row.find(n);
      if (it == row.end() || !std::isfinite(it->second)) {
        out << ",,";
      } else {
        out << "," << format_fixed(it->second, 2) << "," << format_full(it->second);
      }
    }
    out << "\n";
  }
  return out.str();
}

std::string summarize_files(const std::vector<std::string>& paths) {
  std::vector<OptimResult> results;
  for (const auto& p : paths) results.push_back(load_result(p));
  return summarize(results);
}

CampaignOutcome run_campaign(const std::vector<CampaignRow>& rows, const OptimConfig& base,
                             const std::string& out_dir, int jobs, const ProgressFn& progress) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
  const int count = static_cast<int>(rows.size());
  std::vector<std::optional<OptimResult>> results(rows.size());
  std::vector<std::string> errors(rows.size());
  std::vector<std::string> files(rows.size());
  std::atomic<int> next{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      const auto& row = rows[i];
      OptimConfig cfg = base;
      cfg.degree = row.degree;
      cfg.domain = row.domain;
      cfg.starts = row.starts;
      cfg.seed = row.seed;
      if (jobs > 1) cfg.threads = 1;
      const std::string label = "row " + std::to_string(i + 1) + " " + to_string(row.domain.kind) +
                                " d=" + std::to_string(row.domain.dim) +
                                " n=" + std::to_string(row.degree);
      ProgressFn row_progress;
      if (progress) {
        row_progress = [&, label](const std::string& msg) {
          std::lock_guard lock(progress_mutex);
          progress(label + ": " + msg);
        };
      }
      try {
        OptimResult r = optimize(cfg, row_progress);
        const std::string path = (std::filesystem::path(out_dir) / campaign_file_name(row)).string();
        save_result(r, path);
        files[i] = path;
        results[i] = std::move(r);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int threads = std::clamp(jobs, 1, count);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  CampaignOutcome outcome;
  std::vector<OptimResult> ok;
  for (int i = 0; i < count; ++i) {
    if (results[i]) {
      outcome.result_files.push_back(files[i]);
      ok.push_back(std::move(*results[i]));
    } else {
      outcome.failures.push_back("row " + std::to_string(i + 1) + ": " + errors[i]);
    }
  }
  outcome.summary_path = (std::filesystem::path(out_dir) / "summary.csv").string();
  write_atomic(outcome.summary_path, summarize(ok));
  return outcome;
}

json fit_to_json(const GrowthFit& fit) {
  json data = json::array();
  for (const auto& [n, lambda] : fit.data) data.push_back({n, lambda});
  json j = {{"model", fit.model == GrowthModel::CubeLog ? "c1*(log(n+1))^d + c2"
                                                         : "c1*n^((d-1)/2) + c2"},
            {"dim", fit.dim},
            {"c1", fit.c1},
            {"c2", fit.c2},
            {"residual", fit.residual},
            {"data", std::move(data)}};
  if (fit.model == GrowthModel::BallPower) {
    j["pure_power"] = {{"c", fit.pure_c}, {"residual", fit.pure_residual}};
  }
  return j;
}

}  // namespace lebopt
