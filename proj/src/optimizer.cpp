#include "lebopt/optimizer.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "lebopt/errors.hpp"

namespace lebopt {

void OptimConfig::validate() const {
  if (degree < 1) throw UsageError("optimize: degree must be >= 1");
  if (domain.dim < 1) throw UsageError("optimize: dimension must be >= 1");
  if (domain.kind == DomainKind::Ball && domain.dim > 3) {
    throw UsageError("optimize: the ball is supported for d <= 3 only");
  }
  if (starts < 1) throw UsageError("optimize: need at least one start");
  if (!(refine_tol > 0.0)) throw UsageError("optimize: refine_tol must be positive");
  if (mesh_cap < 3) throw UsageError("optimize: mesh_cap must be >= 3");
  if (inner.temperatures.empty()) throw UsageError("optimize: no temperature stages");
  if (inner.max_iterations < 1 || inner.patience < 1 || inner.memory < 1) {
    throw UsageError("optimize: inner iteration parameters must be positive");
  }
  // Throws OverflowError for absurd sizes.
  total_degree_dimension(degree, domain.dim);
}

bool smoothed_objective(const Points& nodes, const MeshEvaluator& evaluator, double tau,
                        ObjectiveValue& value, Vector* gradient) {
  FundamentalSet fs;
  try {
    fs = build_fundamentals(nodes, evaluator.space_ptr());
  } catch (const UnisolvenceError&) {
    return false;
  }
  const Matrix values = evaluator.fundamental_values(fs);
  const Vector lebesgue = values.cwiseAbs().rowwise().sum();
  const double lambda = lebesgue.maxCoeff();
  if (!std::isfinite(lambda)) return false;
  value.lambda = lambda;
  if (tau <= 0.0) {
    value.smoothed = lambda;
    return true;
  }
  const Vector weights = ((lebesgue.array() - lambda) / tau).exp().matrix();
  const double total = weights.sum();
  value.smoothed = lambda + tau * std::log(total);
  if (gradient == nullptr) return true;

  // Only mesh points with non-negligible softmax weight contribute.
  std::vector<Eigen::Index> active;
  for (Eigen::Index y = 0; y < weights.size(); ++y) {
    if (weights[y] > 1e-15 * total) active.push_back(y);
  }
  const Eigen::Index n = values.cols();
  const auto na = static_cast<Eigen::Index>(active.size());
  Matrix active_values(na, n);
  Matrix weighted_signs(na, n);
  for (Eigen::Index r = 0; r < na; ++r) {
    const Eigen::Index y = active[static_cast<std::size_t>(r)];
    active_values.row(r) = values.row(y);
    weighted_signs.row(r) = values.row(y).array().sign() * (weights[y] / total);
  }
  // coupling(k, i) = sum_y w_y l_k(y) sign(l_i(y))
  const Matrix coupling = active_values.transpose() * weighted_signs;

  // d l_i(y) / d xi_{k,a} = -l_k(y) d_a l_i(xi_k), hence
  // d F / d xi_{k,a} = -sum_i coupling(k, i) d_a l_i(xi_k).
  const int d = evaluator.space().dim();
  gradient->resize(n * d);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Matrix basis_grad = evaluator.space().eval_gradient(
        std::span<const double>(nodes.row(k).data(), static_cast<std::size_t>(d)));
    const Matrix fundamental_grad = fs.coeffs.transpose() * basis_grad;  // N x d
    const Eigen::RowVectorXd g = -coupling.row(k) * fundamental_grad;
    gradient->segment(k * d, d) = g.transpose();
  }
  return true;
}

namespace {

constexpr double kBoundaryTol = 1e-14;

Eigen::Map<Vector> flat(Points& p) { return {p.data(), p.size()}; }

// Zeroes the components of `v` that would move a boundary node out of the
// domain when stepping along -v (sign = -1) or +v (sign = +1).
void restrict_to_feasible(const Domain& domain, const Points& x, Vector& v, double sign) {
  const int d = domain.dim;
  for (Eigen::Index k = 0; k < x.rows(); ++k) {
    if (domain.kind == DomainKind::Cube) {
      for (int a = 0; a < d; ++a) {
        const double step = sign * v[k * d + a];
        if ((x(k, a) >= 1.0 - kBoundaryTol && step > 0.0) ||
            (x(k, a) <= -1.0 + kBoundaryTol && step < 0.0)) {
          v[k * d + a] = 0.0;
        }
      }
    } else {
      const double r = x.row(k).norm();
      if (r < 1.0 - kBoundaryTol) continue;
      const Eigen::RowVectorXd radial = x.row(k) / r;
      auto seg = v.segment(k * d, d);
      const double outward = sign * seg.dot(radial.transpose());
      if (outward > 0.0) seg -= (seg.dot(radial.transpose())) * radial.transpose();
    }
  }
}

class Lbfgs {
 public:
  explicit Lbfgs(int memory) : memory_(static_cast<std::size_t>(memory)) {}

  void clear() {
    s_.clear();
    y_.clear();
  }
  bool empty() const { return s_.empty(); }

  void push(Vector s, Vector y) {
    const double sy = s.dot(y);
    if (!(sy > 1e-12 * s.norm() * y.norm())) return;
    if (s_.size() == memory_) {
      s_.pop_front();
      y_.pop_front();
    }
    s_.push_back(std::move(s));
    y_.push_back(std::move(y));
  }

  // -H g by the two-loop recursion.
  Vector direction(const Vector& g) const {
    Vector q = g;
    const std::size_t m = s_.size();
    std::vector<double> alpha(m);
    for (std::size_t i = m; i-- > 0;) {
      alpha[i] = s_[i].dot(q) / s_[i].dot(y_[i]);
      q -= alpha[i] * y_[i];
    }
    if (m > 0) q *= s_.back().dot(y_.back()) / y_.back().squaredNorm();
    for (std::size_t i = 0; i < m; ++i) {
      const double beta = y_[i].dot(q) / s_[i].dot(y_[i]);
      q += (alpha[i] - beta) * s_[i];
    }
    return -q;
  }

 private:
  std::size_t memory_;
  std::deque<Vector> s_;
  std::deque<Vector> y_;
};

bool perturb_until_unisolvent(Points& x, const MeshEvaluator& evaluator, const Domain& domain,
                              std::uint64_t seed, ObjectiveValue& value) {
  if (smoothed_objective(x, evaluator, 0.0, value, nullptr)) return true;
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  for (int attempt = 0; attempt < 3; ++attempt) {
    Vector dir(x.size());
    for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = gauss(rng);
    flat(x) += (1e-8 * domain.diameter() / dir.norm()) * dir;
    project_rows(domain, x);
    if (smoothed_objective(x, evaluator, 0.0, value, nullptr)) return true;
  }
  return false;
}

}  // namespace

InnerResult inner_minimize(const Points& start, const MeshEvaluator& evaluator,
                           const Domain& domain, const InnerParams& params) {
  InnerResult result;
  Points x = start;
  project_rows(domain, x);
  ObjectiveValue value;
  if (!perturb_until_unisolvent(x, evaluator, domain, params.perturb_seed, value)) {
    result.points = x;
    result.collapse = true;
    result.lambda = result.start_lambda = std::numeric_limits<double>::infinity();
    return result;
  }
  result.start_lambda = value.lambda;
  Points best = x;
  double best_lambda = value.lambda;

  Lbfgs lbfgs(params.memory);
  for (double relative : params.temperatures) {
    const double tau = relative * best_lambda;
    x = best;
    Vector g;
    smoothed_objective(x, evaluator, tau, value, &g);
    double f = value.smoothed;
    lbfgs.clear();
    std::vector<double> history{f};
    bool stalled = false;
    int it = 0;
    for (; it < params.max_iterations; ++it) {
      Vector gp = g;
      restrict_to_feasible(domain, x, gp, -1.0);
      if (gp.lpNorm<Eigen::Infinity>() < 1e-14) {
        stalled = true;
        break;
      }
      Vector p = lbfgs.direction(gp);
      restrict_to_feasible(domain, x, p, 1.0);
      if (!(gp.dot(p) < 0.0)) {
        lbfgs.clear();
        p = -gp;
      }
      double step = lbfgs.empty() ? std::min(1.0, 0.05 / p.lpNorm<Eigen::Infinity>()) : 1.0;
      step = std::min(step, 0.25 / p.lpNorm<Eigen::Infinity>());

      bool accepted = false;
      Points trial(x.rows(), x.cols());
      Vector trial_g;
      ObjectiveValue trial_value;
      for (int backtrack = 0; backtrack < 40; ++backtrack, step *= 0.5) {
        flat(trial) = flat(x) + step * p;
        project_rows(domain, trial);
        if (!smoothed_objective(trial, evaluator, tau, trial_value, &trial_g)) continue;
        const double decrease = g.dot(flat(trial) - flat(x));
        const bool armijo = decrease < 0.0 ? trial_value.smoothed <= f + 1e-4 * decrease
                                            : trial_value.smoothed < f;
        if (armijo) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        if (!lbfgs.empty()) {
          lbfgs.clear();
          continue;
        }
        stalled = true;
        break;
      }
      lbfgs.push(flat(trial) - flat(x), trial_g - g);
      x = trial;
      g = std::move(trial_g);
      f = trial_value.smoothed;
      if (trial_value.lambda < best_lambda) {
        best_lambda = trial_value.lambda;
        best = x;
      }
      result.trace.push_back(best_lambda);
      history.push_back(f);
      const auto h = history.size();
      if (h > static_cast<std::size_t>(params.patience) &&
          history[h - 1 - params.patience] - f < params.convergence * std::abs(f)) {
        stalled = true;
        ++it;
        break;
      }
    }
    result.iterations += it;
    if (!stalled) result.iteration_limit = true;
  }
  result.points = best;
  result.lambda = best_lambda;
  return result;
}

std::uint64_t start_seed(std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

std::size_t cardinality_bound(const Domain& domain, int m) {
  const auto mm = static_cast<double>(m);
  double bound = 0.0;
  if (domain.kind == DomainKind::Cube || domain.dim == 1) {
    bound = std::pow(mm, domain.dim);
  } else if (domain.dim == 2) {
    bound = mm * mm;
  } else {
    bound = 2.0 * mm * mm * mm;
  }
  return bound > 1e18 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(bound);
}

// Meshes shared by all starts, built on first use.
class MeshCache {
 public:
  MeshCache(std::shared_ptr<const PolySpace> space, Domain domain)
      : space_(std::move(space)), domain_(domain) {}

  std::shared_ptr<const MeshEvaluator> get(int m) {
    std::lock_guard lock(mutex_);
    auto& slot = cache_[m];
    if (!slot) {
      slot = std::make_shared<const MeshEvaluator>(space_, make_mesh(domain_, space_->degree(), m));
    }
    return slot;
  }

 private:
  std::shared_ptr<const PolySpace> space_;
  Domain domain_;
  std::mutex mutex_;
  std::map<int, std::shared_ptr<const MeshEvaluator>> cache_;
};

struct Plan {
  std::vector<int> base;  // resolutions that are always visited
  int stop_from = 0;      // refinement may stop once m >= this
  bool evaluate_only = false;  // one stage, no inner iterations
};

Plan make_plan(const OptimConfig& cfg, int first_m) {
  Plan plan;
  for (int m : refinement_resolutions(cfg.degree, cfg.mesh_cap)) {
    if (m >= first_m) plan.base.push_back(m);
  }
  if (plan.base.empty()) plan.base.push_back(first_m);
  plan.stop_from = default_resolution(cfg.degree, cfg.mesh_cap);
  return plan;
}

StartResult run_start(const Points& initial, const OptimConfig& cfg, const Plan& plan,
                      MeshCache& cache, double previous, const std::string& label,
                      const ProgressFn& progress, std::mutex& progress_mutex) {
  StartResult out;
  Points x = initial;
  std::size_t next_base = 0;
  int m = plan.base.front();
  while (true) {
    const auto evaluator = cache.get(m);
    InnerParams params = cfg.inner;
    params.perturb_seed ^= static_cast<std::uint64_t>(m) * 0x100000001b3ULL;
    InnerResult inner;
    if (plan.evaluate_only) {
      ObjectiveValue value;
      inner.points = x;
      inner.collapse = !smoothed_objective(x, *evaluator, 0.0, value, nullptr);
      inner.lambda = inner.start_lambda =
          inner.collapse ? std::numeric_limits<double>::infinity() : value.lambda;
    } else {
      inner = inner_minimize(x, *evaluator, cfg.domain, params);
    }
    StageTrace stage{m,
                     evaluator->mesh().size(),
                     inner.start_lambda,
                     inner.lambda,
                     inner.iterations,
                     inner.iteration_limit,
                     inner.collapse};
    out.trace.push_back(stage);
    if (progress) {
      std::ostringstream line;
      line << label << " m=" << m << " card=" << stage.cardinality << " lambda "
           << stage.start_lambda << " -> " << stage.lambda << " iters " << stage.iterations
           << (stage.iteration_limit ? " (iteration limit)" : "")
           << (stage.collapse ? " (unisolvence collapse)" : "");
      std::lock_guard lock(progress_mutex);
      progress(line.str());
    }
    x = inner.points;
    if (inner.collapse || plan.evaluate_only) break;
    const bool converged = std::abs(inner.lambda - previous) < cfg.refine_tol;
    previous = inner.lambda;
    ++next_base;
    if (next_base < plan.base.size()) {
      m = plan.base[next_base];
      continue;
    }
    if (converged && m >= plan.stop_from) break;
    const int next = next_resolution(m);
    if (next > cfg.mesh_cap || cardinality_bound(cfg.domain, next) > cfg.max_mesh_points) break;
    m = next;
  }
  out.points = x;
  return out;
}

OptimResult run_all(const OptimConfig& cfg, const std::vector<Points>& initials,
                    const std::vector<std::uint64_t>& seeds, int first_m, double previous,
                    const ProgressFn& progress, bool evaluate_only = false) {
  cfg.validate();
  const auto clock_start = std::chrono::steady_clock::now();
  auto space = std::make_shared<const PolySpace>(cfg.degree, cfg.domain.dim);
  MeshCache cache(space, cfg.domain);
  Plan plan = make_plan(cfg, first_m);
  if (evaluate_only) {
    plan.base = {first_m};
    plan.evaluate_only = true;
  }

  const int count = static_cast<int>(initials.size());
  std::vector<StartResult> results(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      const std::string label = "start " + std::to_string(i + 1) + "/" + std::to_string(count);
      results[i] = run_start(initials[i], cfg, plan, cache, previous, label, progress,
                             progress_mutex);
      results[i].index = i;
      results[i].seed = seeds[i];
    }
  };
  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, count);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  // Compare every start on the same (finest reached) mesh.
  int terminal = 0;
  for (const auto& r : results) terminal = std::max(terminal, r.trace.back().m);
  const auto evaluator = cache.get(terminal);
  OptimResult out{PointSet(Points(), space, cfg.domain), 0.0, {}, 0.0, cfg, 0, 0, {}};
  out.config = cfg;
  out.terminal_m = terminal;
  out.terminal_cardinality = evaluator->mesh().size();
  out.lambda = std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    ObjectiveValue value;
    results[i].lambda = smoothed_objective(results[i].points, *evaluator, 0.0, value, nullptr)
                            ? value.lambda
                            : std::numeric_limits<double>::infinity();
    if (results[i].lambda < out.lambda) {
      out.lambda = results[i].lambda;
      best = i;
    }
  }
  out.best = PointSet(results[best].points, space, cfg.domain,
                      Provenance{results[best].seed, "optimize"});
  out.per_start = std::move(results);
  out.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return out;
}

bool start_is_unisolvent(const Points& x, const std::shared_ptr<const PolySpace>& space) {
  try {
    build_fundamentals(x, space);
    return true;
  } catch (const UnisolvenceError&) {
    return false;
  }
}

}  // namespace

OptimResult optimize(const OptimConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  const std::size_t n = total_degree_dimension(cfg.degree, cfg.domain.dim);
  const auto space = std::make_shared<const PolySpace>(cfg.degree, cfg.domain.dim);
  std::vector<Points> initials;
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < cfg.starts; ++i) {
    seeds.push_back(start_seed(cfg.seed, i));
    Rng rng(seeds.back());
    Points x = sample_uniform(cfg.domain, n, rng);
    // Random starts are unisolvent almost surely; redraw the rare
    // numerically singular ones.
    for (int redraw = 0; redraw < 100 && !start_is_unisolvent(x, space); ++redraw) {
      x = sample_uniform(cfg.domain, n, rng);
    }
    initials.push_back(std::move(x));
  }
  return run_all(cfg, initials, seeds, 0, std::numeric_limits<double>::quiet_NaN(), progress);
}

namespace {

// True when the refinement loop that produced `previous` would stop at its
// terminal mesh under `cfg` as well.
bool refinement_finished(const OptimResult& previous, const OptimConfig& cfg) {
  const StartResult* best = nullptr;
  for (const auto& s : previous.per_start) {
    if (s.points == previous.best.points) best = &s;
  }
  if (!best || best->trace.empty()) return false;
  const StageTrace& last = best->trace.back();
  if (last.m != previous.terminal_m || last.collapse) return false;
  const int next = next_resolution(last.m);
  if (next > cfg.mesh_cap || cardinality_bound(cfg.domain, next) > cfg.max_mesh_points) return true;
  if (best->trace.size() < 2 || last.m < default_resolution(cfg.degree, cfg.mesh_cap)) return false;
  const double before = best->trace[best->trace.size() - 2].lambda;
  return std::abs(last.lambda - before) < cfg.refine_tol;
}

}  // namespace

OptimResult resume(const OptimResult& previous, const OptimConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  if (cfg.degree != previous.config.degree || !(cfg.domain == previous.config.domain)) {
    throw UsageError("resume: degree and domain must match the stored run");
  }
  // A finished run continued under the same inner settings is a fixed point:
  // only re-evaluate. Otherwise optimise again from the stored terminal mesh.
  const bool evaluate_only =
      cfg.inner == previous.config.inner && refinement_finished(previous, cfg);
  OptimResult out = run_all(cfg, {previous.best.points},
                            {previous.best.meta.seed.value_or(previous.config.seed)},
                            std::min(previous.terminal_m, cfg.mesh_cap), previous.lambda, progress,
                            evaluate_only);
  out.best.meta.source = "resume";
  return out;
}

}  // namespace lebopt
