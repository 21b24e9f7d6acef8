#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lebopt/fundamentals.hpp"
#include "lebopt/lebesgue.hpp"

namespace lebopt {

// Parameters of the smoothed minimax solver run on one mesh.
struct InnerParams {
  int max_iterations = 500;  // per temperature stage
  // Log-sum-exp temperatures, as fractions of the current Lebesgue constant.
  std::vector<double> temperatures{3e-2, 1e-2, 3e-3, 1e-3, 3e-4};
  double convergence = 1e-4;  // relative improvement over `patience` iterations
  int patience = 5;
  int memory = 12;  // L-BFGS pairs
  std::uint64_t perturb_seed = 0x9e3779b97f4a7c15ULL;

  bool operator==(const InnerParams&) const = default;
};

struct OptimConfig {
  int degree = 1;
  Domain domain;
  int starts = 10;
  std::uint64_t seed = 0;
  double refine_tol = 1e-3;
  int mesh_cap = kDefaultMeshCap;
  // Refinement also stops before a mesh with more points than this.
  std::size_t max_mesh_points = 400000;
  InnerParams inner;
  int threads = 0;  // 0: hardware concurrency

  // Throws UsageError for unsupported or inconsistent settings.
  void validate() const;
};

struct InnerResult {
  Points points;
  double lambda = 0.0;
  double start_lambda = 0.0;
  int iterations = 0;
  bool iteration_limit = false;
  bool collapse = false;        // start could not be made unisolvent
  std::vector<double> trace;    // best lambda after each iteration
};

// Smoothed minimax on one mesh: minimises tau log sum_y exp(Lambda(y)/tau)
// for decreasing tau with projected L-BFGS. Returns the best iterate seen, so
// the returned lambda never exceeds the (possibly perturbed) start's.
InnerResult inner_minimize(const Points& start, const MeshEvaluator& evaluator,
                           const Domain& domain, const InnerParams& params);

// Smoothed objective and its gradient with respect to the node coordinates
// (row-major, N*d). Returns false when the nodes are not unisolvent.
struct ObjectiveValue {
  double smoothed = 0.0;
  double lambda = 0.0;
};
bool smoothed_objective(const Points& nodes, const MeshEvaluator& evaluator, double tau,
                        ObjectiveValue& value, Vector* gradient);

struct StageTrace {
  int m = 0;
  std::size_t cardinality = 0;
  double start_lambda = 0.0;
  double lambda = 0.0;
  int iterations = 0;
  bool iteration_limit = false;
  bool collapse = false;
};

struct StartResult {
  int index = 0;
  std::uint64_t seed = 0;
  Points points;
  double lambda = 0.0;  // on the common terminal mesh
  std::vector<StageTrace> trace;
};

struct OptimResult {
  PointSet best;
  double lambda = 0.0;
  std::vector<StartResult> per_start;
  double wall_time = 0.0;
  OptimConfig config;
  int terminal_m = 0;
  std::size_t terminal_cardinality = 0;
  std::string parent;  // source file of a resumed run
};

using ProgressFn = std::function<void(const std::string&)>;

// Multi-start optimisation with nested mesh refinement.
OptimResult optimize(const OptimConfig& cfg, const ProgressFn& progress = {});

// Continues from a stored result's best points with a new configuration,
// starting on the stored terminal mesh resolution. When the stored
// refinement already meets the stopping rule of `cfg` and the inner settings
// are unchanged, the stored points are only re-evaluated.
OptimResult resume(const OptimResult& previous, const OptimConfig& cfg,
                   const ProgressFn& progress = {});

// Seed of start `index` derived from the campaign seed.
std::uint64_t start_seed(std::uint64_t seed, int index);

}  // namespace lebopt
