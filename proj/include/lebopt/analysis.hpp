#pragma once

#include <span>
#include <utility>
#include <vector>

#include "lebopt/fundamentals.hpp"

namespace lebopt {

enum class GrowthModel {
  CubeLog,    // c1 (log(n+1))^d + c2
  BallPower,  // c1 n^((d-1)/2) + c2
};

struct GrowthFit {
  GrowthModel model = GrowthModel::CubeLog;
  int dim = 1;
  double c1 = 0.0;
  double c2 = 0.0;
  double residual = 0.0;  // RMS
  // Ball only: the same regressor without intercept, c * n^((d-1)/2).
  double pure_c = 0.0;
  double pure_residual = 0.0;
  std::vector<std::pair<int, double>> data;

  double regressor(int n) const;
  double predict(int n) const { return c1 * regressor(n) + c2; }
};

// Least squares in (c1, c2) through the 2x2 normal equations. Needs at least
// three points with n >= 1 and a non-constant regressor.
GrowthFit fit_cube_growth(std::span<const std::pair<int, double>> data, int dim);
GrowthFit fit_ball_growth(std::span<const std::pair<int, double>> data, int dim);

// Element of the hyperoctahedral group: x -> (s_0 x_{p_0}, ..., s_{d-1} x_{p_{d-1}}).
struct CubeSymmetry {
  std::vector<int> permutation;
  std::vector<double> signs;

  Points apply(const Points& points) const;
};

// All 2^d d! elements for d <= 6; sign flips only beyond that.
std::vector<CubeSymmetry> symmetry_group(int dim);

// Image under the symmetry group whose row-sorted point list is
// lexicographically smallest. Rows of the result are sorted.
PointSet canonicalize(const PointSet& ps);

struct SetMatch {
  double distance = 0.0;
  std::vector<int> assignment;  // a.row(i) is paired with (g b).row(assignment[i])
  CubeSymmetry symmetry;        // g
  // True on the ball, where only the hyperoctahedral subgroup of the
  // rotations is searched and the distance is an upper bound.
  bool group_restricted = false;
};

// Minimum over the symmetry group of the optimal-assignment cost (sum of
// Euclidean distances).
SetMatch setdistance(const PointSet& a, const PointSet& b);
double set_distance(const PointSet& a, const PointSet& b);

// Minimum-cost perfect matching on a square cost matrix; returns the column
// assigned to each row.
std::vector<int> solve_assignment(const Matrix& cost);

// |arccos y - arccos x| in d = 1; the max over both coordinates in d = 2.
double dubiner_distance(std::span<const double> x, std::span<const double> y);

// 1 - |xi_j| for every node of a ball point set.
std::vector<double> boundary_distances(const PointSet& ps);

// Gauss-Legendre-Lobatto nodes on [-1, 1], ascending. Diagnostic reference
// pattern for ball radii.
std::vector<double> gll_nodes(int m);

}  // namespace lebopt
