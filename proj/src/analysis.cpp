#include "lebopt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "lebopt/errors.hpp"

namespace lebopt {

double GrowthFit::regressor(int n) const {
  if (model == GrowthModel::CubeLog) return std::pow(std::log(n + 1.0), dim);
  return std::pow(static_cast<double>(n), (dim - 1) / 2.0);
}

namespace {

GrowthFit fit_linear(GrowthModel model, std::span<const std::pair<int, double>> data, int dim) {
  if (dim < 1) throw FitError("growth fit: dimension must be >= 1");
  if (data.size() < 3) throw FitError("growth fit: need at least three data points");
  GrowthFit fit;
  fit.model = model;
  fit.dim = dim;
  fit.data.assign(data.begin(), data.end());
  for (const auto& [n, lambda] : data) {
    if (n < 1) throw FitError("growth fit: degrees must be >= 1");
    if (!std::isfinite(lambda)) throw FitError("growth fit: non-finite Lebesgue constant");
  }
  const auto count = static_cast<double>(data.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [n, lambda] : data) {
    const double r = fit.regressor(n);
    sx += r;
    sy += lambda;
    sxx += r * r;
    sxy += r * lambda;
  }
  // Centred form of the 2x2 normal equations.
  const double mean_x = sx / count;
  const double mean_y = sy / count;
  const double var = sxx - count * mean_x * mean_x;
  if (!(var > 1e-12 * std::max(1.0, sxx))) {
    throw FitError("growth fit: regressor is constant across the data");
  }
  fit.c1 = (sxy - count * mean_x * mean_y) / var;
  fit.c2 = mean_y - fit.c1 * mean_x;
  fit.pure_c = sxy / sxx;
  double ss = 0.0, ss_pure = 0.0;
  for (const auto& [n, lambda] : data) {
    const double r = fit.regressor(n);
    ss += std::pow(lambda - fit.predict(n), 2);
    ss_pure += std::pow(lambda - fit.pure_c * r, 2);
  }
  fit.residual = std::sqrt(ss / count);
  fit.pure_residual = std::sqrt(ss_pure / count);
  return fit;
}

}  // namespace

GrowthFit fit_cube_growth(std::span<const std::pair<int, double>> data, int dim) {
  return fit_linear(GrowthModel::CubeLog, data, dim);
}

GrowthFit fit_ball_growth(std::span<const std::pair<int, double>> data, int dim) {
  return fit_linear(GrowthModel::BallPower, data, dim);
}

Points CubeSymmetry::apply(const Points& points) const {
  Points out(points.rows(), points.cols());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index a = 0; a < points.cols(); ++a) {
      // + 0.0 folds -0.0 so that equal points compare equal bitwise.
      out(i, a) = signs[a] * points(i, permutation[a]) + 0.0;
    }
  }
  return out;
}

std::vector<CubeSymmetry> symmetry_group(int dim) {
  if (dim < 1) throw UsageError("symmetry_group: dimension must be >= 1");
  std::vector<std::vector<int>> perms;
  std::vector<int> perm(static_cast<std::size_t>(dim));
  std::iota(perm.begin(), perm.end(), 0);
  if (dim <= 6) {
    do {
      perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    perms.push_back(perm);
  }
  std::vector<CubeSymmetry> group;
  const unsigned flips = 1u << dim;
  for (const auto& p : perms) {
    for (unsigned mask = 0; mask < flips; ++mask) {
      CubeSymmetry g{p, std::vector<double>(static_cast<std::size_t>(dim), 1.0)};
      for (int a = 0; a < dim; ++a) {
        if (mask & (1u << a)) g.signs[a] = -1.0;
      }
      group.push_back(std::move(g));
    }
  }
  return group;
}

namespace {

bool row_less(const Points& p, Eigen::Index i, Eigen::Index k) {
  for (Eigen::Index a = 0; a < p.cols(); ++a) {
    if (p(i, a) != p(k, a)) return p(i, a) < p(k, a);
  }
  return false;
}

Points sorted_rows(const Points& p) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(p.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index i, Eigen::Index k) { return row_less(p, i, k); });
  Points out(p.rows(), p.cols());
  for (std::size_t r = 0; r < order.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = p.row(order[r]);
  return out;
}

// Lexicographic order on the flattened (already row-sorted) point lists.
bool list_less(const Points& a, const Points& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

}  // namespace

PointSet canonicalize(const PointSet& ps) {
  Points best;
  for (const auto& g : symmetry_group(ps.dim())) {
    Points image = sorted_rows(g.apply(ps.points));
    if (best.size() == 0 || list_less(image, best)) best = std::move(image);
  }
  PointSet out = ps;
  out.points = std::move(best);
  return out;
}

std::vector<int> solve_assignment(const Matrix& cost) {
  // Hungarian method with row/column potentials, O(n^3).
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw UsageError("solve_assignment: cost matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);  // match[col] = row, 1-based
  for (int row = 1; row <= n; ++row) {
    match[0] = row;
    int col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const int r0 = match[col0];
      double delta = inf;
      int col1 = 0;
      for (int col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double cur = cost(r0 - 1, col - 1) - u[r0] - v[col];
        if (cur < minv[col]) {
          minv[col] = cur;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (int col = 0; col <= n; ++col) {
        if (used[col]) {
          u[match[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const int col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n));
  for (int col = 1; col <= n; ++col) assignment[match[col] - 1] = col - 1;
  return assignment;
}

SetMatch setdistance(const PointSet& a, const PointSet& b) {
  if (a.size() != b.size() || a.dim() != b.dim() || !(a.domain == b.domain)) {
    throw UsageError("setdistance: point sets differ in size, dimension or domain");
  }
  const auto n = static_cast<Eigen::Index>(a.size());
  SetMatch best;
  best.distance = std::numeric_limits<double>::infinity();
  Matrix cost(n, n);
  for (const auto& g : symmetry_group(a.dim())) {
    const Points image = g.apply(b.points);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = 0; k < n; ++k) cost(i, k) = (a.points.row(i) - image.row(k)).norm();
    }
    auto assignment = solve_assignment(cost);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += cost(i, assignment[i]);
    if (total < best.distance) {
      best.distance = total;
      best.assignment = std::move(assignment);
      best.symmetry = g;
    }
  }
  best.group_restricted = a.domain.kind == DomainKind::Ball && a.dim() > 1;
  return best;
}

double set_distance(const PointSet& a, const PointSet& b) { return setdistance(a, b).distance; }

double dubiner_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty() || x.size() > 2) {
    throw UsageError("dubiner_distance: defined for matching points in d = 1 or d = 2");
  }
  double out = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    for (double v : {x[a], y[a]}) {
      if (std::abs(v) > 1.0 + 1e-12) throw UsageError("dubiner_distance: coordinate outside [-1, 1]");
    }
    const double dx = std::acos(std::clamp(x[a], -1.0, 1.0));
    const double dy = std::acos(std::clamp(y[a], -1.0, 1.0));
    out = std::max(out, std::abs(dy - dx));
  }
  return out;
}

std::vector<double> boundary_distances(const PointSet& ps) {
  if (ps.domain.kind != DomainKind::Ball) throw UsageError("boundary_distances: ball domain only");
  std::vector<double> out;
  out.reserve(ps.size());
  for (Eigen::Index i = 0; i < ps.points.rows(); ++i) out.push_back(1.0 - ps.points.row(i).norm());
  return out;
}

std::vector<double> gll_nodes(int m) {
  if (m < 2) throw UsageError("gll_nodes: need at least two nodes");
  const int p = m - 1;  // interior nodes are the roots of P'_p
  std::vector<double> nodes(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    // Chebyshev-Lobatto initial guess, then Newton on (1 - x^2) P'_p(x).
    double x = -std::cos(std::numbers::pi * j / p);
    if (j > 0 && j < p) {
      for (int iter = 0; iter < 100; ++iter) {
        // Legendre recurrence for P_p and P_{p-1}.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= p; ++k) {
          const double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = pk;
        }
        // f = (1 - x^2) P'_p = p (P_{p-1} - x P_p), f' = -p (p + 1) P_p.
        const double f = p * (p0 - x * p1);
        const double df = -p * (p + 1.0) * p1;
        const double step = f / df;
        x -= step;
        if (std::abs(step) < 1e-16) break;
      }
    }
    nodes[j] = x;
  }
  nodes.front() = -1.0;
  nodes.back() = 1.0;
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

}  // namespace lebopt
