#include "lebopt/fundamentals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "lebopt/errors.hpp"

namespace lebopt {

PointSet::PointSet(Points pts, std::shared_ptr<const PolySpace> s, Domain dom, Provenance m)
    : points(std::move(pts)), space(std::move(s)), domain(dom), meta(std::move(m)) {}

void PointSet::validate() const {
  if (!space) throw UsageError("PointSet: missing polynomial space");
  if (points.cols() != domain.dim || space->dim() != domain.dim) {
    throw UsageError("PointSet: dimension mismatch between points, space and domain");
  }
  if (size() != space->size()) {
    throw UsageError("PointSet: has " + std::to_string(size()) + " points, space needs " +
                     std::to_string(space->size()));
  }
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    if (!contains(domain, std::span<const double>(points.row(i).data(), points.cols()), 1e-12)) {
      throw UsageError("PointSet: point " + std::to_string(i) + " lies outside the domain");
    }
    for (Eigen::Index k = 0; k < i; ++k) {
      if ((points.row(i) - points.row(k)).squaredNorm() == 0.0) {
        throw UnisolvenceError("PointSet: points " + std::to_string(k) + " and " +
                               std::to_string(i) + " coincide");
      }
    }
  }
}

Polynomial FundamentalSet::poly(std::size_t j) const {
  return Polynomial(space, coeffs.col(static_cast<Eigen::Index>(j)));
}

Vector FundamentalSet::eval(std::span<const double> x) const {
  return coeffs.transpose() * space->eval(x);
}

double delta_residual(const FundamentalSet& fs, const Points& nodes) {
  const Matrix values = fs.space->eval_matrix(nodes) * fs.coeffs;
  return (values - Matrix::Identity(values.rows(), values.cols())).cwiseAbs().maxCoeff();
}

namespace {

// One step C += C (I - V C) with residual and correction accumulated in quad
// precision. Returns the largest residual entry before the step.
double refine_quad(const Matrix& v, Matrix& c) {
  using Quad = __float128;
  const Eigen::Index n = v.rows();
  std::vector<Quad> r(static_cast<std::size_t>(n * n));
  Quad worst = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Quad acc = i == j ? 1 : 0;
      for (Eigen::Index k = 0; k < n; ++k) acc -= static_cast<Quad>(v(i, k)) * c(k, j);
      r[static_cast<std::size_t>(i + j * n)] = acc;
      worst = std::max(worst, acc < 0 ? -acc : acc);
    }
  }
  Matrix out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Quad acc = c(i, j);
      for (Eigen::Index k = 0; k < n; ++k) acc += static_cast<Quad>(c(i, k)) * r[static_cast<std::size_t>(k + j * n)];
      out(i, j) = static_cast<double>(acc);
    }
  }
  c = std::move(out);
  return static_cast<double>(worst);
}

void polish(const Matrix& v, Matrix& c, int max_steps) {
  double previous = std::numeric_limits<double>::infinity();
  for (int step = 0; step < max_steps; ++step) {
    const double residual = refine_quad(v, c);
    if (!(residual < 0.5 * previous)) break;
    previous = residual;
  }
}

}  // namespace

FundamentalSet build_fundamentals(const Points& nodes, std::shared_ptr<const PolySpace> space) {
  const auto n = static_cast<Eigen::Index>(space->size());
  if (nodes.rows() != n || nodes.cols() != space->dim()) {
    throw UsageError("build_fundamentals: expected " + std::to_string(n) + " points in dimension " +
                     std::to_string(space->dim()));
  }
  // Working polynomials, one per column, start as the basis itself.
  Matrix work = Matrix::Identity(n, n);
  // values(k, c): working polynomial c at node k, kept current under the
  // same column operations applied to `work`.
  Matrix values = space->eval_matrix(nodes);
  const double scale = values.cwiseAbs().maxCoeff();
  const double threshold = kPivotThreshold * scale;

  std::vector<char> node_done(static_cast<std::size_t>(n), 0);
  std::vector<char> poly_done(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> poly_of_node(static_cast<std::size_t>(n), -1);

  for (Eigen::Index step = 0; step < n; ++step) {
    // Largest value over all unassigned (node, polynomial) pairs.
    Eigen::Index pk = -1, pc = -1;
    double best = threshold;
    for (Eigen::Index c = 0; c < n; ++c) {
      if (poly_done[c]) continue;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (node_done[k]) continue;
        const double v = std::abs(values(k, c));
        if (v > best) {
          best = v;
          pk = k;
          pc = c;
        }
      }
    }
    if (pc < 0) {
      throw UnisolvenceError("after " + std::to_string(step) +
                             " nodes every remaining polynomial vanishes at the remaining nodes; "
                             "the nodes are not unisolvent for degree " +
                             std::to_string(space->degree()));
    }
    const double inv = 1.0 / values(pk, pc);
    work.col(pc) *= inv;
    values.col(pc) *= inv;
    for (Eigen::Index c = 0; c < n; ++c) {
      const double f = values(pk, c);
      if (c == pc || f == 0.0) continue;
      work.col(c) -= f * work.col(pc);
      values.col(c) -= f * values.col(pc);
    }
    node_done[pk] = 1;
    poly_done[pc] = 1;
    poly_of_node[pk] = pc;
  }

  FundamentalSet fs;
  fs.space = space;
  fs.coeffs.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) fs.coeffs.col(k) = work.col(poly_of_node[k]);
  // One refinement step C += C (I - V C) with the delta residual formed in
  // extended precision; it removes most of the conditioning error.
  {
    using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const LongMatrix c = fs.coeffs.cast<long double>();
    LongMatrix r = -(space->eval_matrix(nodes).cast<long double>() * c);
    r.diagonal().array() += 1.0L;
    fs.coeffs = (c + c * r).cast<double>();
  }
  fs.residual = delta_residual(fs, nodes);
  if (!(fs.residual <= kResidualTolerance)) {
    throw UnisolvenceError("elimination residual " + std::to_string(fs.residual) +
                           " exceeds tolerance; nodes are numerically not unisolvent");
  }
  return fs;
}

FundamentalSet build_fundamentals(const PointSet& ps) {
  ps.validate();
  FundamentalSet fs = build_fundamentals(ps.points, ps.space);
  polish(ps.space->eval_matrix(ps.points), fs.coeffs, 2);
  fs.residual = delta_residual(fs, ps.points);
  return fs;
}

FundamentalSet vandermonde_fundamentals(const PointSet& ps) {
  ps.validate();
  using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  // V_ij = phi_j(xi_i), factorised in extended precision so that the oracle
  // is more accurate than the construction it checks.
  const LongMatrix vandermonde = ps.space->eval_matrix(ps.points).cast<long double>();
  const Eigen::PartialPivLU<LongMatrix> lu(vandermonde);
  // Cramer's rule in determinant form over/underflows at these sizes; the
  // solve gives the same polynomials.
  constexpr long double kMinRcond = 1e-14L;
  const long double rcond = lu.rcond();
  if (!(rcond > kMinRcond)) {
    throw UnisolvenceError("Vandermonde matrix is numerically singular (rcond " +
                           std::to_string(static_cast<double>(rcond)) + ")");
  }
  FundamentalSet fs;
  fs.space = ps.space;
  fs.coeffs = lu.solve(LongMatrix::Identity(vandermonde.rows(), vandermonde.cols())).cast<double>();
  polish(ps.space->eval_matrix(ps.points), fs.coeffs, 3);
  fs.residual = delta_residual(fs, ps.points);
  return fs;
}

bool is_unisolvent(const PointSet& ps) {
  try {
    build_fundamentals(ps);
    return true;
  } catch (const UnisolvenceError&) {
    return false;
  } catch (const UsageError&) {
    return false;
  }
}

}  // namespace lebopt
