#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "lebopt/domain.hpp"
#include "lebopt/polyspace.hpp"

namespace lebopt {

struct Provenance {
  std::optional<std::uint64_t> seed;
  std::string source;
};

// Candidate interpolation nodes, one per row, for the space `space`.
struct PointSet {
  Points points;
  std::shared_ptr<const PolySpace> space;
  Domain domain;
  Provenance meta;

  PointSet(Points pts, std::shared_ptr<const PolySpace> s, Domain dom, Provenance m = {});

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  int dim() const { return domain.dim; }

  // Throws UsageError unless there are N rows of d coordinates inside the
  // domain (1e-12); coincident points throw UnisolvenceError.
  void validate() const;
};

// Lagrange fundamental polynomials. Column j of `coeffs` holds l_j in the
// basis of `space`, so evaluating all of them at mesh points is
// basis_matrix * coeffs.
struct FundamentalSet {
  std::shared_ptr<const PolySpace> space;
  Matrix coeffs;
  double residual = 0.0;  // max_{j,k} |l_j(xi_k) - delta_jk|

  Polynomial poly(std::size_t j) const;
  // (l_1(x), ..., l_N(x))
  Vector eval(std::span<const double> x) const;
};

// Relative pivot threshold of the elimination.
inline constexpr double kPivotThreshold = 1e-12;
// A construction whose delta residual exceeds this is rejected as singular.
inline constexpr double kResidualTolerance = 1e-10;

/// Newton-type elimination on the graded basis. Each step picks the
/// unassigned (node, working polynomial) pair of largest magnitude, normalises
/// that polynomial to one at the node and eliminates it from every other
/// working polynomial there, so only additions, scalings and point
/// evaluations are used. Throws UnisolvenceError when no remaining pair
/// exceeds kPivotThreshold times the largest basis magnitude over the nodes.
/// The coefficients are then polished by iterative refinement with the delta
/// residual accumulated in quad precision.
FundamentalSet build_fundamentals(const PointSet& ps);

// Same elimination on raw inputs, without the PointSet invariant check and
// with a single extended-precision refinement step instead of the quad
// polish. This is the fast path used by the optimiser.
FundamentalSet build_fundamentals(const Points& nodes, std::shared_ptr<const PolySpace> space);

// Reference construction through the generalised Vandermonde matrix: solves
// V c_j = e_j with an LU factorisation in extended precision, polished by
// quad-precision refinement. For testing at small N.
FundamentalSet vandermonde_fundamentals(const PointSet& ps);

bool is_unisolvent(const PointSet& ps);

// max_{j,k} |l_j(xi_k) - delta_jk| recomputed from scratch.
double delta_residual(const FundamentalSet& fs, const Points& nodes);

}  // namespace lebopt
