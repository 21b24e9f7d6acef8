#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lebopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// One point per row.
using Points = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct MultiIndex {
  std::vector<int> exponents;

  int degree() const;
  std::size_t dim() const { return exponents.size(); }
  bool operator==(const MultiIndex&) const = default;
};

enum class BasisKind {
  Chebyshev,  // T_a(x) = prod_i T_{a_i}(x_i)
  Monomial,   // x^a; kept for cross-checks at small degree
};

/// C(n+d, d) in exact integer arithmetic; throws OverflowError instead of
/// wrapping.
std::size_t total_degree_dimension(int degree, int dim);

/// The total degree space of d-variate polynomials of degree <= n together
/// with a graded basis. Indices are ordered by degree, and lexicographically
/// ascending within each degree block, so for (n, d) = (1, 2) the order is
/// (0,0), (0,1), (1,0).
class PolySpace {
 public:
  PolySpace(int degree, int dim, BasisKind basis = BasisKind::Chebyshev);

  int degree() const { return degree_; }
  int dim() const { return dim_; }
  std::size_t size() const { return indices_.size(); }
  BasisKind basis() const { return basis_; }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  // Offset of the first index of the given degree block; block_start(n+1)
  // equals size().
  std::size_t block_start(int degree) const { return block_starts_.at(degree); }

  // (phi_1(x), ..., phi_N(x)).
  Vector eval(std::span<const double> x) const;
  void eval_into(std::span<const double> x, std::span<double> out) const;

  // Row i holds the basis evaluated at points.row(i).
  Matrix eval_matrix(const Points& points) const;

  // Partial derivatives: result(j, a) = d phi_j / d x_a at x.
  Matrix eval_gradient(std::span<const double> x) const;

  bool operator==(const PolySpace& other) const {
    return degree_ == other.degree_ && dim_ == other.dim_ && basis_ == other.basis_;
  }

 private:
  void univariate(double t, std::span<double> values) const;
  void univariate_derivative(double t, std::span<const double> values,
                             std::span<double> derivs) const;

  int degree_;
  int dim_;
  BasisKind basis_;
  std::vector<MultiIndex> indices_;
  std::vector<std::size_t> block_starts_;
  // Flattened exponents, row-major N x d, for the evaluation loops.
  std::vector<int> flat_;
};

PolySpace enumerate_space(int degree, int dim, BasisKind basis = BasisKind::Chebyshev);

struct Polynomial {
  std::shared_ptr<const PolySpace> space;
  Vector coeffs;

  Polynomial(std::shared_ptr<const PolySpace> s, Vector c);

  double operator()(std::span<const double> x) const;
};

double eval_poly(const Polynomial& p, std::span<const double> x);

// Coefficient vector, in the given Chebyshev-product space, of the monomial
// with exponent `alpha`. Exact up to rounding of the (integer) Chebyshev
// expansion coefficients of t^k.
Vector monomial_in_chebyshev(const PolySpace& space, const MultiIndex& alpha);

}  // namespace lebopt
