#include "lebopt/polyspace.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "lebopt/errors.hpp"

namespace lebopt {

int MultiIndex::degree() const {
  return std::accumulate(exponents.begin(), exponents.end(), 0);
}

std::size_t total_degree_dimension(int degree, int dim) {
  if (degree < 0 || dim < 1) {
    throw UsageError("total_degree_dimension: need degree >= 0 and dim >= 1");
  }
  // r_i = C(n + i, i) = r_{i-1} * (n + i) / i, reduced by gcd so the product
  // stays exact.
  std::uint64_t r = 1;
  const auto n = static_cast<std::uint64_t>(degree);
  for (std::uint64_t i = 1; i <= static_cast<std::uint64_t>(dim); ++i) {
    const std::uint64_t g = std::gcd(r, i);
    const std::uint64_t factor = (n + i) / (i / g);
    std::uint64_t next = 0;
    if (__builtin_mul_overflow(r / g, factor, &next) ||
        next > static_cast<std::uint64_t>(SIZE_MAX)) {
      throw OverflowError("total_degree_dimension(" + std::to_string(degree) + ", " +
                          std::to_string(dim) + ") overflows");
    }
    r = next;
  }
  return static_cast<std::size_t>(r);
}

namespace {

// All exponent vectors of length `dim` summing to `total`, lexicographically
// ascending.
void append_block(int dim, int total, std::vector<int>& prefix, std::vector<MultiIndex>& out) {
  if (static_cast<int>(prefix.size()) == dim - 1) {
    prefix.push_back(total);
    out.push_back(MultiIndex{prefix});
    prefix.pop_back();
    return;
  }
  for (int first = 0; first <= total; ++first) {
    prefix.push_back(first);
    append_block(dim, total - first, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

PolySpace::PolySpace(int degree, int dim, BasisKind basis)
    : degree_(degree), dim_(dim), basis_(basis) {
  const std::size_t n = total_degree_dimension(degree, dim);
  indices_.reserve(n);
  std::vector<int> prefix;
  for (int k = 0; k <= degree; ++k) {
    block_starts_.push_back(indices_.size());
    append_block(dim, k, prefix, indices_);
  }
  block_starts_.push_back(indices_.size());
  flat_.reserve(n * static_cast<std::size_t>(dim));
  for (const auto& idx : indices_) {
    flat_.insert(flat_.end(), idx.exponents.begin(), idx.exponents.end());
  }
}

PolySpace enumerate_space(int degree, int dim, BasisKind basis) {
  return PolySpace(degree, dim, basis);
}

void PolySpace::univariate(double t, std::span<double> values) const {
  values[0] = 1.0;
  if (degree_ == 0) return;
  values[1] = t;
  if (basis_ == BasisKind::Chebyshev) {
    for (int k = 2; k <= degree_; ++k) values[k] = 2.0 * t * values[k - 1] - values[k - 2];
  } else {
    for (int k = 2; k <= degree_; ++k) values[k] = t * values[k - 1];
  }
}

void PolySpace::univariate_derivative(double t, std::span<const double> values,
                                      std::span<double> derivs) const {
  derivs[0] = 0.0;
  if (degree_ == 0) return;
  derivs[1] = 1.0;
  if (basis_ == BasisKind::Chebyshev) {
    // T'_{k} = 2 T_{k-1} + 2 t T'_{k-1} - T'_{k-2}
    for (int k = 2; k <= degree_; ++k) {
      derivs[k] = 2.0 * values[k - 1] + 2.0 * t * derivs[k - 1] - derivs[k - 2];
    }
  } else {
    for (int k = 2; k <= degree_; ++k) derivs[k] = k * values[k - 1];
  }
}

void PolySpace::eval_into(std::span<const double> x, std::span<double> out) const {
  if (static_cast<int>(x.size()) != dim_) {
    throw UsageError("PolySpace::eval: point has " + std::to_string(x.size()) +
                     " coordinates, expected " + std::to_string(dim_));
  }
  const std::size_t stride = static_cast<std::size_t>(degree_) + 1;
  std::vector<double> table(stride * static_cast<std::size_t>(dim_));
  for (int a = 0; a < dim_; ++a) {
    univariate(x[a], std::span<double>(table).subspan(a * stride, stride));
  }
  const std::size_t n = size();
  for (std::size_t j = 0; j < n; ++j) {
    const int* alpha = &flat_[j * dim_];
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= table[a * stride + alpha[a]];
    out[j] = v;
  }
}

Vector PolySpace::eval(std::span<const double> x) const {
  Vector out(static_cast<Eigen::Index>(size()));
  eval_into(x, std::span<double>(out.data(), size()));
  return out;
}

Matrix PolySpace::eval_matrix(const Points& points) const {
  if (points.cols() != dim_) throw UsageError("PolySpace::eval_matrix: dimension mismatch");
  const auto n = static_cast<Eigen::Index>(size());
  // Filled row-wise, then stored column-major for the products downstream.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(points.rows(), n);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    eval_into(std::span<const double>(points.row(i).data(), static_cast<std::size_t>(dim_)),
              std::span<double>(rows.row(i).data(), size()));
  }
  return Matrix(rows);
}

Matrix PolySpace::eval_gradient(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) throw UsageError("PolySpace::eval_gradient: dimension mismatch");
  const std::size_t stride = static_cast<std::size_t>(degree_) + 1;
  std::vector<double> values(stride * dim_);
  std::vector<double> derivs(stride * dim_);
  for (int a = 0; a < dim_; ++a) {
    auto v = std::span<double>(values).subspan(a * stride, stride);
    univariate(x[a], v);
    univariate_derivative(x[a], v, std::span<double>(derivs).subspan(a * stride, stride));
  }
  const auto n = static_cast<Eigen::Index>(size());
  Matrix grad(n, dim_);
  for (Eigen::Index j = 0; j < n; ++j) {
    const int* alpha = &flat_[j * dim_];
    for (int a = 0; a < dim_; ++a) {
      double g = derivs[a * stride + alpha[a]];
      for (int b = 0; b < dim_; ++b) {
        if (b != a) g *= values[b * stride + alpha[b]];
      }
      grad(j, a) = g;
    }
  }
  return grad;
}

Polynomial::Polynomial(std::shared_ptr<const PolySpace> s, Vector c)
    : space(std::move(s)), coeffs(std::move(c)) {
  if (static_cast<std::size_t>(coeffs.size()) != space->size()) {
    throw UsageError("Polynomial: coefficient count does not match the space");
  }
}

double Polynomial::operator()(std::span<const double> x) const {
  return coeffs.dot(space->eval(x));
}

double eval_poly(const Polynomial& p, std::span<const double> x) { return p(x); }

namespace {

// Chebyshev coefficients of t^k: t^k = 2^{1-k} sum_j C(k,j) T_{k-2j}, with the
// T_0 term halved when k is even.
std::vector<double> power_in_chebyshev(int k) {
  std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
  if (k == 0) {
    c[0] = 1.0;
    return c;
  }
  const double scale = std::ldexp(1.0, 1 - k);
  double binom = 1.0;
  for (int j = 0; 2 * j <= k; ++j) {
    const double w = (2 * j == k) ? 0.5 * binom : binom;
    c[static_cast<std::size_t>(k - 2 * j)] += scale * w;
    binom = binom * (k - j) / (j + 1);
  }
  return c;
}

}  // namespace

Vector monomial_in_chebyshev(const PolySpace& space, const MultiIndex& alpha) {
  if (static_cast<int>(alpha.dim()) != space.dim() || alpha.degree() > space.degree()) {
    throw UsageError("monomial_in_chebyshev: exponent outside the space");
  }
  std::vector<std::vector<double>> factors;
  for (int e : alpha.exponents) factors.push_back(power_in_chebyshev(e));
  Vector out = Vector::Zero(static_cast<Eigen::Index>(space.size()));
  const auto& idx = space.indices();
  for (std::size_t j = 0; j < idx.size(); ++j) {
    double v = 1.0;
    for (std::size_t a = 0; a < alpha.dim() && v != 0.0; ++a) {
      const int b = idx[j].exponents[a];
      v *= b < static_cast<int>(factors[a].size()) ? factors[a][b] : 0.0;
    }
    out[static_cast<Eigen::Index>(j)] = v;
  }
  return out;
}

}  // namespace lebopt
