#include "lebopt/domain.hpp"

#include <algorithm>
#include <cmath>

#include "lebopt/errors.hpp"

namespace lebopt {

Domain::Domain(DomainKind k, int d) : kind(k), dim(d) {
  if (d < 1) throw UsageError("Domain: dimension must be >= 1");
}

double Domain::diameter() const {
  return kind == DomainKind::Cube ? 2.0 * std::sqrt(static_cast<double>(dim)) : 2.0;
}

std::string to_string(DomainKind kind) { return kind == DomainKind::Cube ? "cube" : "ball"; }

DomainKind parse_domain_kind(const std::string& name) {
  if (name == "cube") return DomainKind::Cube;
  if (name == "ball") return DomainKind::Ball;
  throw UsageError("unknown domain '" + name + "' (expected cube or ball)");
}

namespace {

void check_dim(const Domain& dom, std::size_t n) {
  if (static_cast<int>(n) != dom.dim) {
    throw UsageError("point has " + std::to_string(n) + " coordinates, domain has dimension " +
                     std::to_string(dom.dim));
  }
}

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

bool contains(const Domain& dom, std::span<const double> x, double tol) {
  check_dim(dom, x.size());
  if (dom.kind == DomainKind::Cube) {
    return std::all_of(x.begin(), x.end(), [&](double v) { return std::abs(v) <= 1.0 + tol; });
  }
  return norm(x) <= 1.0 + tol;
}

void project_inplace(const Domain& dom, std::span<double> x) {
  check_dim(dom, x.size());
  if (dom.kind == DomainKind::Cube) {
    for (double& v : x) v = std::clamp(v, -1.0, 1.0);
    return;
  }
  const double r = norm(x);
  if (r > 1.0) {
    for (double& v : x) v /= r;
  }
}

std::vector<double> project(const Domain& dom, std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  project_inplace(dom, out);
  return out;
}

void project_rows(const Domain& dom, Points& points) {
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    project_inplace(dom, std::span<double>(points.row(i).data(), static_cast<std::size_t>(points.cols())));
  }
}

Points sample_uniform(const Domain& dom, std::size_t count, Rng& rng) {
  if (count < 1) throw UsageError("sample_uniform: count must be >= 1");
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Points out(static_cast<Eigen::Index>(count), dom.dim);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    auto row = std::span<double>(out.row(i).data(), static_cast<std::size_t>(dom.dim));
    if (dom.kind == DomainKind::Cube) {
      for (double& v : row) v = unit(rng);
    } else if (dom.dim <= 3) {
      do {
        for (double& v : row) v = unit(rng);
      } while (norm(row) > 1.0);
    } else {
      std::normal_distribution<double> gauss;
      std::uniform_real_distribution<double> u01(0.0, 1.0);
      double r = 0.0;
      do {
        for (double& v : row) v = gauss(rng);
        r = norm(row);
      } while (r == 0.0);
      const double radius = std::pow(u01(rng), 1.0 / dom.dim);
      for (double& v : row) v *= radius / r;
    }
  }
  return out;
}

}  // namespace lebopt
