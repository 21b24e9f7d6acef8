#include "lebopt/mesh.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <set>

#include "lebopt/errors.hpp"

namespace lebopt {

std::string Mesh::id() const {
  return to_string(domain.kind) + "/d" + std::to_string(domain.dim) + "/m" + std::to_string(m) +
         "/card" + std::to_string(size());
}

std::vector<double> gcl_nodes(int m, double a, double b) {
  if (m < 1) throw UsageError("gcl_nodes: need at least one node");
  if (!(a < b)) throw UsageError("gcl_nodes: empty interval");
  std::vector<double> nodes(static_cast<std::size_t>(m));
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  if (m == 1) {
    nodes[0] = mid;
    return nodes;
  }
  const bool canonical = (a == -1.0 && b == 1.0);
  for (int j = 0; j < m; ++j) {
    // -cos(pi j / (m-1)) written as a sine so the set is exactly symmetric
    // and the centre node is exactly zero.
    const double t = std::sin(std::numbers::pi * (2 * j - (m - 1)) / (2.0 * (m - 1)));
    nodes[j] = canonical ? t : mid + half * t;
  }
  nodes.front() = a;
  nodes.back() = b;
  return nodes;
}

namespace {

void require_resolution(int degree, int m) {
  if (degree < 0) throw UsageError("mesh: degree must be non-negative");
  if (m <= degree) {
    throw UsageError("mesh: resolution m = " + std::to_string(m) +
                     " must exceed the degree n = " + std::to_string(degree));
  }
}

double admissible_constant(int degree, int m, int power) {
  return std::pow(std::cos(std::numbers::pi * degree / (2.0 * m)), -power);
}

// Exact duplicate removal keeping first occurrences. Signed zeros are folded
// so that every representation of the origin compares equal.
Mesh finish(std::vector<std::vector<double>> raw, Domain domain, int degree, int m,
            std::optional<double> constant) {
  std::set<std::vector<double>> seen;
  std::vector<const std::vector<double>*> kept;
  for (auto& p : raw) {
    for (double& v : p) v += 0.0;
    if (seen.insert(p).second) kept.push_back(&p);
  }
  Mesh mesh;
  mesh.points.resize(static_cast<Eigen::Index>(kept.size()), domain.dim);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (int a = 0; a < domain.dim; ++a) mesh.points(static_cast<Eigen::Index>(i), a) = (*kept[i])[a];
  }
  mesh.domain = domain;
  mesh.m = m;
  mesh.degree_for = degree;
  mesh.constant = constant;
  mesh.raw_cardinality = raw.size();
  return mesh;
}

}  // namespace

Mesh cube_mesh(int degree, int dim, int m) {
  require_resolution(degree, m);
  if (dim < 1) throw UsageError("cube_mesh: dimension must be >= 1");
  const auto nodes = gcl_nodes(m);
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) {
    if (total > (std::size_t{1} << 40) / static_cast<std::size_t>(m)) {
      throw UsageError("cube_mesh: m^d is too large");
    }
    total *= static_cast<std::size_t>(m);
  }
  Mesh mesh;
  mesh.points.resize(static_cast<Eigen::Index>(total), dim);
  std::vector<int> digit(static_cast<std::size_t>(dim), 0);
  for (std::size_t i = 0; i < total; ++i) {
    for (int a = 0; a < dim; ++a) mesh.points(static_cast<Eigen::Index>(i), a) = nodes[digit[a]];
    // Last coordinate varies fastest.
    for (int a = dim - 1; a >= 0; --a) {
      if (++digit[a] < m) break;
      digit[a] = 0;
    }
  }
  mesh.domain = Domain::cube(dim);
  mesh.m = m;
  mesh.degree_for = degree;
  mesh.constant = admissible_constant(degree, m, dim);
  mesh.raw_cardinality = total;
  return mesh;
}

Mesh disk_mesh(int degree, int m) {
  require_resolution(degree, m);
  const auto radii = gcl_nodes(m);
  std::vector<std::vector<double>> raw;
  raw.reserve(static_cast<std::size_t>(m) * m);
  for (double r : radii) {
    for (int k = 0; k < m; ++k) {
      const double theta = k * std::numbers::pi / m;
      raw.push_back({r * std::cos(theta), r * std::sin(theta)});
    }
  }
  return finish(std::move(raw), Domain::ball(2), degree, m, admissible_constant(degree, m, 2));
}

Mesh ball3_mesh(int degree, int m) {
  require_resolution(degree, m);
  const auto radii = gcl_nodes(m, 0.0, 1.0);
  std::vector<std::vector<double>> raw;
  raw.reserve(static_cast<std::size_t>(m) * m * 2 * m);
  for (double r : radii) {
    for (int i = 0; i < m; ++i) {
      const double theta = i * std::numbers::pi / m;
      const double st = std::sin(theta);
      const double ct = std::cos(theta);
      for (int k = 0; k < 2 * m; ++k) {
        const double phi = k * std::numbers::pi / m;
        raw.push_back({r * st * std::cos(phi), r * st * std::sin(phi), r * ct});
      }
    }
  }
  return finish(std::move(raw), Domain::ball(3), degree, m, std::nullopt);
}

Mesh make_mesh(const Domain& domain, int degree, int m) {
  if (domain.kind == DomainKind::Cube) return cube_mesh(degree, domain.dim, m);
  switch (domain.dim) {
    case 1: {
      // The one-dimensional ball is the interval.
      Mesh mesh = cube_mesh(degree, 1, m);
      mesh.domain = domain;
      return mesh;
    }
    case 2:
      return disk_mesh(degree, m);
    case 3:
      return ball3_mesh(degree, m);
    default:
      throw UsageError("no admissible mesh is available for the ball in dimension " +
                       std::to_string(domain.dim) + " (supported: d <= 3)");
  }
}

int default_resolution(int degree, int cap) {
  if (degree < 1) throw UsageError("default_resolution: degree must be >= 1");
  if (degree - 1 >= 30) return cap;
  const long long m = (1LL << (degree - 1)) + 1;
  return static_cast<int>(std::min<long long>(m, cap));
}

std::vector<int> refinement_resolutions(int degree, int cap) {
  if (degree < 1) throw UsageError("refinement_resolutions: degree must be >= 1");
  int m = 3;
  while (m <= degree) m = next_resolution(m);
  const int last = default_resolution(degree, cap);
  std::vector<int> out{m};
  while (next_resolution(m) <= last) {
    m = next_resolution(m);
    out.push_back(m);
  }
  return out;
}

std::vector<Mesh> refinement_schedule(int degree, int dim, const Domain& domain, int cap) {
  if (domain.dim != dim) throw UsageError("refinement_schedule: dimension mismatch");
  std::vector<Mesh> out;
  for (int m : refinement_resolutions(degree, cap)) out.push_back(make_mesh(domain, degree, m));
  return out;
}

void write_mesh_csv(const Mesh& mesh, std::ostream& out) {
  const int d = mesh.domain.dim;
  for (int a = 0; a < d; ++a) out << (a ? "," : "") << "x" << (a + 1);
  out << "\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < mesh.points.rows(); ++i) {
    for (int a = 0; a < d; ++a) out << (a ? "," : "") << mesh.points(i, a);
    out << "\n";
  }
}

}  // namespace lebopt
