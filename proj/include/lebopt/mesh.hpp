#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lebopt/domain.hpp"
#include "lebopt/polyspace.hpp"

namespace lebopt {

inline constexpr int kDefaultMeshCap = 129;

// Finite evaluation set standing in for the continuous domain.
struct Mesh {
  Points points;
  Domain domain;
  int m = 0;             // per-coordinate resolution
  int degree_for = 0;    // degree the mesh was built for
  std::optional<double> constant;  // C(Y) with max_D |p| <= C(Y) max_Y |p|
  std::size_t raw_cardinality = 0;  // before duplicate removal

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  std::string id() const;
};

// m Gauss-Chebyshev-Lobatto nodes mapped onto [a, b], ascending, endpoints
// exact. m == 1 gives the midpoint.
std::vector<double> gcl_nodes(int m, double a = -1.0, double b = 1.0);

// Tensor product of GCL_m in every coordinate; m^d points, C = cos(pi n / 2m)^-d.
Mesh cube_mesh(int degree, int dim, int m);

// Polar grid GCL_m (radius in [-1,1]) x {k pi / m : k < m}, origin copies merged.
Mesh disk_mesh(int degree, int m);

// Spherical grid GCL_m on [0,1] x {k pi / m : k < m} x {k pi / m : k < 2m}.
// Origin and pole copies are merged; no constant is known for this mesh.
Mesh ball3_mesh(int degree, int m);

// Picks the admissible mesh family for the domain. Balls beyond d = 3 are
// unsupported.
Mesh make_mesh(const Domain& domain, int degree, int m);

// min(2^{n-1} + 1, cap)
int default_resolution(int degree, int cap = kDefaultMeshCap);

// Next element of the nested chain 3, 5, 9, 17, ...
inline int next_resolution(int m) { return 2 * m - 1; }

// Chain resolutions from the smallest m > n up to default_resolution(n, cap);
// always at least one entry.
std::vector<int> refinement_resolutions(int degree, int cap = kDefaultMeshCap);

std::vector<Mesh> refinement_schedule(int degree, int dim, const Domain& domain,
                                      int cap = kDefaultMeshCap);

void write_mesh_csv(const Mesh& mesh, std::ostream& out);

}  // namespace lebopt
