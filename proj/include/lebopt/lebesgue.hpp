#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lebopt/fundamentals.hpp"
#include "lebopt/mesh.hpp"

namespace lebopt {

struct LebesgueReport {
  double value = 0.0;
  std::size_t argmax_index = 0;
  std::vector<double> argmax;
  std::string mesh_id;
  int mesh_m = 0;
  std::size_t mesh_cardinality = 0;
  std::optional<Vector> per_point;  // Lebesgue function at every mesh point
};

// sum_j |l_j(x)|
double lebesgue_function(const FundamentalSet& fs, std::span<const double> x);

// Caches the basis evaluated at every mesh point so that the Lebesgue
// function over the whole mesh is one matrix product.
class MeshEvaluator {
 public:
  MeshEvaluator(std::shared_ptr<const PolySpace> space, Mesh mesh);

  const Mesh& mesh() const { return mesh_; }
  const PolySpace& space() const { return *space_; }
  const std::shared_ptr<const PolySpace>& space_ptr() const { return space_; }
  // Row i: basis at mesh point i.
  const Matrix& basis() const { return basis_; }

  // l_j at every mesh point (mesh size x N).
  Matrix fundamental_values(const FundamentalSet& fs) const { return basis_ * fs.coeffs; }
  Vector lebesgue_values(const FundamentalSet& fs) const;
  LebesgueReport report(const FundamentalSet& fs, bool keep_per_point = false) const;

 private:
  std::shared_ptr<const PolySpace> space_;
  Mesh mesh_;
  Matrix basis_;
};

// Largest entry with ties broken towards the lowest index.
std::size_t argmax_lowest(const Vector& values);

// Mesh-approximated Lebesgue constant. Throws UnisolvenceError when the
// nodes are not unisolvent and UsageError on a domain mismatch.
LebesgueReport lebesgue_constant(const PointSet& ps, const Mesh& mesh, bool keep_per_point = false);

}  // namespace lebopt
