#include "lebopt/lebesgue.hpp"

#include "lebopt/errors.hpp"

namespace lebopt {

double lebesgue_function(const FundamentalSet& fs, std::span<const double> x) {
  return fs.eval(x).cwiseAbs().sum();
}

MeshEvaluator::MeshEvaluator(std::shared_ptr<const PolySpace> space, Mesh mesh)
    : space_(std::move(space)), mesh_(std::move(mesh)) {
  if (space_->dim() != mesh_.domain.dim) throw UsageError("MeshEvaluator: dimension mismatch");
  basis_ = space_->eval_matrix(mesh_.points);
}

Vector MeshEvaluator::lebesgue_values(const FundamentalSet& fs) const {
  return fundamental_values(fs).cwiseAbs().rowwise().sum();
}

std::size_t argmax_lowest(const Vector& values) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<std::size_t>(best);
}

LebesgueReport MeshEvaluator::report(const FundamentalSet& fs, bool keep_per_point) const {
  Vector values = lebesgue_values(fs);
  LebesgueReport rep;
  rep.argmax_index = argmax_lowest(values);
  const auto i = static_cast<Eigen::Index>(rep.argmax_index);
  rep.value = values[i];
  rep.argmax.assign(mesh_.points.row(i).data(), mesh_.points.row(i).data() + mesh_.points.cols());
  rep.mesh_id = mesh_.id();
  rep.mesh_m = mesh_.m;
  rep.mesh_cardinality = mesh_.size();
  if (keep_per_point) rep.per_point = std::move(values);
  return rep;
}

LebesgueReport lebesgue_constant(const PointSet& ps, const Mesh& mesh, bool keep_per_point) {
  if (!(ps.domain == mesh.domain)) {
    throw UsageError("lebesgue_constant: point set domain and mesh domain differ");
  }
  const FundamentalSet fs = build_fundamentals(ps);
  return MeshEvaluator(ps.space, mesh).report(fs, keep_per_point);
}

}  // namespace lebopt
