#pragma once

#include <span>
#include <vector>

#include "lebopt/polyspace.hpp"

namespace lebopt::test {

inline std::span<const double> row(const Points& p, Eigen::Index i) {
  return {p.data() + i * p.cols(), static_cast<std::size_t>(p.cols())};
}

inline Points points(std::initializer_list<std::vector<double>> rows) {
  Points p(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    for (std::size_t a = 0; a < r.size(); ++a) p(i, static_cast<Eigen::Index>(a)) = r[a];
    ++i;
  }
  return p;
}

}  // namespace lebopt::test
