#pragma once

#include <map>
#include <utility>
#include <vector>

// Published optimal Lebesgue constants, indexed by dimension; entry k is
// degree k + 1.
namespace lebopt::test {

inline const std::map<int, std::vector<double>> kCubeTable{
    {1, {1, 1.25, 1.42, 1.56, 1.67, 1.77, 1.85, 1.93, 1.99, 2.05}},
    {2, {1.89, 2.38, 2.73, 3.12, 3.51, 3.86, 4.18, 4.44, 4.71, 4.96}},
    {3, {2.00, 2.95, 4.05, 5.09, 6.40}},
    {4, {2.32, 3.67, 5.40, 7.85}},
    {5, {2.45, 4.20}},
    {6, {2.60, 5.32}},
    {7, {2.74, 6.55}},
    {8, {3.10, 7.74}},
    {9, {3.25}},
    {10, {3.56}},
};

// Earlier results on the square, degrees 1..10.
inline const std::vector<double> kPriorSquare{2.00, 2.39, 2.73, 3.24, 3.59,
                                               4.00, 4.34, 4.90, 5.18, 5.32};

inline const std::map<int, std::vector<double>> kBallTable{
    {2, {1.67, 1.99, 2.47, 2.95, 3.39, 3.85, 4.30, 4.84, 5.20, 5.69}},
    {3, {2.00, 3.06, 3.56, 4.78, 5.92}},
};

// Earlier results on the disk, degrees 1..10.
inline const std::vector<double> kPriorDisk{1.67, 1.99, 2.47, 2.97, 3.50,
                                             4.30, 5.08, 5.43, 6.73, 7.62};

inline std::vector<std::pair<int, double>> table_row(const std::vector<double>& values) {
  std::vector<std::pair<int, double>> out;
  for (std::size_t k = 0; k < values.size(); ++k) out.emplace_back(static_cast<int>(k) + 1, values[k]);
  return out;
}

}  // namespace lebopt::test
