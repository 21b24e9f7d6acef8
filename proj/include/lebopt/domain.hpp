#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "lebopt/polyspace.hpp"

namespace lebopt {

enum class DomainKind { Cube, Ball };

// Cube is [-1,1]^d, Ball is the closed Euclidean unit ball.
struct Domain {
  DomainKind kind = DomainKind::Cube;
  int dim = 1;

  Domain() = default;
  Domain(DomainKind k, int d);

  static Domain cube(int d) { return {DomainKind::Cube, d}; }
  static Domain ball(int d) { return {DomainKind::Ball, d}; }

  double diameter() const;
  bool operator==(const Domain&) const = default;
};

std::string to_string(DomainKind kind);
DomainKind parse_domain_kind(const std::string& name);

bool contains(const Domain& dom, std::span<const double> x, double tol = 0.0);

std::vector<double> project(const Domain& dom, std::span<const double> x);
void project_inplace(const Domain& dom, std::span<double> x);
// Projects every row.
void project_rows(const Domain& dom, Points& points);

using Rng = std::mt19937_64;

// Uniform i.i.d. samples. The ball uses rejection from the bounding cube for
// d <= 3 and a Gaussian direction with radius U^{1/d} above that.
Points sample_uniform(const Domain& dom, std::size_t count, Rng& rng);

}  // namespace lebopt
