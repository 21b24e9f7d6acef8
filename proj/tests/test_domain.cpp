#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "lebopt/domain.hpp"
#include "lebopt/errors.hpp"
#include "support.hpp"

using namespace lebopt;
using test::row;

TEST_CASE("membership") {
  const std::vector<double> corner{1.0, -1.0};
  CHECK(contains(Domain::cube(2), corner));
  const double s = 1.0 / std::sqrt(3.0);
  const std::vector<double> diag{s, s, s};
  CHECK(contains(Domain::ball(3), diag));
  const std::vector<double> out{0.8, 0.8};
  CHECK_FALSE(contains(Domain::ball(2), out));
  const std::vector<double> near{1.0 + 1e-13, 0.0};
  CHECK_FALSE(contains(Domain::cube(2), near));
  CHECK(contains(Domain::cube(2), near, 1e-12));
  CHECK(contains(Domain::ball(2), near, 1e-12));
}

TEST_CASE("projection") {
  const std::vector<double> x{1.5, -2.0};
  CHECK(project(Domain::cube(2), x) == std::vector<double>{1.0, -1.0});
  const std::vector<double> y{3.0, 4.0};
  const auto p = project(Domain::ball(2), y);
  CHECK(p[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.8).epsilon(1e-15));
  const std::vector<double> inside{0.1, -0.3};
  CHECK(project(Domain::cube(2), inside) == inside);
  CHECK(project(Domain::ball(2), inside) == inside);
}

TEST_CASE("projection is idempotent and lands in the domain") {
  Rng rng(42);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int d = 1; d <= 5; ++d) {
    for (auto dom : {Domain::cube(d), Domain::ball(d)}) {
      for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(d);
        for (auto& v : x) v = g(rng);
        const auto p = project(dom, x);
        CHECK(contains(dom, p, 1e-12));
        const auto pp = project(dom, p);
        for (int a = 0; a < d; ++a) {
          if (dom.kind == DomainKind::Cube) {
            CHECK(pp[a] == p[a]);
          } else {
            CHECK(std::abs(pp[a] - p[a]) <= 1e-15 * std::max(1.0, std::abs(p[a])));
          }
        }
      }
    }
  }
}

TEST_CASE("uniform sampling statistics") {
  Rng rng(1);
  const Points c = sample_uniform(Domain::cube(2), 1000, rng);
  CHECK(std::abs(c.col(0).mean()) < 0.1);
  CHECK(std::abs(c.col(1).mean()) < 0.1);
  const Points b = sample_uniform(Domain::ball(2), 1000, rng);
  int inner = 0;
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    CHECK(contains(Domain::ball(2), row(b, i)));
    if (b.row(i).norm() <= 1.0 / std::sqrt(2.0)) ++inner;
  }
  CHECK(std::abs(inner / 1000.0 - 0.5) <= 0.05);
  // Gaussian-direction sampler above d = 3: radius^d is uniform.
  const Points b6 = sample_uniform(Domain::ball(6), 2000, rng);
  int half = 0;
  for (Eigen::Index i = 0; i < b6.rows(); ++i) {
    CHECK(contains(Domain::ball(6), row(b6, i)));
    if (std::pow(b6.row(i).norm(), 6) <= 0.5) ++half;
  }
  CHECK(std::abs(half / 2000.0 - 0.5) <= 0.05);
}

TEST_CASE("sampling is deterministic") {
  for (auto dom : {Domain::cube(3), Domain::ball(3), Domain::ball(5)}) {
    Rng a(9), b(9);
    CHECK(sample_uniform(dom, 50, a) == sample_uniform(dom, 50, b));
  }
}

TEST_CASE("domain names and validation") {
  CHECK(parse_domain_kind("cube") == DomainKind::Cube);
  CHECK(parse_domain_kind("ball") == DomainKind::Ball);
  CHECK(to_string(DomainKind::Ball) == "ball");
  CHECK_THROWS_AS(parse_domain_kind("simplex"), UsageError);
  CHECK_THROWS_AS(Domain(DomainKind::Cube, 0), UsageError);
  CHECK(Domain::cube(3).diameter() == doctest::Approx(2 * std::sqrt(3.0)));
  CHECK(Domain::ball(3).diameter() == doctest::Approx(2.0));
}
