#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "lebopt/analysis.hpp"
#include "lebopt/errors.hpp"
#include "lebopt/lebesgue.hpp"
#include "reference_tables.hpp"
#include "support.hpp"

using namespace lebopt;
using test::points;

namespace {

PointSet make_set(Points p, int degree, Domain dom) {
  return PointSet(std::move(p), std::make_shared<const PolySpace>(degree, dom.dim), dom);
}

PointSet random_set(int degree, Domain dom, Rng& rng) {
  return make_set(sample_uniform(dom, total_degree_dimension(degree, dom.dim), rng), degree, dom);
}

std::vector<std::pair<int, double>> series(std::initializer_list<double> values) {
  std::vector<std::pair<int, double>> out;
  int n = 1;
  for (double v : values) out.emplace_back(n++, v);
  return out;
}

}  // namespace

TEST_CASE("cube fit recovers exact data") {
  std::vector<std::pair<int, double>> data;
  for (int n = 1; n <= 10; ++n) data.emplace_back(n, 0.7 * std::pow(std::log(n + 1.0), 2) + 0.3);
  const auto fit = fit_cube_growth(data, 2);
  CHECK(std::abs(fit.c1 - 0.7) <= 1e-10);
  CHECK(std::abs(fit.c2 - 0.3) <= 1e-10);
  CHECK(fit.residual <= 1e-10);
  CHECK(fit.data.size() == 10);
}

TEST_CASE("ball fit recovers exact data") {
  for (int d = 2; d <= 3; ++d) {
    std::vector<std::pair<int, double>> data;
    for (int n = 1; n <= 6; ++n) data.emplace_back(n, 1.3 * std::pow(n, (d - 1) / 2.0) - 0.2);
    const auto fit = fit_ball_growth(data, d);
    CHECK(std::abs(fit.c1 - 1.3) <= 1e-10);
    CHECK(std::abs(fit.c2 + 0.2) <= 1e-10);
    CHECK(fit.residual <= 1e-10);
    std::vector<std::pair<int, double>> pure;
    for (int n = 1; n <= 6; ++n) pure.emplace_back(n, 0.9 * std::pow(n, (d - 1) / 2.0));
    const auto p = fit_ball_growth(pure, d);
    CHECK(std::abs(p.pure_c - 0.9) <= 1e-10);
    CHECK(p.pure_residual <= 1e-10);
  }
}

TEST_CASE("fit errors") {
  CHECK_THROWS_AS(fit_cube_growth(series({1.0, 1.25}), 1), FitError);
  const std::vector<std::pair<int, double>> same{{3, 1.0}, {3, 1.1}, {3, 1.2}};
  CHECK_THROWS_AS(fit_cube_growth(same, 1), FitError);
  const std::vector<std::pair<int, double>> zero{{0, 1.0}, {1, 1.1}, {2, 1.2}};
  CHECK_THROWS_AS(fit_cube_growth(zero, 1), FitError);
  // d = 1 on the ball makes the regressor constant.
  CHECK_THROWS_AS(fit_ball_growth(series({1.0, 1.25, 1.42}), 1), FitError);
}

TEST_CASE("fits of the published tables agree with a QR least squares solve") {
  auto check = [](const GrowthFit& fit) {
    const auto rows = static_cast<Eigen::Index>(fit.data.size());
    Matrix a(rows, 2);
    Vector y(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      a(i, 0) = fit.regressor(fit.data[i].first);
      a(i, 1) = 1.0;
      y(i) = fit.data[i].second;
    }
    const Vector c = a.colPivHouseholderQr().solve(y);
    CHECK(fit.c1 == doctest::Approx(c(0)).epsilon(1e-10));
    CHECK(fit.c2 == doctest::Approx(c(1)).epsilon(1e-10));
    const double rms = std::sqrt((a * c - y).squaredNorm() / static_cast<double>(rows));
    CHECK(fit.residual == doctest::Approx(rms).epsilon(1e-10));
    const double pure = a.col(0).dot(y) / a.col(0).squaredNorm();
    CHECK(fit.pure_c == doctest::Approx(pure).epsilon(1e-10));
  };
  for (int d = 1; d <= 4; ++d) check(fit_cube_growth(test::table_row(test::kCubeTable.at(d)), d));
  for (int d = 2; d <= 3; ++d) check(fit_ball_growth(test::table_row(test::kBallTable.at(d)), d));

  const auto d1 = fit_cube_growth(test::table_row(test::kCubeTable.at(1)), 1);
  CHECK(std::abs(d1.c1 - 2 / std::numbers::pi) <= 0.2 * (2 / std::numbers::pi));
  CHECK(d1.residual <= 0.1);
  const auto d2 = fit_cube_growth(test::table_row(test::kCubeTable.at(2)), 2);
  CHECK(d2.residual <= 0.1);
  // Least squares minimises the RMS, so these are the smallest residuals the
  // models admit on the published rows.
  const auto d4 = fit_cube_growth(test::table_row(test::kCubeTable.at(4)), 4);
  CHECK(d4.residual == doctest::Approx(0.117841).epsilon(1e-5));
  const auto b2 = fit_ball_growth(test::table_row(test::kBallTable.at(2)), 2);
  CHECK(b2.residual == doctest::Approx(0.215178).epsilon(1e-5));
}

TEST_CASE("symmetry group") {
  CHECK(symmetry_group(1).size() == 2);
  CHECK(symmetry_group(2).size() == 8);
  CHECK(symmetry_group(3).size() == 48);
  CHECK(symmetry_group(6).size() == 46080);
  CHECK(symmetry_group(7).size() == 128);
  const auto p = points({{0.5, -0.25}});
  const CubeSymmetry swap_flip{{1, 0}, {-1.0, 1.0}};
  const Points q = swap_flip.apply(p);
  CHECK(q(0, 0) == 0.25);
  CHECK(q(0, 1) == 0.5);
  const Points z = CubeSymmetry{{0, 1}, {-1.0, -1.0}}.apply(points({{0.0, 0.0}}));
  CHECK_FALSE(std::signbit(z(0, 0)));
}

TEST_CASE("canonical form is invariant and idempotent") {
  Rng rng(6);
  for (int d = 1; d <= 3; ++d) {
    const auto ps = random_set(2, Domain::cube(d), rng);
    const auto c = canonicalize(ps);
    CHECK(canonicalize(c).points == c.points);
    for (const auto& g : symmetry_group(d)) {
      const auto image = make_set(g.apply(ps.points), 2, Domain::cube(d));
      const auto ci = canonicalize(image);
      CHECK((ci.points - c.points).cwiseAbs().maxCoeff() <= 1e-15);
    }
    const Mesh mesh = cube_mesh(2, d, 9);
    CHECK(std::abs(lebesgue_constant(c, mesh).value - lebesgue_constant(ps, mesh).value) <=
          1e-12 * lebesgue_constant(ps, mesh).value);
  }
}

TEST_CASE("assignment solver") {
  Matrix cost(3, 3);
  cost << 4, 1, 3,
          2, 0, 5,
          3, 2, 2;
  const auto a = solve_assignment(cost);
  double total = 0.0;
  for (int i = 0; i < 3; ++i) total += cost(i, a[i]);
  CHECK(total == 5.0);
  // Brute force over all permutations on random 6x6 instances.
  Rng rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix c = Matrix::NullaryExpr(6, 6, [&] { return u(rng); });
    std::vector<int> perm{0, 1, 2, 3, 4, 5};
    double best = 1e300;
    do {
      double t = 0.0;
      for (int i = 0; i < 6; ++i) t += c(i, perm[i]);
      best = std::min(best, t);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const auto s = solve_assignment(c);
    double t = 0.0;
    for (int i = 0; i < 6; ++i) t += c(i, s[i]);
    CHECK(t == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("set distance") {
  Rng rng(10);
  std::normal_distribution<double> g;
  for (int d = 1; d <= 3; ++d) {
    const auto a = random_set(2, Domain::cube(d), rng);
    for (const auto& s : symmetry_group(d)) {
      const auto b = make_set(s.apply(a.points), 2, Domain::cube(d));
      CHECK(set_distance(a, b) <= 1e-12);
    }
    Points noisy = a.points;
    const double eps = 1e-6;
    for (Eigen::Index i = 0; i < noisy.size(); ++i) noisy.data()[i] += eps * g(rng) / std::sqrt(d * 3.0);
    const auto b = make_set(noisy, 2, Domain::cube(d));
    // Each coordinate moves by at most ~4 sigma; the bound is per point.
    CHECK(set_distance(a, b) <= static_cast<double>(a.size()) * eps * 4);
    const auto c = random_set(2, Domain::cube(d), rng);
    const double ab = set_distance(a, b), bc = set_distance(b, c), ac = set_distance(a, c);
    CHECK(ab == doctest::Approx(set_distance(b, a)).epsilon(1e-12));
    CHECK(ac <= ab + bc + 1e-12);
    CHECK(ac > 0.0);
  }
  const auto ball = random_set(2, Domain::ball(2), rng);
  CHECK(setdistance(ball, ball).group_restricted);
  CHECK_THROWS_AS(set_distance(random_set(2, Domain::cube(2), rng), random_set(3, Domain::cube(2), rng)),
                  UsageError);
}

TEST_CASE("Dubiner distance") {
  const std::vector<double> zero{0.0}, one{1.0};
  CHECK(dubiner_distance(zero, one) == doctest::Approx(std::numbers::pi / 2));
  const std::vector<double> x{0.3};
  CHECK(dubiner_distance(x, x) == 0.0);
  const std::vector<double> a{1.0, 1.0}, b{-1.0, -1.0};
  CHECK(dubiner_distance(a, b) == doctest::Approx(std::numbers::pi));
  const std::vector<double> bad{1.5};
  CHECK_THROWS_AS(dubiner_distance(bad, zero), UsageError);
  const std::vector<double> three{0.0, 0.0, 0.0};
  CHECK_THROWS_AS(dubiner_distance(three, three), UsageError);
}

TEST_CASE("boundary distances") {
  const auto ps = make_set(points({{0.0, 0.0}, {0.6, 0.8}, {0.5, 0.0}}), 1, Domain::ball(2));
  const auto d = boundary_distances(ps);
  CHECK(d[0] == 1.0);
  CHECK(std::abs(d[1]) <= 1e-15);
  CHECK(d[2] == 0.5);
  CHECK_THROWS_AS(boundary_distances(make_set(points({{0.0}, {1.0}}), 1, Domain::cube(1))), UsageError);
}

TEST_CASE("Gauss-Legendre-Lobatto nodes") {
  const auto g3 = gll_nodes(3);
  CHECK(g3 == std::vector<double>{-1.0, 0.0, 1.0});
  const auto g4 = gll_nodes(4);
  CHECK(g4[2] == doctest::Approx(1 / std::sqrt(5.0)).epsilon(1e-14));
  const auto g5 = gll_nodes(5);
  CHECK(g5[3] == doctest::Approx(std::sqrt(3.0 / 7.0)).epsilon(1e-14));
  // Lobatto quadrature with weights 2/(m(m-1) P_{m-1}^2) integrates degree 2m-3 exactly.
  for (int m = 3; m <= 12; ++m) {
    const auto nodes = gll_nodes(m);
    double integral = 0.0;
    for (double x : nodes) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m - 1; ++k) {
        const double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      const double w = 2.0 / (m * (m - 1) * p1 * p1);
      integral += w * std::pow(x, 2 * m - 4);
    }
    CHECK(integral == doctest::Approx(2.0 / (2 * m - 3)).epsilon(1e-12));
  }
}
