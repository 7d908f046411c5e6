#include <catch_amalgamated.hpp>
#include <random>

#include "pbfem/linalg.hpp"

using namespace pbfem;

TEST_CASE("builder sums duplicates", "[linalg]") {
  MatrixBuilder b(2, 2);
  b.add(0, 0, 1.0);
  b.add(0, 0, 1.0);
  b.add(1, 1, 3.0);
  const SpMat a = b.finalize();
  CHECK(a.coeff(0, 0) == Catch::Approx(2.0));
  CHECK(a.coeff(1, 1) == Catch::Approx(3.0));
  CHECK(a.nonZeros() == 2);
  CHECK_THROWS(b.add(2, 0, 1.0));
}

TEST_CASE("identity assembly acts as identity", "[linalg]") {
  const int n = 13;
  MatrixBuilder b(n, n);
  for (int i = 0; i < n; ++i) b.add(i, i, 1.0);
  const SpMat a = b.finalize();
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = std::sin(i + 1.0);
  CHECK((a * x - x).norm() == 0.0);
  const Vec y = solve_direct(a, x);
  CHECK((y - x).norm() < 1e-14 * x.norm());
}

TEST_CASE("solve_direct on a random SPD system", "[linalg]") {
  const int n = 50;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (std::abs(i - j) <= 3) r(i, j) = gauss(rng);
  const Eigen::MatrixXd spd = r.transpose() * r + Eigen::MatrixXd::Identity(n, n);
  MatrixBuilder b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (spd(i, j) != 0.0) b.add(i, j, spd(i, j));
  const SpMat a = b.finalize();
  Vec rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = gauss(rng);
  const Vec x = solve_direct(a, rhs);
  CHECK((a * x - rhs).norm() <= 1e-12 * rhs.norm());
}

TEST_CASE("solve_direct reports singularity", "[linalg]") {
  MatrixBuilder b(3, 3);
  b.add(0, 0, 1.0);
  b.add(1, 1, 1.0);  // row/col 2 empty -> structurally singular
  const SpMat a = b.finalize();
  Vec rhs = Vec::Ones(3);
  CHECK_THROWS_AS(solve_direct(a, rhs), std::runtime_error);
}

TEST_CASE("matvec transpose consistency", "[linalg]") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = 40;
  MatrixBuilder b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j) b.add(i, j, gauss(rng));
  const SpMat a = b.finalize();
  Vec x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = gauss(rng);
    y[i] = gauss(rng);
  }
  const double lhs = (a * x).dot(y);
  const double rhs = x.dot(SpMat(a.transpose()) * y);
  CHECK(lhs == Catch::Approx(rhs).epsilon(1e-13));
}

TEST_CASE("block solve", "[linalg]") {
  const int nu = 17, nr = 9;
  std::mt19937_64 rng(23);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SECTION("identity blocks with zero RHS and direct RHS") {
    BlockSystem sys;
    MatrixBuilder buu(nu, nu), brr(nr, nr);
    for (int i = 0; i < nu; ++i) buu.add(i, i, 1.0);
    for (int i = 0; i < nr; ++i) brr.add(i, i, 1.0);
    sys.a_uu = buu.finalize();
    sys.a_rr = brr.finalize();
    sys.a_ur = SpMat(nu, nr);
    sys.a_ru = SpMat(nr, nu);
    sys.b_u = Vec::Zero(nu);
    sys.b_r = Vec::Zero(nr);
    auto [du0, dr0] = solve_block(sys);
    CHECK(du0.norm() == 0.0);
    CHECK(dr0.norm() == 0.0);
    for (int i = 0; i < nu; ++i) sys.b_u[i] = gauss(rng);
    for (int i = 0; i < nr; ++i) sys.b_r[i] = gauss(rng);
    auto [du, dr] = solve_block(sys);
    CHECK((du - sys.b_u).norm() < 1e-14 * sys.b_u.norm());
    CHECK((dr - sys.b_r).norm() < 1e-14 * sys.b_r.norm());
  }

  SECTION("manufactured solution on a coupled system") {
    MatrixBuilder buu(nu, nu), bur(nu, nr), bru(nr, nu), brr(nr, nr);
    for (int i = 0; i < nu; ++i) buu.add(i, i, 2.0 + 0.1 * i);
    for (int i = 0; i < nr; ++i) brr.add(i, i, 1.5);
    for (int i = 0; i < nr; ++i) {
      bur.add(i, i, 0.3);
      bru.add(i, i, -0.3);
      bur.add((i + 3) % nu, i, 0.1);
    }
    BlockSystem sys;
    sys.a_uu = buu.finalize();
    sys.a_ur = bur.finalize();
    sys.a_ru = bru.finalize();
    sys.a_rr = brr.finalize();
    Vec du_ref(nu), dr_ref(nr);
    for (int i = 0; i < nu; ++i) du_ref[i] = gauss(rng);
    for (int i = 0; i < nr; ++i) dr_ref[i] = gauss(rng);
    sys.b_u = sys.a_uu * du_ref + sys.a_ur * dr_ref;
    sys.b_r = sys.a_ru * du_ref + sys.a_rr * dr_ref;
    auto [du, dr] = solve_block(sys);
    CHECK((du - du_ref).norm() <= 1e-11 * du_ref.norm());
    CHECK((dr - dr_ref).norm() <= 1e-11 * dr_ref.norm());

    BlockSolver solver;
    solver.factorize(sys);
    auto [du2, dr2] = solver.solve(sys.b_u, sys.b_r);
    CHECK((du2 - du_ref).norm() <= 1e-11 * du_ref.norm());
    CHECK((dr2 - dr_ref).norm() <= 1e-11 * dr_ref.norm());
  }
}

TEST_CASE("cached LU transpose solve", "[linalg]") {
  const int n = 30;
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixBuilder b(n, n);
  for (int i = 0; i < n; ++i) {
    b.add(i, i, 4.0 + gauss(rng) * 0.1);
    if (i + 1 < n) {
      b.add(i, i + 1, gauss(rng));
      b.add(i + 1, i, gauss(rng));
    }
  }
  const SpMat a = b.finalize();
  CachedLU lu;
  lu.factorize(a);
  Vec rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = gauss(rng);
  const Vec x = lu.solve(rhs);
  CHECK((a * x - rhs).norm() <= 1e-12 * rhs.norm());
  const Vec y = lu.solve_transpose(rhs);
  CHECK((SpMat(a.transpose()) * y - rhs).norm() <= 1e-12 * rhs.norm());
}
