#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "spectra/core/instances.hpp"
#include "spectra/core/ssnewton.hpp"

using namespace spectra;

TEST_CASE("B matrix entries") {
  Vector x(3);
  x << 3.0, 1.0, -1.0;
  const Matrix b = b_matrix(x);
  CHECK(b(0, 1) == 1.0);
  CHECK(b(2, 2) == 0.0);
  CHECK(b(0, 2) == doctest::Approx(0.75));
  CHECK(b(2, 0) == doctest::Approx(0.75));
  CHECK(b(1, 2) == doctest::Approx(0.5));
  Vector z(2);
  z << 1.0, 0.0;
  CHECK_THROWS_AS(b_matrix(z), Error);
  Vector unsorted(2);
  unsorted << -1.0, 1.0;
  CHECK_THROWS_AS(b_matrix(unsorted), Error);
}

TEST_CASE("omega block") {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 2.0;
  d(1, 1) = -2.0;
  d(2, 2) = -6.0;
  const Matrix om = omega_block(eig_sym(SymMatrix::from_dense(d)));
  REQUIRE(om.rows() == 1);
  REQUIRE(om.cols() == 2);
  CHECK(om(0, 0) == doctest::Approx(0.5));
  CHECK(om(0, 1) == doctest::Approx(0.25));
}

TEST_CASE("directional derivative matches central differences off the boundary") {
  std::mt19937_64 g(21);
  for (int t = 0; t < 10; ++t) {
    const Matrix s = oracle::random_sym(5, g);
    const Matrix h = oracle::random_sym(5, g);
    const double eps = 1e-6;
    const Matrix fd = (oracle::psd_part(s + eps * h) - oracle::psd_part(s - eps * h)) / (2 * eps);
    const SymMatrix dd = dir_deriv_proj(SymMatrix::from_dense(s), SymMatrix::from_dense(h));
    CHECK((dd.dense() - fd).norm() <= 1e-6 * (1.0 + fd.norm()));
  }
}

TEST_CASE("directional derivative at a singular point is one-sided") {
  std::mt19937_64 g(22);
  const Matrix q = Eigen::HouseholderQR<Matrix>(oracle::random_sym(4, g)).householderQ();
  Vector lam(4);
  lam << 2.0, 0.0, 0.0, -1.0;
  const Matrix s = q * lam.asDiagonal() * q.transpose();
  const Matrix h = oracle::random_sym(4, g);
  const double eps = 1e-7;
  const Matrix fd = (oracle::psd_part(s + eps * h) - oracle::psd_part(s)) / eps;
  const SymMatrix dd = dir_deriv_proj(SymMatrix::from_dense(s), SymMatrix::from_dense(h), 1e-10);
  CHECK((dd.dense() - fd).norm() <= 1e-5 * (1.0 + fd.norm()));
}

TEST_CASE("column route and Gram route give the same Jacobian") {
  const auto inst = gen_random_slater(6, 8, 3);
  std::mt19937_64 g(5);
  const Vector y = oracle::random_vec(inst.m(), g);
  const auto eig = eig_sym(inst.W + inst.map.adjoint(y));
  const Matrix j = jacobian(inst.map, eig);
  for (Index c = 0; c < inst.m(); ++c) CHECK((jacobian_column(inst.map, eig, c) - j.col(c)).norm() <= 1e-12 * (1.0 + j.norm()));
  CHECK((j - j.transpose()).norm() <= 1e-12 * j.norm());
  CHECK(oracle::min_eig(j) >= -1e-12 * j.norm());
}

TEST_CASE("jacobian spectrum conventions") {
  const auto id = jacobian_spectrum(Matrix::Identity(3, 3));
  CHECK(id.cond == doctest::Approx(1.0));
  CHECK(id.eigenvalues.size() == 3);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1e12;
  d(1, 1) = 1.0;
  CHECK(jacobian_spectrum(d).cond == doctest::Approx(1e12));
  CHECK(jacobian_spectrum(d).eigenvalues(0) == doctest::Approx(1e12));
  CHECK(std::isinf(jacobian_spectrum(Matrix::Zero(2, 2)).cond));
}

TEST_CASE("elliptope solve converges fast and well conditioned") {
  const auto inst = gen_elliptope(10, WMode::Random, 1);
  const auto tr = newton_solve(inst);
  CHECK(tr.status == NewtonStatus::Solved);
  CHECK(tr.iterations() <= 15);
  CHECK(tr.cond() <= 1e3);
  CHECK(tr.relres() <= 1e-13);
}

TEST_CASE("iterates are dual feasible and complementary by construction") {
  const auto inst = gen_random_slater(8, 10, 4);
  const auto tr = newton_solve(inst);
  REQUIRE(tr.status == NewtonStatus::Solved);
  for (const auto& rec : tr.records) {
    const auto ev = residual_F(inst, rec.y);
    CHECK(oracle::min_eig(ev.X.dense()) >= -1e-12);
    CHECK(oracle::min_eig(ev.Z.dense()) >= -1e-12);
    CHECK(std::abs(ev.X.inner(ev.Z)) <= 1e-10 * (1.0 + ev.X.norm() * ev.Z.norm()));
    const SymMatrix lin = ev.X - inst.W - inst.map.adjoint(rec.y) - ev.Z;
    CHECK(lin.norm() <= 1e-12 * (1.0 + inst.W.norm() + rec.y.norm()));
  }
}

TEST_CASE("empty constraint set is solved at once") {
  BapInstance inst{LinearMap(2, Matrix(0, 3)), Vector(0), SymMatrix::identity(2), {}};
  const auto tr = newton_solve(inst);
  CHECK(tr.status == NewtonStatus::Solved);
  CHECK(tr.iterations() == 0);
}

TEST_CASE("iteration limit and options validation") {
  const auto inst = gen_random_slater(6, 8, 5);
  NewtonOptions o;
  o.max_iter = 1;
  o.eps_final = 0.0;
  o.stop_on_cond = false;
  const auto tr = newton_solve(inst, o);
  CHECK(tr.status == NewtonStatus::IterLimit);
  CHECK(tr.records.size() == 2);
  o.max_iter = -1;
  CHECK_THROWS_AS(newton_solve(inst, o), Error);
}

TEST_CASE("trace CSV header and row count") {
  const auto inst = gen_random_slater(5, 4, 6);
  const auto tr = newton_solve(inst);
  const std::string csv = tr.to_csv();
  CHECK(csv.rfind("iter,relres,cond,eigJ_1,eigJ_2,eigJ_3,eigJ_4\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == tr.records.size() + 1);
}

TEST_CASE("planted sd=1 instance stalls on conditioning") {
  const auto inst = gen_planted_noslater(15, 7, 1, 1, 5, 0);
  const auto tr = newton_solve(inst);
  CHECK(tr.status == NewtonStatus::SuspectedDegenerate);
  CHECK(tr.cond() >= 1e10);
  CHECK(tr.relres() >= 1e-9);
  CHECK(tr.relres() <= 1e-6);
}
