#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "spectra/core/symcore.hpp"

using namespace spectra;

TEST_CASE("svec is an isometry and smat inverts it") {
  std::mt19937_64 g(7);
  for (int n : {1, 2, 3, 6}) {
    const Matrix a = oracle::random_sym(n, g);
    const Matrix b = oracle::random_sym(n, g);
    CHECK(svec(a).size() == tri(n));
    CHECK(svec(a).dot(svec(b)) == doctest::Approx(oracle::trace_inner(a, b)).epsilon(1e-13));
    CHECK((smat(svec(a)) - a).norm() <= 1e-14 * (1.0 + a.norm()));
  }
  CHECK(order_from_svec_length(10) == 4);
  CHECK(order_from_svec_length(7) == -1);
}

TEST_CASE("svec layout on a 2x2 example") {
  Matrix a(2, 2);
  a << 1, 2, 2, 3;
  const Vector v = svec(a);
  CHECK(v(0) == 1.0);
  CHECK(v(1) == doctest::Approx(2.0 * std::sqrt(2.0)));
  CHECK(v(2) == 3.0);
}

TEST_CASE("asymmetric input is rejected") {
  Matrix a(2, 2);
  a << 1, 2, 0, 3;
  CHECK_THROWS_AS(svec(a), Error);
  CHECK_THROWS_AS(SymMatrix::from_dense(a), Error);
  CHECK_THROWS_AS(svec(Matrix::Zero(2, 3)), Error);
}

TEST_CASE("eig_sym ordering, reconstruction and zero split") {
  std::mt19937_64 g(11);
  const Matrix a = oracle::random_sym(6, g);
  const auto e = eig_sym(SymMatrix::from_dense(a));
  for (Index i = 1; i < e.order(); ++i) CHECK(e.lam(i - 1) >= e.lam(i));
  CHECK((e.reconstruct() - a).norm() <= 1e-12 * a.norm());
  CHECK((e.U.transpose() * e.U - Matrix::Identity(6, 6)).norm() <= 1e-12);

  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 2.0;
  d(2, 2) = -1.0;
  const auto z = eig_sym(SymMatrix::from_dense(d));
  CHECK(z.alpha.size() == 1);
  CHECK(z.beta.size() == 1);
  CHECK(z.gamma.size() == 1);
}

TEST_CASE("PSD projection matches the oracle and the Moreau split") {
  std::mt19937_64 g(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = oracle::random_sym(5, g);
    const auto s = project_psd(SymMatrix::from_dense(a));
    CHECK((s.X.dense() - oracle::psd_part(a)).norm() <= 1e-12 * (1.0 + a.norm()));
    CHECK((s.X.dense() - s.Zneg.dense() - a).norm() <= 1e-12 * (1.0 + a.norm()));
    CHECK(std::abs(s.X.inner(s.Zneg)) <= 1e-12 * (1.0 + a.squaredNorm()));
    CHECK(oracle::min_eig(s.Zneg.dense()) >= -1e-12);
  }
}

TEST_CASE("face projection reduces to the PSD projection on the full face") {
  std::mt19937_64 g(5);
  const Matrix a = oracle::random_sym(4, g);
  const SymMatrix s = SymMatrix::from_dense(a);
  CHECK((project_face(s, FaceRange::full(4)).dense() - project_psd(s).X.dense()).norm() <= 1e-12);
}

TEST_CASE("FaceRange validates orthonormality and composes") {
  Matrix v(3, 2);
  v << 1, 0, 0, 1, 0, 0;
  FaceRange f(v);
  CHECK(f.dim() == 2);
  Matrix inner(2, 1);
  inner << 1, 0;
  const FaceRange c = f.compose(FaceRange(inner));
  CHECK(c.ambient() == 3);
  CHECK(c.dim() == 1);
  CHECK(std::abs(c.V()(0, 0)) == doctest::Approx(1.0));
  Matrix bad(2, 1);
  bad << 1, 1;
  CHECK_THROWS_AS(FaceRange{bad}, Error);
}

TEST_CASE("lambda_min and numerical_rank") {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 4.0;
  d(1, 1) = 1e-14;
  d(2, 2) = -2.0;
  const SymMatrix s = SymMatrix::from_dense(d);
  CHECK(lambda_min(s) == doctest::Approx(-2.0));
  CHECK(numerical_rank(s, 1e-9) == 1);
  CHECK(lambda_min(SymMatrix::zero(0)) == 0.0);
}

TEST_CASE("moreau envelope value") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = -5.0;
  CHECK(moreau_envelope(SymMatrix::from_dense(d)) == doctest::Approx(4.5));
}
