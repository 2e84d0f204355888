#include "doctest.h"
#include "oracles.hpp"
#include "spectra/core/facialred.hpp"
#include "spectra/core/instances.hpp"

using namespace spectra;

TEST_CASE("no stall on a solved trace") {
  const auto inst = gen_elliptope(5, WMode::Random, 2);
  const auto tr = newton_solve(inst);
  REQUIRE(tr.status == NewtonStatus::Solved);
  CHECK_THROWS_AS(certificate_from_stall(tr, inst), Error);
}

TEST_CASE("sd=2 fixture: first certificate and step") {
  const auto inst = fixture_paper_sd2();
  const auto c = solve_aux_gauss_newton(inst);
  REQUIRE(c);
  CHECK(c->valid(inst.b));
  CHECK(std::abs(c->lam(2)) == doctest::Approx(1.0));
  CHECK(std::abs(c->lam(0)) <= 1e-12);
  CHECK(std::abs(c->lam(1)) <= 1e-12);
  const auto st = fr_step(inst, *c);
  CHECK(st.Q.dim() == 2);
  CHECK(std::abs(st.Q.projector()(2, 2)) <= 1e-12);
  CHECK(st.rows_removed == 1);
  CHECK(st.reduced.n() == 2);
  CHECK(st.reduced.m() == 2);
}

TEST_CASE("sd=2 fixture: fr_loop reaches the singleton face") {
  const auto inst = fixture_paper_sd2();
  const auto res = fr_loop(inst);
  CHECK(res.chain.sd_hat() == 2);
  CHECK(res.chain.V.dim() == 1);
  CHECK(std::abs(std::abs(res.chain.V.V()(0, 0)) - 1.0) <= 1e-12);
  REQUIRE(res.reduced.m() == 1);
  CHECK(std::abs(std::abs(res.reduced.map.rows()(0, 0)) - 1.0) <= 1e-12);
  CHECK(std::abs(res.reduced.b(0) / res.reduced.map.rows()(0, 0) - 1.0) <= 1e-12);
  CHECK(check_independence(res.chain));
  CHECK(res.chain.iips_hat() == 2);
  // lambda^2 = e2 in original coordinates
  CHECK(std::abs(std::abs(res.chain.steps[1].lam_orig(1)) - 1.0) <= 1e-12);
}

TEST_CASE("sd=2 fixture: ybar + lambda is a root of F_f, ybar + lambda^2 not of F") {
  const auto inst = fixture_paper_sd2();
  const auto res = fr_loop(inst);
  const Vector ybar = inst.meta.optimal->y;
  CHECK(verify_chain_roots(res.chain, inst, ybar));
  Vector l2 = res.chain.steps[1].lam_orig;
  if (l2(1) < 0) l2 = -l2;
  CHECK(residual_F_face(inst, ybar + l2, res.chain.V).norm() <= 1e-12);
  CHECK(residual_F(inst, ybar + l2).F.norm() >= 1e-3);
}

TEST_CASE("face is {0} when the exposing vector is definite") {
  const std::vector<Matrix> mats{Matrix::Identity(2, 2)};
  BapInstance inst{LinearMap::from_matrices(2, mats), Vector::Zero(1), SymMatrix::identity(2), {}};
  const auto c = solve_aux_gauss_newton(inst);
  REQUIRE(c);
  CHECK_THROWS_AS(fr_step(inst, *c), Error);
  try {
    fr_step(inst, *c);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FaceIsZero);
  }
}

TEST_CASE("certificate without a positive part is rejected") {
  const auto inst = fixture_paper_sd2();
  AuxCertificate c;
  c.lam = Vector::Zero(3);
  c.lam(2) = -1.0;
  CHECK_THROWS_AS(fr_step(inst, c), Error);
}

TEST_CASE("dual-unattained fixture reduces to m = 0") {
  const auto inst = fixture_paper_dual_fail();
  const auto res = fr_loop(inst);
  CHECK(res.chain.sd_hat() == 1);
  CHECK(res.reduced.m() == 0);
  CHECK(res.reduced.n() == 1);
}

TEST_CASE("planted sd=2 instance needs two steps with independent certificates") {
  const auto inst = gen_planted_noslater(16, 12, 2, 2, 4, 3);
  const auto res = fr_loop(inst);
  CHECK(res.chain.sd_hat() == 2);
  CHECK(res.chain.iips_hat() == 2);
  CHECK(check_independence(res.chain));
  CHECK(res.chain.slater_after);
}

TEST_CASE("strictly feasible instance yields no certificate") {
  const auto inst = gen_random_slater(6, 6, 8);
  CHECK_FALSE(solve_aux_gauss_newton(inst).has_value());
}

TEST_CASE("stall eigenvector points at the planted support") {
  const auto inst = gen_planted_noslater(15, 7, 1, 1, 5, 0);
  const auto tr = newton_solve(inst);
  REQUIRE(tr.status != NewtonStatus::Solved);
  const auto sc = certificate_from_stall(tr, inst);
  CHECK(sc.lam.norm() == doctest::Approx(1.0));
  CHECK(sc.suspect.size() >= 1);
  const auto c = solve_aux_gauss_newton(inst, sc);
  REQUIRE(c);
  CHECK(c->valid(inst.b));
  REQUIRE(inst.meta.certificates.size() == 1);
  const Vector planted = inst.meta.certificates[0].normalized();
  CHECK(std::abs(std::abs(planted.dot(c->lam)) - 1.0) <= 1e-6);
}

TEST_CASE("empty chain is rejected by the independence check") {
  CHECK_THROWS_AS(check_independence(initial_chain(3, 2)), Error);
}
