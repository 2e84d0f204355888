#include "doctest.h"
#include "oracles.hpp"
#include "spectra/core/degeneracy.hpp"
#include "spectra/core/instances.hpp"

using namespace spectra;

TEST_CASE("L rank agrees with an independent QR rank") {
  const auto inst = gen_elliptope(6, WMode::Random, 3);
  const auto tr = newton_solve(inst);
  REQUIRE(tr.status == NewtonStatus::Solved);
  const auto l = build_L(inst, tr.terminal.X);
  const auto rep = is_nondegenerate(inst, tr.terminal.X, tr.terminal.Z);
  CHECK(rep.rank_L == oracle::qr_rank(l.L, 1e-8));
  CHECK(rep.m == inst.m());
  CHECK(l.L.cols() == inst.m());
  const Index r = rep.rank_X;
  CHECK(l.L.rows() == tri(r) + r * (inst.n() - r));
}

TEST_CASE("elliptope optimum is nondegenerate") {
  const auto inst = gen_elliptope(8, WMode::Random, 4);
  const auto tr = newton_solve(inst);
  const auto rep = is_nondegenerate(inst, tr.terminal.X, tr.terminal.Z);
  CHECK(rep.verdict == Verdict::Nondegenerate);
}

TEST_CASE("vontope vertex is degenerate") {
  const auto inst = gen_vontope(4, true, WMode::Rank1, 1);
  REQUIRE(inst.meta.optimal);
  const auto rep = is_nondegenerate(inst, inst.meta.optimal->X, inst.meta.optimal->Z);
  CHECK(rep.verdict == Verdict::Degenerate);
  CHECK(rep.rank_X == 1);
}

TEST_CASE("random interior point is nondegenerate") {
  const auto inst = gen_random_slater(6, 8, 2);
  REQUIRE(inst.meta.feasible_point);
  const auto rep = is_nondegenerate(inst, *inst.meta.feasible_point);
  CHECK(rep.verdict == Verdict::Nondegenerate);
  CHECK(rep.rank_X == 6);
}

TEST_CASE("infeasible X is rejected") {
  const auto inst = gen_elliptope(4, WMode::Random, 1);
  CHECK_THROWS_AS(build_L(inst, 2.0 * SymMatrix::identity(4)), Error);
  CHECK_THROWS_AS(build_L(inst, -SymMatrix::identity(4)), Error);
}

TEST_CASE("crosscheck agrees on a nondegenerate solve") {
  const auto inst = gen_elliptope(10, WMode::Random, 7);
  const auto tr = newton_solve(inst);
  const auto cc = jacobian_degeneracy_crosscheck(inst, tr);
  CHECK(cc.outcome == CrossCheck::Agree);
  CHECK(cc.jacobian_invertible);
  REQUIRE(cc.report);
  CHECK(cc.report->strict_complementarity.value_or(false));
}

TEST_CASE("sd2 optimum: degenerate and singular Jacobian agree") {
  const auto inst = fixture_paper_sd2();
  NewtonTrace tr;
  tr.status = NewtonStatus::Solved;
  tr.terminal = *inst.meta.optimal;
  tr.terminal_jacobian = jacobian(inst, inst.meta.optimal->y);
  const auto cc = jacobian_degeneracy_crosscheck(inst, tr);
  REQUIRE(cc.report);
  CHECK(cc.report->strict_complementarity.value_or(false));
  CHECK(cc.report->verdict == Verdict::Degenerate);
  CHECK_FALSE(cc.jacobian_invertible);
  CHECK(cc.outcome == CrossCheck::Agree);
  CHECK_FALSE(cc.report->cond_J.has_value());
}

TEST_CASE("crosscheck is inconclusive without strict complementarity") {
  // X = 11^T on the 2x2 elliptope with Z = 0: ranks sum to 1 < 2.
  const auto inst = gen_elliptope(2, WMode::Feasible, 0);
  NewtonTrace tr;
  tr.status = NewtonStatus::Solved;
  tr.terminal = {SymMatrix::outer(Vector::Ones(2)), Vector::Zero(2), SymMatrix::zero(2)};
  tr.terminal_jacobian = jacobian(inst, Vector::Zero(2));
  const auto cc = jacobian_degeneracy_crosscheck(inst, tr);
  CHECK(cc.outcome == CrossCheck::Inconclusive);
}

TEST_CASE("report JSON has the documented keys") {
  const auto inst = gen_elliptope(4, WMode::Random, 1);
  const auto tr = newton_solve(inst);
  const auto j = is_nondegenerate(inst, tr.terminal.X, tr.terminal.Z).to_json();
  for (const char* k : {"rank_L", "m", "verdict", "sc", "sigma_L", "cond_J"}) CHECK(j.contains(k));
}
