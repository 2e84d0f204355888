#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "spectra/core/facialred.hpp"
#include "spectra/core/instances.hpp"
#include "spectra/core/io.hpp"

using namespace spectra;

namespace {

double pf(const BapInstance& inst, const SymMatrix& x) { return (inst.map.apply(x) - inst.b).norm(); }

}  // namespace

TEST_CASE("generators are deterministic in the seed") {
  for (const char* fam : {"elliptope", "vontope-post", "random-slater", "planted-noslater", "dual-unattained"}) {
    GeneratorSpec s;
    s.family = parse_family(fam);
    s.n = fam == std::string("vontope-post") ? 3 : 12;
    s.m = fam == std::string("random-slater") || fam == std::string("planted-noslater") ? std::optional<Index>(8)
                                                                                        : std::nullopt;
    s.seed = 17;
    CAPTURE(fam);
    CHECK(instance_to_string(generate(s)) == instance_to_string(generate(s)));
    GeneratorSpec t = s;
    t.seed = 18;
    if (s.family != Family::DualUnattained || s.n > 2)
      CHECK(instance_to_string(generate(s)) != instance_to_string(generate(t)));
  }
}

TEST_CASE("family and W-mode names round trip") {
  for (Family f : {Family::Elliptope, Family::VontopePre, Family::VontopePost, Family::RandomSlater,
                   Family::PlantedNoSlater, Family::DualUnattained, Family::PaperSd2, Family::PaperDualFail})
    CHECK(parse_family(to_string(f)) == f);
  CHECK(parse_wmode("rank1-forcing") == WMode::Rank1);
  CHECK_THROWS_AS(parse_family("qap"), Error);
  CHECK_THROWS_AS(parse_wmode("zero"), Error);
}

TEST_CASE("elliptope structure") {
  const auto inst = gen_elliptope(5, WMode::Random, 1);
  CHECK(inst.m() == 5);
  CHECK(inst.b == Vector::Ones(5));
  CHECK(pf(inst, SymMatrix::identity(5)) == 0.0);
}

TEST_CASE("rank-1 forcing W records a KKT triple at a rank-one vertex") {
  const auto inst = gen_elliptope(6, WMode::Rank1, 2);
  REQUIRE(inst.meta.optimal);
  CHECK(kkt_residuals(inst, *inst.meta.optimal).max() <= 1e-12);
  CHECK(numerical_rank(inst.meta.optimal->X, 1e-9) == 1);
  const auto tr = newton_solve(inst);
  CHECK((tr.terminal.X.dense() - inst.meta.optimal->X.dense()).norm() <= 1e-8);
}

TEST_CASE("vontope n=3: sizes and the known dependencies") {
  const auto pre = gen_vontope(3, false, WMode::Random, 0);
  const auto post = gen_vontope(3, true, WMode::Random, 0);
  CHECK(pre.n() == 10);
  CHECK(vontope::gangster_set(3).size() == 27 - 9 + 1);
  CHECK(post.n() == 5);
  CHECK(post.m() == 10);
  CHECK(oracle::qr_rank(post.map.rows(), 1e-10) == 10);
  CHECK(vontope::dependent_after_fr(3).size() == 9);
}

TEST_CASE("vontope n=4: post-FR rows are independent") {
  const auto post = gen_vontope(4, true, WMode::Random, 0);
  CHECK(post.n() == 10);
  CHECK(post.m() == 64 - 32 + 1);
  CHECK(oracle::qr_rank(post.map.rows(), 1e-10) == post.m());
}

TEST_CASE("every lifted permutation is feasible in both vontope models") {
  const Index n = 3;
  const auto pre = gen_vontope(n, false, WMode::Random, 0);
  const auto post = gen_vontope(n, true, WMode::Random, 0);
  const Matrix vhat = *post.meta.face_basis;
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  int count = 0;
  do {
    const Matrix y = vontope::lifted_vertex(perm);
    CHECK(pf(pre, SymMatrix::from_dense(y)) <= 1e-12);
    const SymMatrix r = SymMatrix::from_dense(vhat.transpose() * y * vhat, 1e-10);
    CHECK((vhat * r.dense() * vhat.transpose() - y).norm() <= 1e-12);
    CHECK(pf(post, r) <= 1e-12);
    CHECK(oracle::min_eig(r.dense()) >= -1e-12);
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(count == 6);
}

TEST_CASE("pre-FR vontope fails Slater: a certificate exists") {
  const auto pre = gen_vontope(3, false, WMode::Random, 0);
  const auto c = solve_aux_gauss_newton(pre);
  REQUIRE(c);
  CHECK(c->valid(pre.b));
}

TEST_CASE("planted no-Slater: certificates and feasible point") {
  const auto inst = gen_planted_noslater(20, 12, 2, 3, 4, 5);
  REQUIRE(inst.meta.feasible_point);
  CHECK(pf(inst, *inst.meta.feasible_point) <= 1e-10 * (1.0 + inst.b.norm()));
  CHECK(numerical_rank(*inst.meta.feasible_point, 1e-10) < inst.n());
  REQUIRE(inst.meta.certificates.size() == 2);
  const Vector& l1 = inst.meta.certificates[0];
  CHECK(std::abs(inst.b.dot(l1)) <= 1e-10 * l1.norm());
  CHECK(oracle::min_eig(inst.map.adjoint(l1).dense()) >= -1e-10);
  CHECK(inst.map.adjoint(l1).norm() > 1e-3);
  CHECK(oracle::qr_rank(inst.map.rows(), 1e-10) == inst.m());
}

TEST_CASE("planted no-Slater rejects impossible parameters with reasons") {
  CHECK_THROWS_AS(gen_planted_noslater(10, 3, 1, 1, 5, 0), Error);
  CHECK_THROWS_AS(gen_planted_noslater(10, 8, 0, 1, 2, 0), Error);
  CHECK_THROWS_AS(gen_planted_noslater(10, 8, 2, 1, 2, 0), Error);
  try {
    gen_planted_noslater(10, 3, 1, 1, 5, 0);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("exceeds m") != std::string::npos);
  }
}

TEST_CASE("dual-unattained generator: zero rhs and a singular face") {
  const auto inst = gen_dual_unattained(6, 2);
  CHECK(inst.b.norm() == 0.0);
  REQUIRE(inst.meta.feasible_point);
  CHECK(pf(inst, *inst.meta.feasible_point) <= 1e-12);
  const auto res = fr_loop(inst);
  CHECK(res.chain.sd_hat() >= 1);
  const auto canon = gen_dual_unattained(2, 0);
  CHECK(canon.n() == 2);
  CHECK(canon.m() == 1);
}

TEST_CASE("dual-fail fixture data") {
  const auto inst = fixture_paper_dual_fail();
  CHECK(inst.n() == 2);
  CHECK(inst.m() == 1);
  CHECK(inst.b(0) == 0.0);
  CHECK(inst.W(0, 1) == -1.0);
  CHECK(inst.W(0, 0) == 0.0);
}
