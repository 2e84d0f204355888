#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "spectra/core/degeneracy.hpp"
#include "spectra/core/facialred.hpp"
#include "spectra/core/instances.hpp"
#include "spectra/core/pipeline.hpp"

using namespace spectra;

namespace {

Matrix random_orthonormal(int n, int r, std::mt19937_64& g) {
  Eigen::HouseholderQR<Matrix> qr(oracle::random_sym(n, g).leftCols(r) + Matrix::Identity(n, r));
  return qr.householderQ() * Matrix::Identity(n, r);
}

// Low-rank and sign-indefinite test matrices, scaled over several decades.
Matrix structured_sym(int n, std::mt19937_64& g, int trial) {
  Matrix a = oracle::random_sym(n, g);
  if (trial % 3 == 1) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    Vector d = es.eigenvalues();
    for (int i = 0; i < n; i += 2) d(i) = 0.0;
    a = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
    a = 0.5 * (a + a.transpose());
  }
  return a * std::pow(10.0, trial % 5 - 2);
}

double min_abs_eig(const Matrix& s) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(s).eigenvalues().cwiseAbs().minCoeff();
}

// Sign s with y + 20 s lam still a root, or 0 when neither side is.
int root_side(const BapInstance& inst, const Vector& y, const Vector& lam) {
  for (int s : {1, -1})
    if (residual_F(inst, y + 20.0 * s * lam).F.norm() <= 1e-10) return s;
  return 0;
}

struct NullCase {
  BapInstance inst;
  Vector lam;
};

std::vector<NullCase> null_cases() {
  std::vector<NullCase> out;
  const auto sd2 = fixture_paper_sd2();
  out.push_back({sd2, fr_loop(sd2).chain.steps[0].lam_orig});
  for (Index n : {3, 4})
    for (WMode w : {WMode::Rank1, WMode::Feasible}) {
      auto inst = gen_vontope(n, false, w, 5);
      out.push_back({inst, inst.meta.certificates.at(0)});
    }
  return out;
}

}  // namespace

TEST_SUITE("moreau") {
  TEST_CASE("X - Zneg = S, <X, Zneg> = 0, both PSD") {
    std::mt19937_64 g(101);
    for (int n : {1, 2, 5, 9, 16})
      for (int trial = 0; trial < 30; ++trial) {
        const Matrix a = structured_sym(n, g, trial);
        const auto s = project_psd(SymMatrix::from_dense(a));
        const double scale = 1.0 + a.norm();
        CHECK((s.X.dense() - s.Zneg.dense() - a).norm() <= 1e-12 * scale);
        CHECK(std::abs(s.X.inner(s.Zneg)) <= 1e-12 * scale * scale);
        CHECK(oracle::min_eig(s.X.dense()) >= -1e-12 * scale);
        CHECK(oracle::min_eig(s.Zneg.dense()) >= -1e-12 * scale);
        CHECK((s.X.dense() - oracle::psd_part(a)).norm() <= 1e-12 * scale);
      }
  }
}

TEST_SUITE("face_projection") {
  TEST_CASE("(n, r) = (5, 2) against a grid search") {
    std::mt19937_64 g(202);
    for (int trial = 0; trial < 8; ++trial) {
      const Matrix v = random_orthonormal(5, 2, g);
      const Matrix u = oracle::random_sym(5, g);
      const Matrix got = project_face(SymMatrix::from_dense(u), FaceRange(v)).dense();
      const Matrix want = oracle::face_projection_grid(u, v);
      CAPTURE(trial);
      CHECK((got - want).norm() <= 1e-6 * (1.0 + u.norm()));
    }
  }
}

TEST_SUITE("jacobian_fd") {
  TEST_CASE("columns match central differences at 50 nonsingular points") {
    std::mt19937_64 g(303);
    int points = 0, draws = 0;
    while (points < 50 && draws < 500) {
      ++draws;
      const Index n = 4 + draws % 4;
      const Index m = 3 + draws % 5;
      const auto inst = gen_random_slater(n, m, static_cast<std::uint64_t>(draws));
      const Vector y = oracle::random_vec(static_cast<int>(inst.m()), g);
      const Matrix s = (inst.W + inst.map.adjoint(y)).dense();
      if (min_abs_eig(s) < 1e-3) continue;
      const Matrix j = jacobian(inst, y);
      if (Eigen::JacobiSVD<Matrix>(j).singularValues().minCoeff() < 1e-8) continue;
      const Matrix fd = oracle::fd_jacobian([&](const Vector& z) { return residual_F(inst, z).F; }, y, 1e-6);
      for (Index c = 0; c < j.cols(); ++c) {
        CAPTURE(draws);
        CHECK((j.col(c) - fd.col(c)).norm() <= 1e-5 * std::max(1.0, j.col(c).norm()));
      }
      ++points;
    }
    CHECK(points == 50);
  }
}

TEST_SUITE("envelope") {
  TEST_CASE("gradient of the dual function is F, with O(h^2) central error") {
    std::mt19937_64 g(404);
    int checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
      const auto inst = gen_random_slater(6, 5, static_cast<std::uint64_t>(trial));
      const Vector y = oracle::random_vec(5, g);
      if (min_abs_eig((inst.W + inst.map.adjoint(y)).dense()) < 0.05) continue;
      const Vector d = oracle::random_vec(5, g).normalized();
      auto theta = [&](double t) {
        const Vector z = y + t * d;
        return moreau_envelope(inst.W + inst.map.adjoint(z)) - inst.b.dot(z);
      };
      const double exact = residual_F(inst, y).F.dot(d);
      std::vector<double> err;
      for (double h : {4e-3, 2e-3, 1e-3}) err.push_back(std::abs((theta(h) - theta(-h)) / (2 * h) - exact));
      CAPTURE(trial);
      for (std::size_t k = 1; k < err.size(); ++k) {
        if (err[k - 1] < 1e-10) continue;
        const double ratio = err[k - 1] / err[k];
        CHECK(ratio >= 3.0);
        CHECK(ratio <= 5.0);
      }
      CHECK(err.back() <= 1e-4);
      ++checked;
    }
    CHECK(checked >= 10);
  }
}

TEST_SUITE("null_direction") {
  TEST_CASE("certificates are null directions of J and keep roots") {
    for (const auto& nc : null_cases()) {
      const auto& inst = nc.inst;
      CAPTURE(inst.meta.family);
      REQUIRE(inst.meta.optimal);
      const Vector ybar = inst.meta.optimal->y;
      REQUIRE(residual_F(inst, ybar).F.norm() <= 1e-10);
      const int s = root_side(inst, ybar, nc.lam);
      REQUIRE(s != 0);
      const Vector base = ybar + 10.0 * s * nc.lam;
      const Matrix j = jacobian(inst, base);
      CHECK((j * nc.lam).norm() <= 1e-8 * j.norm() * nc.lam.norm());
      for (double t : {1.0, -1.0, 10.0, -10.0}) {
        CAPTURE(t);
        CHECK(residual_F(inst, base + t * nc.lam).F.norm() <= 1e-10);
      }
    }
  }
}

TEST_SUITE("crosscheck") {
  TEST_CASE("degeneracy verdict agrees with Jacobian singularity under strict complementarity") {
    std::vector<std::pair<BapInstance, NewtonTrace>> runs;
    NewtonOptions free_run;
    free_run.stop_on_cond = false;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto inst = gen_elliptope(10, WMode::Random, seed);
      runs.emplace_back(inst, newton_solve(inst));
    }
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto inst = gen_random_slater(10, 10, seed);
      runs.emplace_back(inst, newton_solve(inst));
    }
    for (WMode w : {WMode::Random, WMode::Rank1}) {
      auto inst = gen_vontope(4, true, w, 0);
      runs.emplace_back(inst, newton_solve(inst, free_run));
    }
    {
      auto inst = gen_planted_noslater(15, 7, 1, 1, 5, 0);
      auto red = fr_loop(inst).reduced;
      runs.emplace_back(red, newton_solve(red));
    }
    // recorded optima, Jacobian at the recorded dual point
    for (const auto& inst : {fixture_paper_sd2(), gen_vontope(4, true, WMode::Rank1, 0), gen_elliptope(6, WMode::Rank1, 3)}) {
      NewtonTrace tr;
      tr.status = NewtonStatus::Solved;
      tr.terminal = *inst.meta.optimal;
      tr.terminal_jacobian = jacobian(inst, inst.meta.optimal->y);
      runs.emplace_back(inst, tr);
    }
    int sc = 0;
    for (const auto& [inst, tr] : runs) {
      const auto cc = jacobian_degeneracy_crosscheck(inst, tr);
      if (!cc.report || !cc.report->strict_complementarity.value_or(false)) continue;
      ++sc;
      CAPTURE(inst.meta.family);
      CAPTURE(cc.reason);
      CHECK(cc.outcome == CrossCheck::Agree);
    }
    CHECK(sc >= 15);
  }
}

TEST_SUITE("chain_independence") {
  TEST_CASE("multi-step chains have independent certificates") {
    std::vector<BapInstance> insts{fixture_paper_sd2()};
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      insts.push_back(gen_planted_noslater(16, 12, 2, 2, 4, seed));
      insts.push_back(gen_planted_noslater(16, 12, 2, 3, 4, seed));
      insts.push_back(gen_planted_noslater(24, 16, 3, 3, 4, seed));
    }
    int multi = 0;
    for (const auto& inst : insts) {
      const auto res = fr_loop(inst);
      if (res.chain.sd_hat() < 2) continue;
      ++multi;
      CAPTURE(inst.meta.params.dump());
      CHECK(check_independence(res.chain));
      Matrix l(res.chain.original_m, res.chain.sd_hat());
      for (int k = 0; k < res.chain.sd_hat(); ++k) l.col(k) = res.chain.steps[static_cast<std::size_t>(k)].lam_orig;
      CHECK(oracle::qr_rank(l, 1e-8) == res.chain.sd_hat());
    }
    CHECK(multi >= 9);
  }
}
