#include "spectra/core/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "spectra/core/errors.hpp"
#include "spectra/core/instances.hpp"
#include "spectra/core/rng.hpp"

namespace spectra {

namespace {

Json newton_options_json(const NewtonOptions& o) {
  Json j;
  j["eps_final"] = o.eps_final;
  j["cond_budget"] = o.cond_budget;
  j["max_iter"] = o.max_iter;
  j["reg_kappa"] = o.reg_kappa;
  j["zero_tol"] = o.zero_tol;
  j["stop_on_cond"] = o.stop_on_cond;
  j["max_step"] = o.max_step;
  return j;
}

Json kkt_json(const KktResiduals& r) {
  Json j;
  j["pf"] = r.pf;
  j["df_lin"] = r.df_lin;
  j["df_cone_X"] = r.df_cone_X;
  j["df_cone_Z"] = r.df_cone_Z;
  j["cs"] = r.cs;
  return j;
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double dual_residual(const KktResiduals& r) { return std::max({r.df_lin, r.df_cone_X, r.df_cone_Z}); }

}  // namespace

Json PipelineOptions::to_json() const {
  Json j;
  j["newton"] = newton_options_json(newton);
  Json a;
  a["restarts"] = aux.restarts;
  a["max_iter"] = aux.max_iter;
  a["tol"] = aux.tol;
  a["z_floor"] = aux.z_floor;
  a["seed"] = aux.seed;
  j["aux"] = a;
  j["fr_first"] = fr_first;
  return j;
}

namespace {

// Adding t_k * lam_k (certificates in original coordinates) to -y leaves
// the linear dual residual and <X, Z> unchanged. Search t >= 0 for a PSD Z;
// it exists when the original dual is attained.
void repair_dual(const BapInstance& original, const FaceChain& chain, KktTriple& t) {
  if (chain.steps.empty() || lambda_min(t.Z) >= 0.0) return;
  std::vector<SymMatrix> dirs;
  for (const auto& st : chain.steps) {
    if (st.lam_orig.size() != original.m()) return;
    dirs.push_back(original.map.adjoint(st.lam_orig));
  }
  const std::size_t k = dirs.size();
  std::vector<double> coef(k, 0.0);
  const double zscale = std::max(1.0, t.Z.norm());
  auto value = [&](std::size_t j, double tj) {
    SymMatrix z = t.Z;
    for (std::size_t i = 0; i < k; ++i) z = z + (i == j ? tj : coef[i]) * dirs[i];
    return lambda_min(z);
  };
  double best = lambda_min(t.Z);
  for (int sweep = 0; sweep < 30 && best < -1e-15 * zscale; ++sweep) {
    const double before = best;
    for (std::size_t j = 0; j < k; ++j) {
      const double dn = dirs[j].norm();
      if (!(dn > 0)) continue;
      // Walk t -> lambda_min (concave) upward; stop at the first t that makes
      // Z PSD, or golden-section the bracketed maximum.
      const double tol = -1e-15 * zscale;
      double pp = coef[j], prev = coef[j], fprev = value(j, prev), step = 1e-3 * zscale / dn;
      double pick = prev, pv = fprev;
      for (int e = 0; e < 80; ++e) {
        const double trial = prev + step;
        const double ft = value(j, trial);
        if (ft >= tol) {
          double lo = prev, hi = trial;
          for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (value(j, mid) >= tol)
              hi = mid;
            else
              lo = mid;
          }
          pick = hi;
          pv = value(j, hi);
          break;
        }
        if (ft <= fprev) {
          const double g = 0.5 * (std::sqrt(5.0) - 1.0);
          double lo = pp, hi = trial;
          for (int it = 0; it < 100 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
            const double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
            if (value(j, c) >= value(j, d))
              hi = d;
            else
              lo = c;
          }
          pick = 0.5 * (lo + hi);
          pv = value(j, pick);
          break;
        }
        pp = prev;
        prev = trial;
        fprev = ft;
        step *= 2.0;
      }
      if (pv > best) {
        coef[j] = pick;
        best = pv;
      }
    }
    if (best <= before) break;
  }
  for (std::size_t i = 0; i < k; ++i) {
    t.y -= coef[i] * chain.steps[i].lam_orig;
    t.Z = t.Z + coef[i] * dirs[i];
  }
}

}  // namespace

KktTriple lift_solution(const BapInstance& original, const FaceChain& chain, const std::vector<Index>& kept_rows,
                        const KktTriple& reduced) {
  if (reduced.X.order() != chain.V.dim()) fail(ErrorCode::DimensionMismatch, "lift: reduced order differs from face");
  if (static_cast<Index>(kept_rows.size()) != reduced.y.size())
    fail(ErrorCode::DimensionMismatch, "lift: row map differs from reduced y");
  KktTriple out;
  out.X = reduced.X.lift(chain.V.V());
  out.y = Vector::Zero(original.m());
  for (std::size_t k = 0; k < kept_rows.size(); ++k) out.y(kept_rows[k]) = reduced.y(static_cast<Index>(k));
  out.Z = out.X - original.W - original.map.adjoint(out.y);
  repair_dual(original, chain, out);
  return out;
}

PipelineResult run_pipeline(const BapInstance& inst, const PipelineOptions& opts) {
  inst.validate();
  auto surj = preprocess_surjective(inst.map, inst.b);
  PipelineResult res;
  res.preprocess_removed = static_cast<Index>(surj.removed.size());
  BapInstance cur{surj.map, surj.b, inst.W, inst.meta};
  res.chain = initial_chain(inst.n(), cur.m());

  auto aux_for = [&](int step) {
    AuxOptions a = opts.aux;
    a.seed = mix64(opts.aux.seed ^ mix64(inst.meta.seed) ^ static_cast<std::uint64_t>(step));
    return a;
  };
  auto reduce = [&](const AuxCertificate& c) {
    FrStep st = fr_step(cur, c, opts.aux.zero_tol);
    extend_chain(res.chain, st);
    cur = std::move(st.reduced);
  };

  if (opts.fr_first) {
    for (int step = 0; step <= inst.n(); ++step) {
      auto c = solve_aux_gauss_newton(cur, std::nullopt, aux_for(step));
      if (!c) break;
      reduce(*c);
    }
  }
  for (int round = 0; round <= inst.n() + 1; ++round) {
    PipelineRound pr;
    pr.order = cur.n();
    pr.m = cur.m();
    pr.trace = newton_solve(cur, opts.newton);
    const bool solved = pr.trace.status == NewtonStatus::Solved;
    if (!solved) {
      pr.stall = certificate_from_stall(pr.trace, cur);
      pr.cert = solve_aux_gauss_newton(cur, pr.stall, aux_for(res.chain.sd_hat()));
    }
    const bool resume = !solved && !pr.cert && pr.trace.status == NewtonStatus::SuspectedDegenerate;
    res.rounds.push_back(pr);
    if (resume) {
      // No certificate: the stall is not a facial-reduction signal. Continue
      // from the stalled iterate with only the residual and iteration tests.
      PipelineRound cont;
      cont.order = cur.n();
      cont.m = cur.m();
      cont.resumed = true;
      NewtonOptions o = opts.newton;
      o.stop_on_cond = false;
      o.y0 = pr.trace.terminal.y;
      o.max_iter = std::max(0, opts.newton.max_iter - pr.trace.iterations());
      cont.trace = newton_solve(cur, o);
      res.rounds.push_back(std::move(cont));
      break;
    }
    if (solved || !pr.cert) break;
    reduce(*pr.cert);
  }
  res.chain.slater_after = res.rounds.back().trace.status == NewtonStatus::Solved || !res.rounds.back().cert;

  // Back to the caller's row numbering.
  std::vector<Index> kept;
  for (Index k : res.chain.kept) kept.push_back(surj.kept[static_cast<std::size_t>(k)]);
  res.chain.kept = kept;
  res.chain.original_m = inst.m();
  for (auto& st : res.chain.steps) {
    Vector full = Vector::Zero(inst.m());
    for (std::size_t k = 0; k < surj.kept.size(); ++k) full(surj.kept[k]) = st.lam_orig(static_cast<Index>(k));
    st.lam_orig = full;
  }

  const NewtonTrace& last = res.rounds.back().trace;
  res.final_status = last.status;
  res.reduced = cur;
  res.lifted = lift_solution(inst, res.chain, kept, last.terminal);
  res.primal_value = primal_objective(inst, res.lifted.X);
  res.kkt_original = kkt_residuals(inst, res.lifted);
  res.kkt_reduced = kkt_residuals(cur, last.terminal);
  if (cur.m() > 0) res.crosscheck = jacobian_degeneracy_crosscheck(cur, last);
  return res;
}

Json PipelineResult::report(const BapInstance& original, const PipelineOptions& opts) const {
  Json j;
  j["version"] = library_version();
  j["config"] = opts.to_json();
  j["instance"] = {{"family", original.meta.family}, {"seed", original.meta.seed}, {"n", original.n()},
                   {"m", original.m()}, {"params", original.meta.params}};
  j["preprocess_removed"] = preprocess_removed;
  Json rs = Json::array();
  for (const auto& r : rounds) {
    Json o;
    o["order"] = r.order;
    o["m"] = r.m;
    o["status"] = to_string(r.trace.status);
    o["iterations"] = r.trace.iterations();
    o["relres"] = r.trace.relres();
    o["cond"] = finite_or_null(r.trace.cond());
    if (r.resumed) o["resumed"] = true;
    if (r.stall) {
      o["stall_eigenvalue"] = r.stall->eigenvalue;
      o["suspect_rows"] = r.stall->suspect;
    }
    if (r.cert) {
      o["certificate"] = vector_json(r.cert->lam);
      o["certificate_residual"] = r.cert->residual;
    }
    rs.push_back(o);
  }
  j["rounds"] = rs;
  j["fr"] = chain.report();
  j["final_status"] = to_string(final_status);
  j["primal_value"] = primal_value;
  j["kkt_original"] = kkt_json(kkt_original);
  j["kkt_reduced"] = kkt_json(kkt_reduced);
  if (crosscheck) j["degeneracy"] = crosscheck->to_json();
  j["X"] = vector_json(lifted.X.svec());
  j["y"] = vector_json(lifted.y);
  j["note"] = "constraints are preprocessed to a surjective map before solving";
  return j;
}

Json DiagnoseResult::to_json() const {
  Json j;
  j["version"] = library_version();
  if (!trace.records.empty()) {
    j["status"] = to_string(trace.status);
    j["iterations"] = trace.iterations();
    j["relres"] = trace.relres();
  }
  j["kkt"] = kkt_json(kkt);
  if (degeneracy) {
    j["degeneracy"] = degeneracy->to_json();
    j["degeneracy_point"] = degeneracy_point;
    if (degeneracy->strict_complementarity)
      j["strict_complementarity"] = *degeneracy->strict_complementarity;
    else
      j["strict_complementarity"] = nullptr;
  }
  j["jacobian_spectrum"] = vector_json(spectrum.eigenvalues);
  j["cond_J"] = finite_or_null(spectrum.cond);
  if (crosscheck) j["crosscheck"] = crosscheck->to_json();
  if (!message.empty()) j["message"] = message;
  return j;
}

DiagnoseResult diagnose(const BapInstance& input, const std::optional<SymMatrix>& X, const NewtonOptions& opts) {
  const BapInstance inst = make_surjective(input);
  DiagnoseResult d;
  if (X) {
    if (X->order() != inst.n()) fail(ErrorCode::DimensionMismatch, "diagnose: X has the wrong order");
    d.kkt.pf = (inst.map.apply(*X) - inst.b).norm() / (1.0 + inst.b.norm());
    d.kkt.df_cone_X = std::max(0.0, -lambda_min(*X));
    try {
      d.degeneracy = is_nondegenerate(inst, *X);
      d.degeneracy_point = "given point";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InfeasiblePoint) throw;
      d.message = e.what();
    }
    return d;
  }
  d.trace = newton_solve(inst, opts);
  d.kkt = kkt_residuals(inst, d.trace.terminal);
  d.spectrum = jacobian_spectrum(d.trace.terminal_jacobian);
  auto cc = jacobian_degeneracy_crosscheck(inst, d.trace);
  if (cc.report) d.degeneracy = cc.report;
  if (!cc.reason.empty()) d.message = cc.reason;
  if (!cc.report && inst.meta.optimal && inst.meta.optimal->X.order() == inst.n()) {
    const auto& opt = *inst.meta.optimal;
    d.degeneracy = is_nondegenerate(inst, opt.X, opt.Z);
    d.degeneracy_point = "recorded optimum";
  }
  d.crosscheck = std::move(cc);
  return d;
}

const char* to_string(Suite s) noexcept {
  switch (s) {
    case Suite::SlaterTable: return "slater_table";
    case Suite::NoSlaterTable: return "noslater_table";
    case Suite::SingularityDemo: return "singularity_demo";
    case Suite::EllipVontopeTable: return "ellip_vontope_table";
  }
  return "unknown";
}

Suite parse_suite(const std::string& s) {
  for (Suite v : {Suite::SlaterTable, Suite::NoSlaterTable, Suite::SingularityDemo, Suite::EllipVontopeTable})
    if (s == to_string(v)) return v;
  fail(ErrorCode::InvalidArgument, "unknown experiment suite '" + s + "'");
}

Json ExperimentOptions::to_json() const {
  Json j;
  j["suite"] = to_string(suite);
  j["sizes"] = sizes;
  j["count"] = count;
  j["seed"] = seed;
  j["newton"] = newton_options_json(newton);
  j["vontope_n"] = vontope_n;
  j["timing"] = timing;
  return j;
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string sci(double v) { return std::isfinite(v) ? fmt("%.2e", v) : "inf"; }

ExperimentRow row_from_trace(const BapInstance& inst, const NewtonTrace& tr, std::string label, double seconds) {
  ExperimentRow r;
  r.label = std::move(label);
  r.n = inst.n();
  r.m = inst.m();
  r.seed = inst.meta.seed;
  r.status = to_string(tr.status);
  r.iterations = tr.iterations();
  r.relres = tr.relres();
  const auto kkt = kkt_residuals(inst, tr.terminal);
  r.pf = kkt.pf;
  r.df = dual_residual(kkt);
  r.cs = kkt.cs;
  r.cond = tr.cond();
  r.time = seconds;
  for (const auto& rec : tr.records) {
    if (r.first_1e8 < 0 && rec.relres <= 1e-8) r.first_1e8 = rec.k;
    if (r.first_1e13 < 0 && rec.relres <= 1e-13) r.first_1e13 = rec.k;
  }
  return r;
}

constexpr double kNoTime = std::numeric_limits<double>::quiet_NaN();

std::string timefmt(const char* f, double t) { return std::isnan(t) ? "n/a" : fmt(f, t); }

ExperimentRow timed_solve(const BapInstance& inst, const NewtonOptions& o, std::string label, bool timing) {
  const auto t0 = std::chrono::steady_clock::now();
  NewtonTrace tr = newton_solve(inst, o);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row_from_trace(inst, tr, std::move(label), timing ? secs : kNoTime);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  if (std::any_of(v.begin(), v.end(), [](double x) { return std::isnan(x); }))
    return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

struct Cell {
  std::string label;
  std::vector<const ExperimentRow*> rows;
};

std::vector<Cell> group(const std::vector<ExperimentRow>& rows) {
  std::vector<Cell> cells;
  for (const auto& r : rows) {
    if (cells.empty() || cells.back().label != r.label) cells.push_back({r.label, {}});
    cells.back().rows.push_back(&r);
  }
  return cells;
}

std::string rows_csv(const std::vector<ExperimentRow>& rows) {
  std::ostringstream os;
  os << "label,n,m,seed,status,iterations,relres,pf,df,cs,cond,time,first_1e8,first_1e13,extra\n";
  for (const auto& r : rows) {
    os << r.label << ',' << r.n << ',' << r.m << ',' << r.seed << ',' << r.status << ',' << r.iterations << ','
       << fmt("%.16e", r.relres) << ',' << fmt("%.16e", r.pf) << ',' << fmt("%.16e", r.df) << ','
       << fmt("%.16e", r.cs) << ',' << (std::isfinite(r.cond) ? fmt("%.16e", r.cond) : "inf") << ','
       << timefmt("%.6f", r.time) << ',' << r.first_1e8 << ',' << r.first_1e13 << ',' << r.extra << '\n';
  }
  return os.str();
}

Json rows_json(const std::vector<ExperimentRow>& rows) {
  Json a = Json::array();
  for (const auto& r : rows) {
    Json o;
    o["label"] = r.label;
    o["n"] = r.n;
    o["m"] = r.m;
    o["seed"] = r.seed;
    o["status"] = r.status;
    o["iterations"] = r.iterations;
    o["relres"] = r.relres;
    o["pf"] = r.pf;
    o["df"] = r.df;
    o["cs"] = r.cs;
    o["cond"] = finite_or_null(r.cond);
    o["first_1e8"] = r.first_1e8;
    o["first_1e13"] = r.first_1e13;
    if (!r.extra.empty()) o["extra"] = r.extra;
    a.push_back(o);
  }
  return a;
}

// Convergence tables: mean KKT measures per cell and the share of instances
// reaching 1e-8 within 1000 iterations and 1e-13 within max_iter.
std::string convergence_markdown(const std::vector<ExperimentRow>& rows, Json& agg) {
  std::ostringstream os;
  os << "| n | pf | df | cs | k | time (s, median) | cond | reach 1e-8 (<=1000 it) | reach 1e-13 |\n";
  os << "|---|---|---|---|---|---|---|---|---|\n";
  agg = Json::array();
  for (const auto& c : group(rows)) {
    double pf = 0, df = 0, cs = 0, k = 0, lc = 0;
    int h8 = 0, h13 = 0;
    std::vector<double> times;
    for (const auto* r : c.rows) {
      pf += r->pf;
      df += r->df;
      cs += r->cs;
      k += r->iterations;
      lc += std::log10(std::isfinite(r->cond) ? std::max(r->cond, 1.0) : 1e300);
      times.push_back(r->time);
      if (r->first_1e8 >= 0 && r->first_1e8 <= 1000) ++h8;
      if (r->first_1e13 >= 0) ++h13;
    }
    const double cnt = static_cast<double>(c.rows.size());
    const double p8 = 100.0 * h8 / cnt, p13 = 100.0 * h13 / cnt;
    os << "| " << c.label << " | " << sci(pf / cnt) << " | " << sci(df / cnt) << " | " << sci(cs / cnt) << " | "
       << fmt("%.1f", k / cnt) << " | " << timefmt("%.3f", median(times)) << " | " << sci(std::pow(10.0, lc / cnt))
       << " | " << fmt("%.0f%%", p8) << " | " << fmt("%.0f%%", p13) << " |\n";
    agg.push_back({{"cell", c.label},
                   {"count", c.rows.size()},
                   {"pf", pf / cnt},
                   {"df", df / cnt},
                   {"cs", cs / cnt},
                   {"k", k / cnt},
                   {"time_median", finite_or_null(median(times))},
                   {"cond_geomean", std::pow(10.0, lc / cnt)},
                   {"pct_1e8", p8},
                   {"pct_1e13", p13}});
  }
  return os.str();
}

std::vector<Index> sizes_or(const ExperimentOptions& o, std::vector<Index> dflt) {
  return o.sizes.empty() ? dflt : o.sizes;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentOptions& opts) {
  opts.newton.validate();
  if (opts.count < 1) fail(ErrorCode::InvalidArgument, "experiment: count must be positive");
  ExperimentResult res;
  Json agg;
  const auto count = static_cast<std::size_t>(opts.count);

  switch (opts.suite) {
    case Suite::SlaterTable:
    case Suite::NoSlaterTable: {
      const bool slater = opts.suite == Suite::SlaterTable;
      const auto ns = sizes_or(opts, slater ? std::vector<Index>{10, 20, 50, 100} : std::vector<Index>{10, 20});
      NewtonOptions o = opts.newton;
      o.stop_on_cond = false;
      res.rows.resize(ns.size() * count);
      parallel_for(res.rows.size(), opts.threads, [&](std::size_t idx) {
        const Index n = ns[idx / count];
        const std::uint64_t seed = opts.seed + idx % count;
        const BapInstance inst = slater ? gen_random_slater(n, n, seed) : gen_planted_noslater(n, n, 1, 1, 5, seed);
        res.rows[idx] = timed_solve(inst, o, std::to_string(n), opts.timing);
      });
      res.markdown = convergence_markdown(res.rows, agg);
      break;
    }
    case Suite::SingularityDemo: {
      const BapInstance inst = gen_planted_noslater(15, 7, 1, 1, 5, opts.seed);
      PipelineOptions po;
      po.newton = opts.newton;
      const auto t0 = std::chrono::steady_clock::now();
      const PipelineResult pr = run_pipeline(inst, po);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      BapInstance cur = make_surjective(inst);
      for (std::size_t r = 0; r < pr.rounds.size(); ++r) {
        const auto& tr = pr.rounds[r].trace;
        ExperimentRow row = row_from_trace(cur, tr, r == 0 ? "before FR" : "after FR " + std::to_string(r),
                                           !opts.timing ? kNoTime : tr.records.empty() ? secs : tr.records.back().wallclock);
        if (pr.rounds[r].cert) {
          std::ostringstream ex;
          ex << "certificate support " << pr.rounds[r].stall->suspect.size() << " rows";
          row.extra = ex.str();
          FrStep st = fr_step(cur, *pr.rounds[r].cert);
          row.extra += "; rows removed " + std::to_string(st.rows_removed);
          cur = std::move(st.reduced);
        }
        res.rows.push_back(row);
        res.traces.emplace_back("trace_round" + std::to_string(r) + ".csv", tr.to_csv());
      }
      std::ostringstream os;
      os << "| stage | n | m | status | k | relres | cond | pf | df | cs |\n|---|---|---|---|---|---|---|---|---|---|\n";
      for (const auto& r : res.rows)
        os << "| " << r.label << " | " << r.n << " | " << r.m << " | " << r.status << " | " << r.iterations << " | "
           << fmt("%.4e", r.relres) << " | " << (std::isfinite(r.cond) ? fmt("%.4e", r.cond) : "inf") << " | "
           << sci(r.pf) << " | " << sci(r.df) << " | " << sci(r.cs) << " |\n";
      res.markdown = os.str();
      agg = pr.report(inst, po);
      break;
    }
    case Suite::EllipVontopeTable: {
      struct Job {
        std::string label;
        GeneratorSpec spec;
      };
      std::vector<Job> jobs;
      for (std::size_t i = 0; i < count; ++i) {
        GeneratorSpec e{Family::Elliptope, 10, std::nullopt, opts.seed + i, 1, 1, 5, WMode::Random};
        jobs.push_back({"elliptope n=10", e});
      }
      for (std::size_t i = 0; i < count; ++i) {
        GeneratorSpec v{Family::VontopePost, opts.vontope_n, std::nullopt, opts.seed + i, 1, 1, 5, WMode::Rank1};
        jobs.push_back({"vontope post-FR rank-1 W n=" + std::to_string(opts.vontope_n), v});
      }
      for (std::size_t i = 0; i < count; ++i) {
        GeneratorSpec v{Family::VontopePost, opts.vontope_n, std::nullopt, opts.seed + i, 1, 1, 5, WMode::Random};
        jobs.push_back({"vontope post-FR random W n=" + std::to_string(opts.vontope_n), v});
      }
      res.rows.resize(jobs.size());
      parallel_for(jobs.size(), opts.threads, [&](std::size_t idx) {
        const BapInstance inst = make_surjective(generate(jobs[idx].spec));
        const auto t0 = std::chrono::steady_clock::now();
        NewtonTrace tr = newton_solve(inst, opts.newton);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ExperimentRow row = row_from_trace(inst, tr, jobs[idx].label, opts.timing ? secs : kNoTime);
        auto cc = jacobian_degeneracy_crosscheck(inst, tr);
        if (cc.report) {
          row.extra = to_string(cc.report->verdict);
        } else if (inst.meta.optimal) {
          // Terminal point infeasible: classify the generator's recorded optimum.
          const auto& opt = *inst.meta.optimal;
          row.extra = std::string(to_string(is_nondegenerate(inst, opt.X, opt.Z).verdict)) + " (at X*)";
        } else {
          row.extra = "n/a";
        }
        row.extra += std::string(" / ") + to_string(cc.outcome);
        res.rows[idx] = row;
      });
      std::ostringstream os;
      os << "| problem | k (mean) | pf | df | cs | cond (geo. mean) | time (s, median) | verdict / crosscheck |\n";
      os << "|---|---|---|---|---|---|---|---|\n";
      agg = Json::array();
      for (const auto& c : group(res.rows)) {
        double k = 0, pf = 0, df = 0, cs = 0, lc = 0;
        std::vector<double> times;
        std::map<std::string, int> verdicts;
        for (const auto* r : c.rows) {
          k += r->iterations;
          pf = std::max(pf, r->pf);
          df = std::max(df, r->df);
          cs = std::max(cs, r->cs);
          lc += std::log10(std::isfinite(r->cond) ? std::max(r->cond, 1.0) : 1e300);
          times.push_back(r->time);
          ++verdicts[r->extra];
        }
        const double cnt = static_cast<double>(c.rows.size());
        std::string vs;
        for (const auto& [v, nv] : verdicts) vs += (vs.empty() ? "" : ", ") + v + " x" + std::to_string(nv);
        os << "| " << c.label << " | " << fmt("%.1f", k / cnt) << " | " << sci(pf) << " | " << sci(df) << " | "
           << sci(cs) << " | " << sci(std::pow(10.0, lc / cnt)) << " | " << timefmt("%.4f", median(times)) << " | " << vs
           << " |\n";
        agg.push_back({{"cell", c.label},
                       {"k_mean", k / cnt},
                       {"pf_max", pf},
                       {"df_max", df},
                       {"cs_max", cs},
                       {"cond_geomean", std::pow(10.0, lc / cnt)},
                       {"time_median", finite_or_null(median(times))},
                       {"verdicts", vs}});
      }
      res.markdown = os.str();
      break;
    }
  }

  std::ostringstream prov;
  prov << "\nsuite " << to_string(opts.suite) << ", seed " << opts.seed << ", count " << opts.count
       << ", spectra " << library_version() << "\n";
  res.markdown += prov.str();
  res.csv = rows_csv(res.rows);
  res.summary["version"] = library_version();
  res.summary["config"] = opts.to_json();
  res.summary["aggregate"] = agg;
  res.summary["rows"] = rows_json(res.rows);
  return res;
}

}  // namespace spectra
