#include "spectra/spectra.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "spectra/core/errors.hpp"
#include "spectra/core/instances.hpp"
#include "spectra/core/pipeline.hpp"

struct spx_instance {
  spectra::BapInstance inst;
};

struct spx_result {
  spx_solve_status status = SPX_NOT_A_SOLVE;
  int iterations = 0;
  double relres = std::numeric_limits<double>::quiet_NaN();
  double cond = std::numeric_limits<double>::quiet_NaN();
  spectra::Vector primal;
  long order = 0;
  std::vector<std::string> traces;
  std::string report;
  std::string table_md;
  std::string table_csv;
  std::vector<std::pair<std::string, std::string>> artifacts;
};

namespace {

thread_local std::string g_last_error;

spx_status map_code(spectra::ErrorCode c) {
  using spectra::ErrorCode;
  switch (c) {
    case ErrorCode::InvalidArgument: return SPX_ERR_INVALID_ARGUMENT;
    case ErrorCode::DimensionMismatch: return SPX_ERR_DIMENSION_MISMATCH;
    case ErrorCode::NotSymmetric: return SPX_ERR_NOT_SYMMETRIC;
    case ErrorCode::NotOrthonormal: return SPX_ERR_NOT_ORTHONORMAL;
    case ErrorCode::LinearAlgebra: return SPX_ERR_LINEAR_ALGEBRA;
    case ErrorCode::InfeasibleManifold: return SPX_ERR_INFEASIBLE_MANIFOLD;
    case ErrorCode::FaceIsZero: return SPX_ERR_FACE_IS_ZERO;
    case ErrorCode::NoStall: return SPX_ERR_NO_STALL;
    case ErrorCode::InfeasiblePoint: return SPX_ERR_INFEASIBLE_POINT;
    case ErrorCode::IndefiniteDual: return SPX_ERR_INDEFINITE_DUAL;
    case ErrorCode::SolverFailure: return SPX_ERR_SOLVER_FAILURE;
    case ErrorCode::Inconclusive: return SPX_ERR_INCONCLUSIVE;
    case ErrorCode::Io: return SPX_ERR_IO;
    case ErrorCode::Parse: return SPX_ERR_PARSE;
  }
  return SPX_ERR_INTERNAL;
}

template <class Fn>
spx_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return SPX_OK;
  } catch (const spectra::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SPX_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SPX_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SPX_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) spectra::fail(spectra::ErrorCode::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size());
  p[s.size()] = '\0';
  return p;
}

spectra::NewtonOptions to_core(const spx_newton_options* o) {
  spectra::NewtonOptions n;
  if (o) {
    n.eps_final = o->eps_final;
    n.cond_budget = o->cond_budget;
    n.max_iter = o->max_iter;
    n.reg_kappa = o->reg_kappa;
    n.zero_tol = o->zero_tol;
    n.stop_on_cond = o->stop_on_cond != 0;
  }
  n.validate();
  return n;
}

spx_solve_status to_c(spectra::NewtonStatus s) {
  switch (s) {
    case spectra::NewtonStatus::Solved: return SPX_SOLVED;
    case spectra::NewtonStatus::SuspectedDegenerate: return SPX_SUSPECTED_DEGENERATE;
    case spectra::NewtonStatus::IterLimit: return SPX_ITER_LIMIT;
  }
  return SPX_NOT_A_SOLVE;
}

void fill_from_trace(spx_result& r, const spectra::NewtonTrace& t) {
  r.status = to_c(t.status);
  r.iterations = t.iterations();
  r.relres = t.relres();
  r.cond = t.cond();
}

spectra::Json trace_summary(const spectra::NewtonTrace& t, const spectra::NewtonOptions& o,
                            const spectra::BapInstance& inst) {
  spectra::Json j;
  j["version"] = spectra::library_version();
  spectra::PipelineOptions po;
  po.newton = o;
  j["config"] = po.to_json()["newton"];
  j["instance"] = {{"family", inst.meta.family}, {"seed", inst.meta.seed}, {"n", inst.n()}, {"m", inst.m()},
                   {"params", inst.meta.params}};
  j["status"] = spectra::to_string(t.status);
  j["iterations"] = t.iterations();
  j["relres"] = t.relres();
  j["cond"] = std::isfinite(t.cond()) ? spectra::Json(t.cond()) : spectra::Json(nullptr);
  const auto kkt = spectra::kkt_residuals(inst, t.terminal);
  j["kkt"] = {{"pf", kkt.pf}, {"df_lin", kkt.df_lin}, {"df_cone_X", kkt.df_cone_X}, {"df_cone_Z", kkt.df_cone_Z},
              {"cs", kkt.cs}};
  j["primal_value"] = spectra::primal_objective(inst, t.terminal.X);
  j["X"] = spectra::vector_json(t.terminal.X.svec());
  j["y"] = spectra::vector_json(t.terminal.y);
  j["note"] = "constraints are preprocessed to a surjective map before solving";
  return j;
}

}  // namespace

extern "C" {

const char* spx_version(void) { return spectra::library_version(); }

const char* spx_last_error(void) { return g_last_error.c_str(); }

const char* spx_status_string(spx_status s) {
  switch (s) {
    case SPX_OK: return "ok";
    case SPX_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SPX_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case SPX_ERR_NOT_SYMMETRIC: return "not symmetric";
    case SPX_ERR_NOT_ORTHONORMAL: return "not orthonormal";
    case SPX_ERR_LINEAR_ALGEBRA: return "linear algebra failure";
    case SPX_ERR_INFEASIBLE_MANIFOLD: return "infeasible linear manifold";
    case SPX_ERR_FACE_IS_ZERO: return "face is {0}";
    case SPX_ERR_NO_STALL: return "no stall to analyze";
    case SPX_ERR_INFEASIBLE_POINT: return "infeasible point";
    case SPX_ERR_INDEFINITE_DUAL: return "indefinite dual slack";
    case SPX_ERR_SOLVER_FAILURE: return "solver failure";
    case SPX_ERR_INCONCLUSIVE: return "inconclusive";
    case SPX_ERR_IO: return "i/o error";
    case SPX_ERR_PARSE: return "parse error";
    case SPX_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void spx_string_free(char* s) { std::free(s); }

spx_status spx_instance_load(const char* path, spx_instance** out) {
  return guarded([&] {
    require(path && out, "spx_instance_load: null argument");
    *out = new spx_instance{spectra::load_instance(path)};
  });
}

spx_status spx_instance_from_json(const char* text, spx_instance** out) {
  return guarded([&] {
    require(text && out, "spx_instance_from_json: null argument");
    *out = new spx_instance{spectra::instance_from_string(text)};
  });
}

spx_status spx_instance_generate(const char* family, long n, long m, uint64_t seed, int sd, int iips, int support,
                                 const char* w_mode, spx_instance** out) {
  return guarded([&] {
    require(family && out, "spx_instance_generate: null argument");
    spectra::GeneratorSpec s;
    s.family = spectra::parse_family(family);
    s.n = n;
    if (m >= 0) s.m = m;
    s.seed = seed;
    s.sd = sd;
    s.iips = iips;
    if (support > 0)
      s.support = support;
    else if (m > 0)
      s.support = static_cast<int>(std::min<long>(s.support, m));
    s.w_mode = w_mode ? spectra::parse_wmode(w_mode) : spectra::WMode::Random;
    *out = new spx_instance{spectra::generate(s)};
  });
}

spx_status spx_instance_to_json(const spx_instance* inst, char** out) {
  return guarded([&] {
    require(inst && out, "spx_instance_to_json: null argument");
    *out = dup_string(spectra::instance_to_string(inst->inst));
  });
}

spx_status spx_instance_save(const spx_instance* inst, const char* path) {
  return guarded([&] {
    require(inst && path, "spx_instance_save: null argument");
    spectra::save_instance(inst->inst, path);
  });
}

spx_status spx_instance_dims(const spx_instance* inst, long* n, long* m) {
  return guarded([&] {
    require(inst, "spx_instance_dims: null instance");
    if (n) *n = static_cast<long>(inst->inst.n());
    if (m) *m = static_cast<long>(inst->inst.m());
  });
}

void spx_instance_free(spx_instance* inst) { delete inst; }

void spx_newton_options_default(spx_newton_options* opts) {
  if (!opts) return;
  const spectra::NewtonOptions d;
  opts->eps_final = d.eps_final;
  opts->cond_budget = d.cond_budget;
  opts->max_iter = d.max_iter;
  opts->reg_kappa = d.reg_kappa;
  opts->zero_tol = d.zero_tol;
  opts->stop_on_cond = d.stop_on_cond ? 1 : 0;
}

spx_status spx_solve(const spx_instance* inst, const spx_newton_options* opts, spx_result** out) {
  return guarded([&] {
    require(inst && out, "spx_solve: null argument");
    const auto o = to_core(opts);
    const spectra::BapInstance red = spectra::make_surjective(inst->inst);
    const spectra::NewtonTrace t = spectra::newton_solve(red, o);
    auto r = std::make_unique<spx_result>();
    fill_from_trace(*r, t);
    r->primal = t.terminal.X.svec();
    r->order = static_cast<long>(red.n());
    r->traces.push_back(t.to_csv());
    r->report = spectra::dump_json(trace_summary(t, o, red));
    *out = r.release();
  });
}

spx_status spx_fr_loop(const spx_instance* inst, spx_result** out) {
  return guarded([&] {
    require(inst && out, "spx_fr_loop: null argument");
    const spectra::BapInstance red = spectra::make_surjective(inst->inst);
    const auto res = spectra::fr_loop(red);
    auto r = std::make_unique<spx_result>();
    spectra::Json j = res.chain.report();
    j["version"] = spectra::library_version();
    j["instance"] = {{"family", red.meta.family}, {"seed", red.meta.seed}, {"n", red.n()}, {"m", red.m()}};
    j["reduced"] = {{"n", res.reduced.n()}, {"m", res.reduced.m()}};
    if (res.chain.sd_hat() > 0) j["independent"] = spectra::check_independence(res.chain);
    j["note"] = "sd_hat counts steps taken by greedy reduction, an upper bound on the singularity degree";
    r->report = spectra::dump_json(j);
    r->order = static_cast<long>(red.n());
    r->artifacts.emplace_back("reduced_instance.json", spectra::instance_to_string(res.reduced));
    *out = r.release();
  });
}

spx_status spx_pipeline_run(const spx_instance* inst, const spx_newton_options* opts, int fr_first,
                            spx_result** out) {
  return guarded([&] {
    require(inst && out, "spx_pipeline_run: null argument");
    spectra::PipelineOptions po;
    po.newton = to_core(opts);
    po.fr_first = fr_first != 0;
    const auto res = spectra::run_pipeline(inst->inst, po);
    auto r = std::make_unique<spx_result>();
    fill_from_trace(*r, res.rounds.back().trace);
    r->iterations = 0;
    for (const auto& rd : res.rounds) r->iterations += rd.trace.iterations();
    r->primal = res.lifted.X.svec();
    r->order = static_cast<long>(inst->inst.n());
    for (const auto& rd : res.rounds) r->traces.push_back(rd.trace.to_csv());
    r->report = spectra::dump_json(res.report(inst->inst, po));
    *out = r.release();
  });
}

spx_status spx_diagnose(const spx_instance* inst, const spx_newton_options* opts, const double* point_svec,
                        size_t len, spx_result** out) {
  return guarded([&] {
    require(inst && out, "spx_diagnose: null argument");
    std::optional<spectra::SymMatrix> x;
    if (point_svec) {
      spectra::Vector v = Eigen::Map<const spectra::Vector>(point_svec, static_cast<Eigen::Index>(len));
      if (v.size() != spectra::tri(inst->inst.n()))
        spectra::fail(spectra::ErrorCode::DimensionMismatch, "spx_diagnose: point has wrong svec length");
      x = spectra::SymMatrix::from_svec(v);
    }
    const auto d = spectra::diagnose(inst->inst, x, to_core(opts));
    auto r = std::make_unique<spx_result>();
    if (!d.trace.records.empty()) {
      fill_from_trace(*r, d.trace);
      r->primal = d.trace.terminal.X.svec();
      r->traces.push_back(d.trace.to_csv());
    }
    r->order = static_cast<long>(inst->inst.n());
    r->report = spectra::dump_json(d.to_json());
    *out = r.release();
  });
}

spx_status spx_experiment_run(const char* suite, const long* sizes, size_t n_sizes, int count, uint64_t seed,
                              unsigned threads, const spx_newton_options* opts, long vontope_n, int timing,
                              spx_result** out) {
  return guarded([&] {
    require(suite && out, "spx_experiment_run: null argument");
    spectra::ExperimentOptions eo;
    eo.suite = spectra::parse_suite(suite);
    for (size_t i = 0; sizes && i < n_sizes; ++i) eo.sizes.push_back(sizes[i]);
    eo.count = count;
    eo.seed = seed;
    eo.threads = threads;
    eo.newton = to_core(opts);
    if (vontope_n > 0) eo.vontope_n = vontope_n;
    eo.timing = timing != 0;
    auto res = spectra::run_experiment(eo);
    auto r = std::make_unique<spx_result>();
    r->report = spectra::dump_json(res.summary);
    r->table_md = std::move(res.markdown);
    r->table_csv = std::move(res.csv);
    for (auto& [name, content] : res.traces) r->traces.push_back(content);
    r->artifacts = std::move(res.traces);
    *out = r.release();
  });
}

spx_solve_status spx_result_status(const spx_result* r) { return r ? r->status : SPX_NOT_A_SOLVE; }
int spx_result_iterations(const spx_result* r) { return r ? r->iterations : 0; }
double spx_result_relres(const spx_result* r) { return r ? r->relres : std::numeric_limits<double>::quiet_NaN(); }
double spx_result_cond(const spx_result* r) { return r ? r->cond : std::numeric_limits<double>::quiet_NaN(); }
long spx_result_order(const spx_result* r) { return r ? r->order : 0; }

spx_status spx_result_primal(const spx_result* r, double* out, size_t len) {
  return guarded([&] {
    require(r && out, "spx_result_primal: null argument");
    if (r->primal.size() == 0) spectra::fail(spectra::ErrorCode::InvalidArgument, "result carries no primal point");
    if (len != static_cast<size_t>(r->primal.size()))
      spectra::fail(spectra::ErrorCode::DimensionMismatch, "spx_result_primal: buffer length must be t(n)");
    std::memcpy(out, r->primal.data(), len * sizeof(double));
  });
}

size_t spx_result_trace_count(const spx_result* r) { return r ? r->traces.size() : 0; }

spx_status spx_result_trace_csv(const spx_result* r, size_t index, char** out) {
  return guarded([&] {
    require(r && out, "spx_result_trace_csv: null argument");
    require(index < r->traces.size(), "spx_result_trace_csv: index out of range");
    *out = dup_string(r->traces[index]);
  });
}

spx_status spx_result_report_json(const spx_result* r, char** out) {
  return guarded([&] {
    require(r && out, "spx_result_report_json: null argument");
    *out = dup_string(r->report);
  });
}

spx_status spx_result_table(const spx_result* r, int kind, char** out) {
  return guarded([&] {
    require(r && out, "spx_result_table: null argument");
    require(kind == 0 || kind == 1, "spx_result_table: kind must be 0 or 1");
    const std::string& s = kind == 0 ? r->table_md : r->table_csv;
    if (s.empty()) spectra::fail(spectra::ErrorCode::InvalidArgument, "result carries no table");
    *out = dup_string(s);
  });
}

size_t spx_result_artifact_count(const spx_result* r) { return r ? r->artifacts.size() : 0; }

spx_status spx_result_artifact(const spx_result* r, size_t index, char** name, char** content) {
  return guarded([&] {
    require(r && name && content, "spx_result_artifact: null argument");
    require(index < r->artifacts.size(), "spx_result_artifact: index out of range");
    *name = dup_string(r->artifacts[index].first);
    *content = dup_string(r->artifacts[index].second);
  });
}

void spx_result_free(spx_result* r) { delete r; }

}  // extern "C"
