// spectra command-line driver. Talks to the library only through spectra.h.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spectra/spectra.h"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kError = 2, kFaceZero = 3, kSolverFailure = 4 };

struct Config {
  std::string command;
  std::string instance;
  std::string family;
  long n = 10;
  long m = -1;
  uint64_t seed = 0;
  int sd = 1;
  int iips = 1;
  int support = 0;
  std::string w_mode = "random";
  double eps = 1e-13;
  int cond_budget = 16;
  int max_iter = 2000;
  double reg_kappa = 1e-2;
  bool no_cond_stop = false;
  std::string out;
  std::vector<std::string> emit{"trace", "report", "table"};
  bool fr_first = false;
  std::string point;
  std::string suite = "slater_table";
  std::vector<long> sizes;
  int count = 20;
  unsigned threads = 0;
  long vontope_n = 4;
  bool timing = false;
};

struct CliError {
  int code;
  std::string msg;
};

int exit_for(spx_status s) {
  switch (s) {
    case SPX_ERR_FACE_IS_ZERO: return kFaceZero;
    case SPX_ERR_LINEAR_ALGEBRA:
    case SPX_ERR_SOLVER_FAILURE: return kSolverFailure;
    default: return kError;
  }
}

void check(spx_status s) {
  if (s != SPX_OK) {
    const std::string msg = spx_last_error();
    throw CliError{exit_for(s), msg.empty() ? spx_status_string(s) : msg};
  }
}

std::string take(char* p) {
  std::string s = p ? p : "";
  spx_string_free(p);
  return s;
}

bool emits(const Config& c, const std::string& what) {
  for (const auto& e : c.emit)
    if (e == what) return true;
  return false;
}

spx_newton_options newton_opts(const Config& c) {
  spx_newton_options o;
  spx_newton_options_default(&o);
  o.eps_final = c.eps;
  o.cond_budget = c.cond_budget;
  o.max_iter = c.max_iter;
  o.reg_kappa = c.reg_kappa;
  o.stop_on_cond = c.no_cond_stop ? 0 : 1;
  return o;
}

ojson config_json(const Config& c) {
  ojson j;
  j["command"] = c.command;
  if (!c.instance.empty()) {
    j["instance"] = c.instance;
  } else if (!c.family.empty()) {
    j["gen"] = {{"family", c.family}, {"n", c.n}, {"m", c.m}, {"seed", c.seed}, {"sd", c.sd},
                {"iips", c.iips}, {"support", c.support}, {"w_mode", c.w_mode}};
  }
  j["seed"] = c.seed;
  j["newton"] = {{"eps_final", c.eps}, {"cond_budget", c.cond_budget}, {"max_iter", c.max_iter},
                 {"reg_kappa", c.reg_kappa}, {"stop_on_cond", !c.no_cond_stop}};
  if (c.command == "pipeline") j["fr_first"] = c.fr_first;
  if (c.command == "experiment") {
    j["suite"] = c.suite;
    j["sizes"] = c.sizes;
    j["count"] = c.count;
    j["threads"] = c.threads;
    j["vontope_n"] = c.vontope_n;
    j["timing"] = c.timing;
  }
  j["emit"] = c.emit;
  return j;
}

class Output {
 public:
  explicit Output(const Config& c) : cfg_(c) {
    if (!c.out.empty()) fs::create_directories(c.out);
  }

  void write(const std::string& name, const std::string& content) {
    if (cfg_.out.empty()) return;
    const fs::path p = fs::path(cfg_.out) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw CliError{kError, "cannot write " + p.string()};
    f << content;
    files_.push_back(name);
  }

  void finish() {
    if (cfg_.out.empty()) return;
    ojson m;
    m["version"] = spx_version();
    m["config"] = config_json(cfg_);
    m["files"] = files_;
    std::ofstream f(fs::path(cfg_.out) / "manifest.json", std::ios::binary);
    f << m.dump(2) << "\n";
  }

 private:
  const Config& cfg_;
  std::vector<std::string> files_;
};

struct Instance {
  spx_instance* h = nullptr;
  ~Instance() { spx_instance_free(h); }
};

struct Result {
  spx_result* h = nullptr;
  ~Result() { spx_result_free(h); }
};

void load(const Config& c, Instance& inst) {
  if (!c.instance.empty()) {
    check(spx_instance_load(c.instance.c_str(), &inst.h));
  } else if (!c.family.empty()) {
    check(spx_instance_generate(c.family.c_str(), c.n, c.m, c.seed, c.sd, c.iips, c.support, c.w_mode.c_str(),
                                &inst.h));
  } else {
    throw CliError{kError, "need --instance PATH or --gen FAMILY"};
  }
}

void emit_common(const Config& c, Output& out, const Result& r, const std::string& trace_prefix) {
  if (emits(c, "trace")) {
    const size_t nt = spx_result_trace_count(r.h);
    for (size_t i = 0; i < nt; ++i) {
      char* csv = nullptr;
      check(spx_result_trace_csv(r.h, i, &csv));
      const std::string name = nt == 1 ? trace_prefix + ".csv" : trace_prefix + "_" + std::to_string(i + 1) + ".csv";
      out.write(name, take(csv));
    }
  }
  for (size_t i = 0; i < spx_result_artifact_count(r.h); ++i) {
    char* name = nullptr;
    char* content = nullptr;
    check(spx_result_artifact(r.h, i, &name, &content));
    out.write(take(name), take(content));
  }
}

std::string report(const Result& r) {
  char* s = nullptr;
  check(spx_result_report_json(r.h, &s));
  return take(s);
}

const char* status_name(spx_solve_status s) {
  switch (s) {
    case SPX_SOLVED: return "Solved";
    case SPX_SUSPECTED_DEGENERATE: return "SuspectedDegenerate";
    case SPX_ITER_LIMIT: return "IterLimit";
    default: return "-";
  }
}

void summary_line(const Result& r) {
  std::printf("status=%s iterations=%d relres=%.4e cond=%.4e\n", status_name(spx_result_status(r.h)),
              spx_result_iterations(r.h), spx_result_relres(r.h), spx_result_cond(r.h));
}

int cmd_gen(const Config& c) {
  Instance inst;
  load(c, inst);
  char* s = nullptr;
  check(spx_instance_to_json(inst.h, &s));
  const std::string text = take(s);
  if (c.out.empty()) {
    std::cout << text;
    return kOk;
  }
  Output out(c);
  out.write("instance.json", text);
  out.finish();
  long n = 0, m = 0;
  check(spx_instance_dims(inst.h, &n, &m));
  std::printf("wrote %s/instance.json n=%ld m=%ld\n", c.out.c_str(), n, m);
  return kOk;
}

int cmd_solve(const Config& c) {
  Instance inst;
  load(c, inst);
  const auto o = newton_opts(c);
  Result r;
  check(spx_solve(inst.h, &o, &r.h));
  Output out(c);
  emit_common(c, out, r, "trace");
  if (emits(c, "report")) out.write("report.json", report(r));
  out.finish();
  summary_line(r);
  return kOk;
}

int cmd_fr(const Config& c) {
  Instance inst;
  load(c, inst);
  Result r;
  check(spx_fr_loop(inst.h, &r.h));
  Output out(c);
  emit_common(c, out, r, "trace");
  const std::string rep = report(r);
  if (emits(c, "report")) out.write("fr_report.json", rep);
  out.finish();
  const ojson j = ojson::parse(rep);
  std::printf("fr steps=%s slater_after=%s\n", j.value("sd_hat", ojson()).dump().c_str(),
              j.value("slater_after", ojson()).dump().c_str());
  return kOk;
}

int cmd_pipeline(const Config& c) {
  Instance inst;
  load(c, inst);
  const auto o = newton_opts(c);
  Result r;
  check(spx_pipeline_run(inst.h, &o, c.fr_first ? 1 : 0, &r.h));
  Output out(c);
  emit_common(c, out, r, "round");
  if (emits(c, "report")) out.write("report.json", report(r));
  out.finish();
  std::printf("rounds=%zu ", spx_result_trace_count(r.h));
  summary_line(r);
  return spx_result_status(r.h) == SPX_SOLVED ? kOk : kSolverFailure;
}

std::vector<double> read_point(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw CliError{kError, "cannot read " + path};
  std::stringstream ss;
  ss << f.rdbuf();
  const ojson j = ojson::parse(ss.str());
  const ojson& arr = j.is_object() ? j.at("X") : j;
  return arr.get<std::vector<double>>();
}

int cmd_diagnose(const Config& c) {
  Instance inst;
  load(c, inst);
  const auto o = newton_opts(c);
  std::vector<double> pt;
  if (!c.point.empty()) pt = read_point(c.point);
  Result r;
  check(spx_diagnose(inst.h, &o, pt.empty() ? nullptr : pt.data(), pt.size(), &r.h));
  Output out(c);
  emit_common(c, out, r, "trace");
  const std::string rep = report(r);
  if (emits(c, "report")) out.write("diagnose.json", rep);
  out.finish();
  if (c.out.empty()) std::cout << rep;
  return kOk;
}

int cmd_experiment(const Config& c) {
  const auto o = newton_opts(c);
  Result r;
  check(spx_experiment_run(c.suite.c_str(), c.sizes.empty() ? nullptr : c.sizes.data(), c.sizes.size(), c.count,
                           c.seed, c.threads, &o, c.vontope_n, c.timing ? 1 : 0, &r.h));
  Output out(c);
  char* md = nullptr;
  char* csv = nullptr;
  check(spx_result_table(r.h, 0, &md));
  check(spx_result_table(r.h, 1, &csv));
  const std::string table = take(md);
  if (emits(c, "table")) {
    out.write(c.suite + ".md", table);
    out.write(c.suite + ".csv", take(csv));
  } else {
    spx_string_free(csv);
  }
  if (emits(c, "report")) out.write("summary.json", report(r));
  if (emits(c, "trace")) {
    for (size_t i = 0; i < spx_result_artifact_count(r.h); ++i) {
      char* name = nullptr;
      char* content = nullptr;
      check(spx_result_artifact(r.h, i, &name, &content));
      out.write(take(name), take(content));
    }
  }
  out.finish();
  std::cout << table;
  return kOk;
}

void add_instance_flags(CLI::App* sub, Config& c) {
  auto* inst = sub->add_option("--instance", c.instance, "instance JSON file");
  auto* gen = sub->add_option("--gen", c.family,
                              "generator family: elliptope, vontope-pre, vontope-post, random-slater, "
                              "planted-noslater, dual-unattained, paper-sd2, paper-dual-fail");
  inst->excludes(gen);
  sub->add_option("--n", c.n, "order n")->capture_default_str();
  sub->add_option("--m", c.m, "number of constraints (-1: family default)")->capture_default_str();
  sub->add_option("--sd", c.sd, "planted singularity degree")->capture_default_str();
  sub->add_option("--iips", c.iips, "planted implicit redundancies")->capture_default_str();
  sub->add_option("--support", c.support, "certificate support size (0: auto)")->capture_default_str();
  sub->add_option("--w-mode", c.w_mode, "W mode: random, rank1, feasible")->capture_default_str();
}

void add_newton_flags(CLI::App* sub, Config& c) {
  sub->add_option("--eps", c.eps, "target relative residual")->capture_default_str();
  sub->add_option("--cond-budget", c.cond_budget, "digits budget for s+t")->capture_default_str();
  sub->add_option("--max-iter", c.max_iter, "iteration limit")->capture_default_str();
  sub->add_option("--reg-kappa", c.reg_kappa, "LM regularization factor")->capture_default_str();
  sub->add_flag("--no-cond-stop", c.no_cond_stop, "do not stop on the conditioning test");
}

void add_output_flags(CLI::App* sub, Config& c) {
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--emit", c.emit, "artifacts: trace,report,table")->delimiter(',')->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  Config c;
  if (const char* env = std::getenv("SPECTRA_SEED")) {
    try {
      c.seed = std::stoull(env);
    } catch (const std::exception&) {
      std::fprintf(stderr, "spectra: SPECTRA_SEED is not an unsigned integer\n");
      return kError;
    }
  }

  CLI::App app{"Projection onto spectrahedra with facial reduction"};
  app.set_version_flag("--version", std::string(spx_version()));
  app.require_subcommand(1);
  app.add_option("--seed", c.seed, "random seed (default: $SPECTRA_SEED or 0)");

  auto* solve = app.add_subcommand("solve", "semi-smooth Newton solve");
  auto* fr = app.add_subcommand("fr", "facial reduction loop on the auxiliary system");
  auto* pipe = app.add_subcommand("pipeline", "solve, reduce on stall, solve again");
  auto* diag = app.add_subcommand("diagnose", "degeneracy and Jacobian diagnostics");
  auto* gen = app.add_subcommand("gen", "generate an instance");
  auto* exp = app.add_subcommand("experiment", "run an experiment suite");

  for (auto* sub : {solve, fr, pipe, diag, gen}) add_instance_flags(sub, c);
  for (auto* sub : {solve, pipe, diag, exp}) add_newton_flags(sub, c);
  for (auto* sub : {solve, fr, pipe, diag, gen, exp}) {
    add_output_flags(sub, c);
    sub->add_option("--seed", c.seed, "random seed");
  }
  pipe->add_flag("--fr-first", c.fr_first, "run facial reduction before the first solve");
  diag->add_option("--point", c.point, "JSON file with svec(X), or an object with key X");
  exp->add_option("--suite", c.suite, "slater_table, noslater_table, singularity_demo, ellip_vontope_table")
      ->capture_default_str();
  exp->add_option("--sizes", c.sizes, "matrix orders")->delimiter(',');
  exp->add_option("--count", c.count, "instances per cell")->capture_default_str();
  exp->add_option("--threads", c.threads, "worker threads (0: all cores)")->capture_default_str();
  exp->add_option("--vontope-n", c.vontope_n, "vontope size for ellip_vontope_table")->capture_default_str();
  exp->add_flag("--timing", c.timing, "record wall-clock times (tables are then not reproducible)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) c.command = "solve";
    if (fr->parsed()) c.command = "fr";
    if (pipe->parsed()) c.command = "pipeline";
    if (diag->parsed()) c.command = "diagnose";
    if (gen->parsed()) c.command = "gen";
    if (exp->parsed()) c.command = "experiment";
    if (c.command == "solve") return cmd_solve(c);
    if (c.command == "fr") return cmd_fr(c);
    if (c.command == "pipeline") return cmd_pipeline(c);
    if (c.command == "diagnose") return cmd_diagnose(c);
    if (c.command == "gen") return cmd_gen(c);
    return cmd_experiment(c);
  } catch (const CliError& e) {
    std::fprintf(stderr, "spectra: %s\n", e.msg.c_str());
    return e.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "spectra: %s\n", e.what());
    return kError;
  }
}
