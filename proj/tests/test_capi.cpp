// Exercises the shared library through the C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "spectra/spectra.h"

namespace {

std::string take(char* p) {
  std::string s = p ? p : "";
  spx_string_free(p);
  return s;
}

spx_instance* gen(const char* fam, long n, long m = -1, uint64_t seed = 1) {
  spx_instance* h = nullptr;
  REQUIRE(spx_instance_generate(fam, n, m, seed, 1, 1, 0, "random", &h) == SPX_OK);
  return h;
}

const char* kZeroFace = R"({"n":2,"m":3,"b":[0,0,0],"W":[1,0,1],"A":[[1,0,0],[0,1,0],[0,0,1]]})";

}  // namespace

TEST_CASE("version and status strings") {
  CHECK(std::string(spx_version()).size() > 0);
  CHECK(std::string(spx_status_string(SPX_ERR_FACE_IS_ZERO)).size() > 0);
  CHECK(std::string(spx_status_string(SPX_OK)).size() > 0);
}

TEST_CASE("solve an elliptope through the C API") {
  spx_instance* inst = gen("elliptope", 6);
  long n = 0, m = 0;
  REQUIRE(spx_instance_dims(inst, &n, &m) == SPX_OK);
  CHECK(n == 6);
  CHECK(m == 6);
  spx_newton_options o;
  spx_newton_options_default(&o);
  CHECK(o.eps_final == 1e-13);
  CHECK(o.cond_budget == 16);
  spx_result* r = nullptr;
  REQUIRE(spx_solve(inst, &o, &r) == SPX_OK);
  CHECK(spx_result_status(r) == SPX_SOLVED);
  CHECK(spx_result_relres(r) <= 1e-13);
  CHECK(spx_result_iterations(r) <= 15);
  std::vector<double> x(21);
  REQUIRE(spx_result_primal(r, x.data(), x.size()) == SPX_OK);
  // diagonal entries sit at offsets 0, 6, 11, 15, 18, 20
  for (int k : {0, 6, 11, 15, 18, 20}) CHECK(std::abs(x[k] - 1.0) <= 1e-12);
  CHECK(spx_result_primal(r, x.data(), 3) == SPX_ERR_DIMENSION_MISMATCH);
  CHECK(spx_result_trace_count(r) == 1);
  char* csv = nullptr;
  REQUIRE(spx_result_trace_csv(r, 0, &csv) == SPX_OK);
  CHECK(take(csv).rfind("iter,relres,cond", 0) == 0);
  char* rep = nullptr;
  REQUIRE(spx_result_report_json(r, &rep) == SPX_OK);
  CHECK(take(rep).find("\"status\"") != std::string::npos);
  spx_result_free(r);
  spx_instance_free(inst);
}

TEST_CASE("errors map to status codes") {
  spx_instance* h = nullptr;
  CHECK(spx_instance_generate("no-such-family", 4, -1, 0, 1, 1, 0, "random", &h) == SPX_ERR_INVALID_ARGUMENT);
  CHECK(h == nullptr);
  CHECK(std::string(spx_last_error()).find("no-such-family") != std::string::npos);
  CHECK(spx_instance_from_json("{\"n\": 2,", &h) == SPX_ERR_PARSE);
  CHECK(spx_instance_from_json(R"({"n":2,"m":1,"b":[1],"W":[1,0,1],"A":[[1,0]]})", &h) ==
        SPX_ERR_DIMENSION_MISMATCH);
  CHECK(spx_instance_load("/nonexistent/instance.json", &h) == SPX_ERR_IO);
  CHECK(spx_solve(nullptr, nullptr, nullptr) == SPX_ERR_INVALID_ARGUMENT);
  CHECK(spx_result_status(nullptr) == SPX_NOT_A_SOLVE);
  spx_result_free(nullptr);
  spx_instance_free(nullptr);
  spx_string_free(nullptr);
}

TEST_CASE("facial reduction reports a zero face") {
  spx_instance* inst = nullptr;
  REQUIRE(spx_instance_from_json(kZeroFace, &inst) == SPX_OK);
  spx_result* r = nullptr;
  CHECK(spx_fr_loop(inst, &r) == SPX_ERR_FACE_IS_ZERO);
  CHECK(r == nullptr);
  spx_instance_free(inst);
}

TEST_CASE("pipeline on the sd=2 example recovers e1 e1^T") {
  spx_instance* inst = gen("paper-sd2", 3);
  spx_result* r = nullptr;
  REQUIRE(spx_pipeline_run(inst, nullptr, 0, &r) == SPX_OK);
  CHECK(spx_result_status(r) == SPX_SOLVED);
  std::vector<double> x(6);
  REQUIRE(spx_result_primal(r, x.data(), x.size()) == SPX_OK);
  const double want[6] = {1, 0, 0, 0, 0, 0};
  for (int k = 0; k < 6; ++k) CHECK(std::abs(x[k] - want[k]) <= 1e-10);
  CHECK(spx_result_trace_count(r) >= 2);
  spx_result_free(r);
  spx_instance_free(inst);
}

TEST_CASE("instance JSON survives a round trip") {
  spx_instance* a = gen("planted-noslater", 12, 8, 3);
  char* t1 = nullptr;
  REQUIRE(spx_instance_to_json(a, &t1) == SPX_OK);
  const std::string s1 = take(t1);
  spx_instance* b = nullptr;
  REQUIRE(spx_instance_from_json(s1.c_str(), &b) == SPX_OK);
  char* t2 = nullptr;
  REQUIRE(spx_instance_to_json(b, &t2) == SPX_OK);
  CHECK(take(t2) == s1);
  spx_instance_free(a);
  spx_instance_free(b);
}

TEST_CASE("experiment tables are reproducible without timing") {
  const long sizes[] = {5};
  std::string md[2], csv[2];
  for (unsigned threads : {1u, 2u}) {
    spx_result* r = nullptr;
    REQUIRE(spx_experiment_run("slater_table", sizes, 1, 3, 7, threads, nullptr, 0, 0, &r) == SPX_OK);
    char* a = nullptr;
    char* b = nullptr;
    REQUIRE(spx_result_table(r, 0, &a) == SPX_OK);
    REQUIRE(spx_result_table(r, 1, &b) == SPX_OK);
    md[threads - 1] = take(a);
    csv[threads - 1] = take(b);
    spx_result_free(r);
  }
  CHECK(md[0] == md[1]);
  CHECK(csv[0] == csv[1]);
  CHECK(md[0].find("n/a") != std::string::npos);
}
