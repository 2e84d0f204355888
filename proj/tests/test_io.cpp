#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "spectra/core/instances.hpp"
#include "spectra/core/io.hpp"

using namespace spectra;

TEST_CASE("instance JSON round trip is exact") {
  for (const auto& inst : {fixture_paper_sd2(), gen_planted_noslater(12, 8, 1, 2, 4, 3), gen_vontope(3, true, WMode::Rank1, 2)}) {
    const std::string text = instance_to_string(inst);
    const auto back = instance_from_string(text);
    CHECK(back.map.rows() == inst.map.rows());
    CHECK(back.b == inst.b);
    CHECK((back.W.dense() - inst.W.dense()).norm() <= 1e-15 * (1.0 + inst.W.dense().norm()));
    CHECK(back.meta.family == inst.meta.family);
    CHECK(back.meta.certificates.size() == inst.meta.certificates.size());
    CHECK(back.meta.optimal.has_value() == inst.meta.optimal.has_value());
    CHECK(instance_to_string(back) == text);
  }
}

TEST_CASE("dump_json formatting") {
  Json j;
  j["a"] = 1.5;
  j["v"] = {1.0, 2.0};
  j["s"] = "x";
  j["bad"] = std::numeric_limits<double>::infinity();
  const std::string out = dump_json(j);
  CHECK(out.find("\"a\": 1.5000000000000000e+00") != std::string::npos);
  CHECK(out.find("[1.0000000000000000e+00,2.0000000000000000e+00]") != std::string::npos);
  CHECK(out.find("\"bad\": null") != std::string::npos);
  CHECK(out.back() == '\n');
}

TEST_CASE("malformed instance text") {
  CHECK_THROWS_AS(instance_from_string("{"), Error);
  CHECK_THROWS_AS(instance_from_string("{\"n\": 2}"), Error);
  CHECK_THROWS_AS(instance_from_string(R"({"n":2,"m":1,"b":[0],"W":[0,0,0],"A":[[1,0]]})"), Error);
  try {
    instance_from_string("{");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
  }
}

TEST_CASE("save and load") {
  const auto path = (std::filesystem::temp_directory_path() / "spectra_io_test.json").string();
  save_instance(fixture_paper_dual_fail(), path);
  const auto back = load_instance(path);
  CHECK(back.n() == 2);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_instance("/nonexistent/dir/x.json"), Error);
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
}
