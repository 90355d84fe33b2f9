#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "ctmc/model_io.hpp"

using namespace ctmc;

namespace {
LoadedModel parse(const std::string& text) {
  std::istringstream in(text);
  return load_model(in, "test");
}
}  // namespace

TEST_CASE("triplet model files load with the declared state count") {
  auto m = parse(R"({"schema":"ctmc-model/1","kind":"triplets","states":2,
                     "entries":[[0,1,1.0],[1,0,1.0]]})");
  const auto& r = std::get<RateMatrix>(m);
  CHECK(r.support_bound() == State{1});
  CHECK(r.exit_rate(0) == 1.0);
  CHECK_THROWS_AS(r.row(2), UndefinedRowError);
}

TEST_CASE("branching and perturbation kinds load") {
  auto r = parse(R"({"schema":"ctmc-model/1","kind":"branching","b":[1,-2,1]})");
  CHECK(std::get<RateMatrix>(r).exit_rate(3) == doctest::Approx(6.0));

  auto a = parse(R"({"schema":"ctmc-model/1","kind":"immigration_resurrection",
                     "c":[-0.5,0.5],"h":[-1,1]})");
  CHECK(std::get<BoundedPerturbation>(a).gamma() == doctest::Approx(1.0));
}

TEST_CASE("power birth loads and refuses to act as a perturbation") {
  auto m = parse(R"({"schema":"ctmc-model/1","kind":"power_birth",
                     "coeff":1.0,"power":2,"offset":1})");
  CHECK(std::get<RateMatrix>(m).exit_rate(3) == doctest::Approx(16.0));
  CHECK_THROWS_AS(as_perturbation(std::move(m)), ModelError);
}

TEST_CASE("bounded triplets become a perturbation with a scanned gamma") {
  auto m = parse(R"({"schema":"ctmc-model/1","kind":"triplets","states":2,
                     "bounded":true,"entries":[[0,1,2.0]]})");
  auto a = as_perturbation(std::move(m));
  CHECK(a.gamma() == doctest::Approx(2.0));
}

TEST_CASE("loader rejects unknown fields") {
  CHECK_THROWS_WITH_AS(
      parse(R"({"schema":"ctmc-model/1","kind":"branching","b":[0,0],
                "extra":1})"),
      doctest::Contains("unknown field"), ModelError);
}

TEST_CASE("loader rejects missing or wrong schema versions") {
  CHECK_THROWS_AS(parse(R"({"kind":"branching","b":[0,0]})"), ModelError);
  CHECK_THROWS_AS(
      parse(R"({"schema":"ctmc-model/9","kind":"branching","b":[0,0]})"),
      ModelError);
}

TEST_CASE("loader rejects unknown kinds, bad entries and bad JSON") {
  CHECK_THROWS_AS(parse(R"({"schema":"ctmc-model/1","kind":"mystery"})"),
                  ModelError);
  CHECK_THROWS_AS(parse(R"({"schema":"ctmc-model/1","kind":"triplets",
                             "entries":[[0,1]]})"),
                  ModelError);
  CHECK_THROWS_AS(parse("{not json"), ModelError);
  CHECK_THROWS_AS(load_model_file("/nonexistent/path.json"), ModelError);
}
