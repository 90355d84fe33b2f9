#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "ctmc/grid.hpp"
#include "ctmc/semigroup.hpp"
#include "ctmc/tf_io.hpp"
#include "support/fixtures.hpp"

using namespace ctmc;

TEST_CASE("time grid construction and validation") {
  TimeGrid g(1.0, 1.0 / 512.0);
  CHECK(g.points == 513);
  CHECK(g.time(512) == doctest::Approx(1.0));
  CHECK_THROWS_AS(TimeGrid(1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(TimeGrid(0.5, 1.0), ConfigError);
  CHECK_THROWS_AS(TimeGrid(1.0, 0.3), ConfigError);  // not commensurate
}

TEST_CASE("transition function memory budget guard") {
  CHECK_THROWS_AS(
      TransitionFunction(5000, TimeGrid(1.0, 1.0 / 512.0), "x", 0.0),
      ConfigError);
}

TEST_CASE("identity slice at t = 0") {
  auto fn = uniformization_solve(fixtures::two_state(), Window(1),
                                 TimeGrid::with_steps(1.0, 8));
  CHECK(fn(0, 0, 0) == 1.0);
  CHECK(fn(0, 0, 1) == 0.0);
  CHECK(fn(0, 1, 1) == 1.0);
}

TEST_CASE("csv round trip is byte identical") {
  auto fn = uniformization_solve(fixtures::two_state(), Window(1),
                                 TimeGrid::with_steps(1.0, 16));
  std::ostringstream first;
  write_csv(fn, first);
  std::istringstream back(first.str());
  TransitionFunction loaded = read_csv(back);
  std::ostringstream second;
  write_csv(loaded, second);
  CHECK(first.str() == second.str());
  CHECK(loaded.solver_id() == fn.solver_id());
  CHECK(loaded.grid() == fn.grid());
  CHECK(loaded.raw() == fn.raw());
}

TEST_CASE("binary round trip is byte identical") {
  auto fn = uniformization_solve(fixtures::random20(), Window(19),
                                 TimeGrid::with_steps(0.5, 32));
  std::ostringstream first(std::ios::binary);
  write_binary(fn, first);
  std::istringstream back(first.str());
  TransitionFunction loaded = read_binary(back);
  std::ostringstream second(std::ios::binary);
  write_binary(loaded, second);
  CHECK(first.str() == second.str());
  CHECK(loaded.raw() == fn.raw());
  CHECK(loaded.tolerance() == fn.tolerance());
}

TEST_CASE("corrupt streams are rejected") {
  std::istringstream empty("");
  CHECK_THROWS_AS(read_csv(empty), ConfigError);
  std::istringstream junk("garbage");
  CHECK_THROWS_AS(read_binary(junk), ConfigError);
}
