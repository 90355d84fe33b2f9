#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ctmc/qmatrix.hpp"
#include "support/fixtures.hpp"

using namespace ctmc;

TEST_CASE("validate accepts an exact conservative 2-state matrix") {
  auto m = fixtures::two_state();
  auto rep = validate(m, Window(1), 1e-12);
  CHECK(rep.passed);
  CHECK(rep.max_residual == 0.0);
}

TEST_CASE("validate flags a broken row sum with the right residual") {
  // q_0 = 2 while the off-diagonal row sums to 1
  RateMatrix bad(
      [](State i) {
        SparseRow r;
        if (i == 0) {
          r.exit_rate = 2.0;
          r.entries.push_back({1, 1.0});
        } else {
          r.exit_rate = 1.0;
          r.entries.push_back({0, 1.0});
        }
        return r;
      },
      1u);
  auto rep = validate(bad, Window(1), 1e-12);
  CHECK_FALSE(rep.passed);
  CHECK(rep.row_residuals[0] == doctest::Approx(1.0));
  CHECK(rep.row_residuals[1] == doctest::Approx(0.0));
}

TEST_CASE("validate accepts the branching generator by direct summation") {
  auto r = branching_qmatrix({1.0, -2.0, 1.0});
  auto rep = validate(r, Window(50), 1e-12);
  CHECK(rep.passed);
  // independent check: every row sums to i * sum_m b_m = 0
  for (State i = 0; i <= 50; ++i) {
    SparseRow row = r.row(i);
    double sum = 0.0;
    for (const auto& e : row.entries) sum += e.rate;
    CHECK(sum == doctest::Approx(row.exit_rate).epsilon(1e-14));
  }
}

TEST_CASE("validate reports undefined rows instead of crashing") {
  auto m = fixtures::two_state();
  auto rep = validate(m, Window(50));
  CHECK_FALSE(rep.passed);
  bool found = false;
  for (const auto& is : rep.issues)
    if (is.what == "undefined row") found = true;
  CHECK(found);
}

TEST_CASE("validate flags negative rates") {
  RateMatrix bad(
      [](State) {
        SparseRow r;
        r.exit_rate = -1.0;
        r.entries.push_back({1, -1.0});
        return r;
      },
      1u);
  auto rep = validate(bad, Window(1));
  CHECK_FALSE(rep.passed);
}

TEST_CASE("window rejects the reflect policy and empty windows") {
  CHECK_THROWS_AS(Window(1, WindowPolicy::reflect), ConfigError);
  CHECK_THROWS_AS(Window(0), ConfigError);
}

TEST_CASE("perturb by zero is the identity") {
  auto r = fixtures::two_state();
  auto q = perturb(r, fixtures::zero_perturbation(2));
  for (State i = 0; i < 2; ++i) {
    CHECK(q.exit_rate(i) == r.exit_rate(i));
    auto qrow = q.row(i), rrow = r.row(i);
    REQUIRE(qrow.entries.size() == rrow.entries.size());
    for (std::size_t k = 0; k < qrow.entries.size(); ++k)
      CHECK(qrow.entries[k].rate == rrow.entries[k].rate);
  }
}

TEST_CASE("perturb adds elementwise on the 2-state example") {
  auto q = perturb(fixtures::two_state(), fixtures::two_state_kick());
  CHECK(q.exit_rate(0) == doctest::Approx(3.0));  // q_00 = -3
  CHECK(q.row(0).entries.size() == 1);
  CHECK(q.row(0).entries[0].rate == doctest::Approx(3.0));
  CHECK(q.exit_rate(1) == doctest::Approx(1.0));
  CHECK(q.row(1).entries[0].rate == doctest::Approx(1.0));
}

TEST_CASE("perturb matches the closed form of the branching model zoo") {
  const std::vector<double> b{0.3, -0.5, 0.2};
  const std::vector<double> c{-0.5, 0.3, 0.2};
  const std::vector<double> h{-0.4, 0.4};
  auto q = perturb(branching_qmatrix(b), immigration_resurrection(c, h));
  // independently coded closed form q_ij = i*b_{j-i+1} + a_ij
  auto expected = [&](State i, State j) {
    double v = 0.0;
    if (i >= 1 && j + 1 >= i) {
      std::size_t m = j - i + 1;
      if (m < b.size() && m != 1) v += i * b[m];
    }
    if (i == 0) {
      if (j < h.size() && j != 0) v += h[j];
    } else if (j >= i) {
      std::size_t d = j - i;
      if (d < c.size() && d != 0) v += c[d];
    }
    return v;
  };
  for (State i = 0; i <= 40; ++i) {
    auto row = q.row(i);
    for (State j = 0; j <= 45; ++j) {
      double got = 0.0;
      for (const auto& e : row.entries)
        if (e.to == j) got += e.rate;
      CHECK(got == doctest::Approx(expected(i, j)).epsilon(1e-13));
    }
  }
}

TEST_CASE("conservativeness is additive under perturbation") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto r = random_conservative(15, seed);
    auto a = bounded_from_matrix(random_conservative(15, seed + 100, 0.5));
    CHECK(validate(r, Window(15)).passed);
    CHECK(validate(a.inner(), Window(15)).passed);
    CHECK(validate(perturb(r, a), Window(15)).passed);
  }
}

TEST_CASE("shifted matrices collapse when the perturbation vanishes") {
  auto r = fixtures::two_state();
  auto a = fixtures::zero_perturbation(2);
  auto q = perturb(r, a);
  auto sm = shifted(q, a, r, Window(1));
  CHECK(sm.gamma == 0.0);
  for (State i = 0; i < 2; ++i) {
    CHECK(sm.qprime_at(i, i) == 0.0);
    CHECK(sm.aprime_at(i, i) == 0.0);
    CHECK(sm.aprime_at(i, 1 - i) == 0.0);
  }
}

TEST_CASE("shifted matrices on the 2-state example") {
  auto r = fixtures::two_state();
  auto a = fixtures::two_state_kick();
  auto q = perturb(r, a);
  auto sm = shifted(q, a, r, Window(1));
  CHECK(sm.gamma == doctest::Approx(2.0));
  CHECK(sm.qprime_at(0, 0) == doctest::Approx(0.0));  // gamma - a_0 = 0
  CHECK(sm.qprime_at(0, 1) == doctest::Approx(3.0));
  CHECK(sm.aprime_at(0, 0) == doctest::Approx(0.0));
  CHECK(sm.aprime_at(0, 1) == doctest::Approx(2.0));
  CHECK(sm.qprime_at(1, 1) == doctest::Approx(2.0));  // gamma - 0
}

TEST_CASE("shifted consistency identity holds entrywise on random models") {
  auto r = random_conservative(19, 42);
  auto a = bounded_from_matrix(random_conservative(19, 43, 0.7));
  auto q = perturb(r, a);
  Window w(19);
  auto sm = shifted(q, a, r, w);
  for (State i = 0; i <= 19; ++i) {
    auto rrow = r.row(i);
    for (State k = 0; k <= 19; ++k) {
      double rik = 0.0;
      for (const auto& e : rrow.entries)
        if (e.to == k) rik = e.rate;
      const double lhs = sm.qprime_at(i, k);
      const double rhs = sm.aprime_at(i, k) + (i == k ? 0.0 : rik);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
      CHECK(lhs >= 0.0);
    }
  }
}

TEST_CASE("shifted rejects an understated gamma") {
  auto inner = triplet_qmatrix({{0, 1, 2.0}}, 2u);
  BoundedPerturbation lying(inner, 1.0);  // true a_0 = 2
  auto r = fixtures::two_state();
  auto q = perturb(r, lying);
  CHECK_THROWS_AS(shifted(q, lying, r, Window(1)), ModelError);
}

TEST_CASE("branching generator zoo") {
  SUBCASE("all-zero offspring array gives absorbing states") {
    auto r = branching_qmatrix({0.0, 0.0});
    for (State i = 0; i <= 10; ++i) {
      CHECK(r.exit_rate(i) == 0.0);
      CHECK(r.row(i).entries.empty());
    }
  }
  SUBCASE("textbook values") {
    auto r = branching_qmatrix({1.0, -2.0, 1.0});
    CHECK(r.row(1).entries[0].to == 0);
    CHECK(r.row(1).entries[0].rate == doctest::Approx(1.0));
    CHECK(r.exit_rate(1) == doctest::Approx(2.0));  // r_11 = -2
    auto row2 = r.row(2);
    double r23 = 0.0;
    for (const auto& e : row2.entries)
      if (e.to == 3) r23 = e.rate;
    CHECK(r23 == doctest::Approx(2.0));
    CHECK(r.row(0).entries.empty());  // state 0 absorbing
  }
  SUBCASE("hand evaluation at i = 5") {
    auto r = branching_qmatrix({1.0, -3.0, 2.0});
    CHECK(r.exit_rate(5) == doctest::Approx(15.0));
    auto row = r.row(5);
    double r54 = 0.0, r56 = 0.0;
    for (const auto& e : row.entries) {
      if (e.to == 4) r54 = e.rate;
      if (e.to == 6) r56 = e.rate;
    }
    CHECK(r54 == doctest::Approx(5.0));
    CHECK(r56 == doctest::Approx(10.0));
  }
  SUBCASE("sign and sum violations are rejected") {
    CHECK_THROWS_AS(branching_qmatrix({-1.0, 1.0}), ModelError);
    CHECK_THROWS_AS(branching_qmatrix({1.0, -3.0, 1.0}), ModelError);
  }
}

TEST_CASE("immigration and resurrection zoo") {
  SUBCASE("all-zero arrays give the zero perturbation") {
    auto a = immigration_resurrection({}, {});
    CHECK(a.gamma() == 0.0);
    for (State i = 0; i <= 5; ++i) CHECK(a.inner().row(i).entries.empty());
  }
  SUBCASE("resurrection row only") {
    auto a = immigration_resurrection({}, {-1.0, 1.0});
    CHECK(a.inner().exit_rate(0) == doctest::Approx(1.0));  // a_00 = -1
    CHECK(a.inner().row(0).entries[0].to == 1);
    CHECK(a.inner().row(0).entries[0].rate == doctest::Approx(1.0));
    CHECK(a.inner().row(1).entries.empty());
    CHECK(a.gamma() == doctest::Approx(1.0));
  }
  SUBCASE("upward kick two steps at row 3") {
    auto a = immigration_resurrection({-2.0, 0.0, 2.0}, {});
    CHECK(a.inner().exit_rate(3) == doctest::Approx(2.0));
    auto row = a.inner().row(3);
    REQUIRE(row.entries.size() == 1);
    CHECK(row.entries[0].to == 5);
    CHECK(row.entries[0].rate == doctest::Approx(2.0));
  }
  SUBCASE("gamma equals the worst exit rate on any window") {
    auto a = immigration_resurrection({-0.5, 0.3, 0.2}, {-0.4, 0.4});
    double worst = 0.0;
    for (State i = 0; i <= 200; ++i)
      worst = std::max(worst, a.inner().exit_rate(i));
    CHECK(a.gamma() == doctest::Approx(worst));
  }
  SUBCASE("violations are rejected") {
    CHECK_THROWS_AS(immigration_resurrection({-1.0, 0.5}, {}), ModelError);
    CHECK_THROWS_AS(immigration_resurrection({}, {-1.0, -1.0}), ModelError);
  }
}

TEST_CASE("bounded_from_matrix refuses unbounded support") {
  CHECK_THROWS_AS(bounded_from_matrix(power_birth(1.0, 1, 1)), ModelError);
}
