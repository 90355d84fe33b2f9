#include "ctmc/qmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>
#include <tuple>

namespace ctmc {

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os << (passed ? "pass" : "fail") << ", max residual " << max_residual
     << ", " << issues.size() << " issue(s)";
  if (window_tail_mass > 0.0)
    os << ", window tail mass " << window_tail_mass;
  return os.str();
}

ValidationReport validate(const RateMatrix& m, const Window& window,
                          double tol) {
  if (!(tol > 0.0)) throw ConfigError("validation tolerance must be > 0");
  ValidationReport rep;
  rep.row_residuals.assign(window.size(), 0.0);
  bool ok = true;
  for (State i = 0; i <= window.max_state; ++i) {
    SparseRow r;
    try {
      r = m.row(i);
    } catch (const UndefinedRowError&) {
      rep.issues.push_back({i, "undefined row"});
      ok = false;
      continue;
    }
    double sum = 0.0;
    for (const auto& e : r.entries) {
      if (e.to == i) {
        rep.issues.push_back({i, "diagonal entry listed as off-diagonal"});
        ok = false;
      }
      if (e.rate < 0.0) {
        rep.issues.push_back({i, "negative rate to state " +
                                     std::to_string(e.to)});
        ok = false;
      }
      sum += e.rate;
      if (e.to > window.max_state) rep.window_tail_mass += e.rate;
    }
    if (!std::isfinite(r.exit_rate) || !std::isfinite(sum)) {
      rep.issues.push_back({i, "non-finite rate"});
      ok = false;
      continue;
    }
    double resid = std::abs(r.exit_rate - sum);
    rep.row_residuals[i] = resid;
    rep.max_residual = std::max(rep.max_residual, resid);
    if (resid > tol * std::max(1.0, r.exit_rate)) ok = false;
  }
  rep.passed = ok;
  return rep;
}

namespace {

SparseRow merge_rows(const SparseRow& a, const SparseRow& b) {
  SparseRow out;
  out.exit_rate = a.exit_rate + b.exit_rate;
  out.entries = a.entries;
  out.entries.insert(out.entries.end(), b.entries.begin(), b.entries.end());
  std::sort(out.entries.begin(), out.entries.end(),
            [](const RateEntry& x, const RateEntry& y) { return x.to < y.to; });
  // combine duplicates in place
  std::size_t w = 0;
  for (std::size_t r = 0; r < out.entries.size(); ++r) {
    if (w > 0 && out.entries[w - 1].to == out.entries[r].to)
      out.entries[w - 1].rate += out.entries[r].rate;
    else
      out.entries[w++] = out.entries[r];
  }
  out.entries.resize(w);
  return out;
}

std::optional<State> min_bound(std::optional<State> a, std::optional<State> b) {
  if (a && b) return std::min(*a, *b);
  return a ? a : b;
}

}  // namespace

RateMatrix perturb(const RateMatrix& r, const BoundedPerturbation& a) {
  auto rm = std::make_shared<RateMatrix>(r);
  auto am = std::make_shared<RateMatrix>(a.inner());
  auto fn = [rm, am](State i) { return merge_rows(rm->row(i), am->row(i)); };
  return RateMatrix(std::move(fn),
                    min_bound(r.support_bound(), a.inner().support_bound()),
                    r.name().empty() ? "perturbed" : r.name() + "+A");
}

double ShiftedMatrices::qprime_at(State i, State j) const {
  for (const auto& e : qprime[i])
    if (e.to == j) return e.rate;
  return 0.0;
}

double ShiftedMatrices::aprime_at(State i, State j) const {
  for (const auto& e : aprime[i])
    if (e.to == j) return e.rate;
  return 0.0;
}

ShiftedMatrices shifted(const RateMatrix& q, const BoundedPerturbation& a,
                        const RateMatrix& r, const Window& window) {
  (void)r;
  ShiftedMatrices out;
  out.max_state = window.max_state;
  out.gamma = a.gamma();
  out.qprime.resize(window.size());
  out.aprime.resize(window.size());
  for (State i = 0; i <= window.max_state; ++i) {
    const SparseRow qrow = q.row(i);
    const SparseRow arow = a.inner().row(i);
    const double ai = arow.exit_rate;
    if (ai > out.gamma * (1.0 + 1e-12) + 1e-300)
      throw ModelError("perturbation exit rate " + std::to_string(ai) +
                       " at state " + std::to_string(i) +
                       " exceeds the declared bound gamma");
    auto& qp = out.qprime[i];
    qp.push_back({i, out.gamma - ai});
    for (const auto& e : qrow.entries)
      if (e.to <= window.max_state) qp.push_back({e.to, e.rate});
    auto& ap = out.aprime[i];
    ap.push_back({i, out.gamma - ai});  // a_ii + gamma = gamma - a_i
    for (const auto& e : arow.entries)
      if (e.to <= window.max_state) ap.push_back({e.to, e.rate});
    auto by_col = [](const RateEntry& x, const RateEntry& y) {
      return x.to < y.to;
    };
    std::sort(qp.begin(), qp.end(), by_col);
    std::sort(ap.begin(), ap.end(), by_col);
  }
  return out;
}

// ---- model zoo -----------------------------------------------------------

namespace {

void check_offspring(const std::vector<double>& b, std::size_t diag,
                     const char* what) {
  double off = 0.0;
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (j == diag) continue;
    if (b[j] < 0.0)
      throw ModelError(std::string(what) + " array entry " +
                       std::to_string(j) + " must be >= 0");
    off += b[j];
  }
  double diag_val = diag < b.size() ? b[diag] : 0.0;
  if (std::abs(off + diag_val) > 1e-12 * std::max(1.0, off))
    throw ModelError(std::string(what) +
                     " array must balance: off-diagonal sum " +
                     std::to_string(off) + " vs diagonal " +
                     std::to_string(diag_val));
}

}  // namespace

RateMatrix branching_qmatrix(const std::vector<double>& b) {
  check_offspring(b, 1, "offspring");
  auto rates = std::make_shared<std::vector<double>>(b);
  auto fn = [rates](State i) {
    SparseRow row;
    if (i == 0) return row;  // absorbing
    const auto& b = *rates;
    for (std::size_t m = 0; m < b.size(); ++m) {
      long j = static_cast<long>(i) + static_cast<long>(m) - 1;
      if (j < 0) continue;
      if (m == 1) {
        row.exit_rate = -static_cast<double>(i) * b[m];
        continue;
      }
      if (b[m] == 0.0) continue;
      row.entries.push_back(
          {static_cast<State>(j), static_cast<double>(i) * b[m]});
    }
    return row;
  };
  return RateMatrix(std::move(fn), std::nullopt, "branching");
}

BoundedPerturbation immigration_resurrection(const std::vector<double>& c,
                                             const std::vector<double>& h) {
  check_offspring(c, 0, "kick");
  check_offspring(h, 0, "resurrection");
  const double gamma =
      std::max(h.empty() ? 0.0 : -h[0], c.empty() ? 0.0 : -c[0]);
  auto cs = std::make_shared<std::vector<double>>(c);
  auto hs = std::make_shared<std::vector<double>>(h);
  auto fn = [cs, hs](State i) {
    SparseRow row;
    const auto& arr = (i == 0) ? *hs : *cs;
    if (arr.empty()) return row;
    row.exit_rate = -arr[0];
    for (std::size_t d = 1; d < arr.size(); ++d) {
      if (arr[d] == 0.0) continue;
      row.entries.push_back({static_cast<State>(i + d), arr[d]});
    }
    return row;
  };
  return BoundedPerturbation(
      RateMatrix(std::move(fn), std::nullopt, "immigration_resurrection"),
      gamma);
}

RateMatrix power_birth(double coeff, int power, State offset) {
  if (coeff < 0.0) throw ModelError("birth rate coefficient must be >= 0");
  auto fn = [coeff, power, offset](State i) {
    SparseRow row;
    double q = coeff * std::pow(static_cast<double>(i) + offset,
                                static_cast<double>(power));
    if (q > 0.0) {
      row.exit_rate = q;
      row.entries.push_back({i + 1, q});
    }
    return row;
  };
  return RateMatrix(std::move(fn), std::nullopt, "power_birth");
}

RateMatrix triplet_qmatrix(
    const std::vector<std::tuple<State, State, double>>& entries,
    std::optional<State> states) {
  State max_mentioned = 0;
  for (const auto& [i, j, rate] : entries) {
    if (i == j) throw ModelError("triplet lists a diagonal entry");
    if (rate < 0.0) throw ModelError("triplet rate must be >= 0");
    max_mentioned = std::max({max_mentioned, i, j});
  }
  State bound = states ? *states - 1 : max_mentioned;
  if (states && max_mentioned > bound)
    throw ModelError("triplet mentions a state beyond the declared count");
  auto rows = std::make_shared<std::vector<SparseRow>>(bound + 1);
  for (const auto& [i, j, rate] : entries) {
    (*rows)[i].entries.push_back({j, rate});
    (*rows)[i].exit_rate += rate;
  }
  for (auto& r : *rows)
    std::sort(r.entries.begin(), r.entries.end(),
              [](const RateEntry& x, const RateEntry& y) {
                return x.to < y.to;
              });
  auto fn = [rows](State i) { return (*rows)[i]; };
  return RateMatrix(std::move(fn), bound, "triplets");
}

RateMatrix random_conservative(State max_state, std::uint64_t seed,
                               double rate_scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  std::vector<std::tuple<State, State, double>> entries;
  const State n = max_state + 1;
  for (State i = 0; i <= max_state; ++i) {
    std::uniform_int_distribution<State> pick(0, n - 1);
    const int degree = 2 + static_cast<int>(rng() % 3);
    std::vector<bool> used(n, false);
    used[i] = true;
    for (int d = 0; d < degree; ++d) {
      State j = pick(rng);
      if (used[j]) continue;
      used[j] = true;
      entries.emplace_back(i, j, rate_scale * unif(rng));
    }
  }
  return triplet_qmatrix(entries, n);
}

BoundedPerturbation bounded_from_matrix(RateMatrix a) {
  if (!a.support_bound())
    throw ModelError(
        "cannot scan an unbounded-support matrix for its rate bound; "
        "supply gamma explicitly");
  double gamma = 0.0;
  for (State i = 0; i <= *a.support_bound(); ++i)
    gamma = std::max(gamma, a.row(i).exit_rate);
  return BoundedPerturbation(std::move(a), gamma);
}

}  // namespace ctmc
