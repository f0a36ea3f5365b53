#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "isocal/error.hpp"
#include "isocal/isotonic.hpp"
#include "isocal/mechanisms.hpp"
#include "isocal/ownership.hpp"
#include "isocal/random.hpp"

namespace isocal {

/// Separable per-item utility u(score); an owner's utility is the sum of u
/// over the adjusted scores of its items.
class UtilityModel {
 public:
  enum class Kind { kHinge, kPower, kPiecewiseLinear };

  /// max(x - threshold, 0)
  static UtilityModel hinge(double threshold) {
    UtilityModel u;
    u.kind_ = Kind::kHinge;
    u.threshold_ = threshold;
    return u;
  }

  /// max(x, 0)^p, p >= 1
  static UtilityModel power(double p) {
    if (!(p >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "power utility needs p >= 1");
    UtilityModel u;
    u.kind_ = Kind::kPower;
    u.exponent_ = p;
    return u;
  }

  /// Passes through the origin with slope slopes[0] left of breakpoints[0],
  /// slopes[t] between breakpoints[t-1] and breakpoints[t], and so on.
  static UtilityModel piecewise_linear(std::vector<double> breakpoints,
                                       std::vector<double> slopes) {
    if (slopes.size() != breakpoints.size() + 1) {
      throw Error(ErrorCode::kInvalidArgument, "piecewise utility needs one more slope than breakpoints");
    }
    if (!std::is_sorted(breakpoints.begin(), breakpoints.end())) {
      throw Error(ErrorCode::kInvalidArgument, "piecewise utility breakpoints must be increasing");
    }
    if (slopes.front() < 0.0 || !std::is_sorted(slopes.begin(), slopes.end())) {
      throw Error(ErrorCode::kInvalidArgument,
                  "piecewise utility slopes must be nonnegative and nondecreasing");
    }
    UtilityModel u;
    u.kind_ = Kind::kPiecewiseLinear;
    u.breakpoints_ = std::move(breakpoints);
    u.slopes_ = std::move(slopes);
    return u;
  }

  static UtilityModel linear() { return piecewise_linear({}, {1.0}); }

  Kind kind() const noexcept { return kind_; }
  double threshold() const noexcept { return threshold_; }
  double exponent() const noexcept { return exponent_; }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<double>& slopes() const noexcept { return slopes_; }

  double operator()(double x) const {
    switch (kind_) {
      case Kind::kHinge: return std::max(x - threshold_, 0.0);
      case Kind::kPower: return std::pow(std::max(x, 0.0), exponent_);
      case Kind::kPiecewiseLinear: {
        double v = slopes_[0] * x;
        for (std::size_t t = 0; t < breakpoints_.size(); ++t) {
          v += (slopes_[t + 1] - slopes_[t]) * std::max(x - breakpoints_[t], 0.0);
        }
        return v;
      }
    }
    return 0.0;
  }

  /// Sampled check of monotonicity and convexity on [lo, hi].
  bool is_nondecreasing_convex(double lo, double hi, std::size_t samples = 200) const {
    const double h = (hi - lo) / static_cast<double>(samples);
    for (std::size_t s = 0; s + 2 <= samples; ++s) {
      const double x = lo + h * static_cast<double>(s);
      const double f0 = (*this)(x), f1 = (*this)(x + h), f2 = (*this)(x + 2 * h);
      if (f1 - f0 < -1e-12 || f2 - 2 * f1 + f0 < -1e-12) return false;
    }
    return true;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::kHinge: return "hinge(" + std::to_string(threshold_) + ")";
      case Kind::kPower: return "power(" + std::to_string(exponent_) + ")";
      case Kind::kPiecewiseLinear: return "piecewise_linear";
    }
    return "unknown";
  }

 private:
  Kind kind_ = Kind::kHinge;
  double threshold_ = 0.0;
  double exponent_ = 1.0;
  std::vector<double> breakpoints_;
  std::vector<double> slopes_;
};

/// Review-noise distribution. Exact expectations require kExchangeableBase.
struct NoiseModel {
  enum class Kind { kIidGaussian, kExchangeableBase, kEmpirical };
  Kind kind = Kind::kExchangeableBase;
  double sigma = 0.0;                        // kIidGaussian
  std::vector<double> base;                  // kExchangeableBase
  std::vector<std::vector<double>> samples;  // kEmpirical
  std::uint64_t seed = 0;

  static NoiseModel gaussian(double sigma, std::uint64_t seed) {
    return {Kind::kIidGaussian, sigma, {}, {}, seed};
  }
  static NoiseModel exchangeable(std::vector<double> base, std::uint64_t seed = 0) {
    return {Kind::kExchangeableBase, 0.0, std::move(base), {}, seed};
  }
  static NoiseModel empirical(std::vector<std::vector<double>> samples, std::uint64_t seed) {
    return {Kind::kEmpirical, 0.0, {}, std::move(samples), seed};
  }
  static NoiseModel none(std::size_t n) { return exchangeable(std::vector<double>(n, 0.0)); }

  std::vector<double> draw(std::size_t n, Rng& rng) const {
    std::vector<double> z(n);
    switch (kind) {
      case Kind::kIidGaussian: {
        std::normal_distribution<double> normal(0.0, sigma);
        for (double& v : z) v = normal(rng);
        break;
      }
      case Kind::kExchangeableBase:
        if (base.size() != n) throw Error(ErrorCode::kDimensionMismatch, "noise base has wrong length");
        z = base;
        shuffle(z, rng);
        break;
      case Kind::kEmpirical:
        if (samples.empty()) throw Error(ErrorCode::kInvalidArgument, "empirical noise has no samples");
        z = samples[uniform_index(rng, samples.size())];
        if (z.size() != n) throw Error(ErrorCode::kDimensionMismatch, "noise sample has wrong length");
        break;
    }
    return z;
  }
};

struct ExpectationMode {
  bool exact = true;
  std::size_t draws = 10000;  // Monte Carlo only

  static ExpectationMode exact_mode() { return {true, 0}; }
  static ExpectationMode monte_carlo(std::size_t draws) { return {false, draws}; }
};

inline constexpr std::size_t kExactNoiseCap = 8;

/// Equally likely noisy score vectors y = R + z whose average over a
/// function is its expectation (exact) or an estimate of it (Monte Carlo).
/// Exact mode lists the distinct arrangements of the base vector once each;
/// every arrangement has the same multiplicity, so the plain mean is exact.
inline std::vector<ScoreVector> noise_realizations(const ScoreVector& R, const NoiseModel& noise,
                                                   const ExpectationMode& mode) {
  const std::size_t n = R.size();
  std::vector<ScoreVector> out;
  if (mode.exact) {
    if (noise.kind != NoiseModel::Kind::kExchangeableBase) {
      throw Error(ErrorCode::kPrecondition, "exact expectation needs a permuted base noise vector");
    }
    if (n > kExactNoiseCap) {
      throw Error(ErrorCode::kBudgetExceeded, "exact expectation is limited to " +
                                                  std::to_string(kExactNoiseCap) + " items");
    }
    if (noise.base.size() != n) throw Error(ErrorCode::kDimensionMismatch, "noise base has wrong length");
    std::vector<double> z = noise.base;
    std::sort(z.begin(), z.end());
    do {
      std::vector<double> y(n);
      for (std::size_t i = 0; i < n; ++i) y[i] = R[i] + z[i];
      out.emplace_back(std::move(y));
    } while (std::next_permutation(z.begin(), z.end()));
    return out;
  }
  if (mode.draws == 0) throw Error(ErrorCode::kInvalidArgument, "Monte Carlo needs at least one draw");
  Rng rng = make_rng(noise.seed, {0x6e6f6973ULL});
  out.reserve(mode.draws);
  for (std::size_t t = 0; t < mode.draws; ++t) {
    std::vector<double> z = noise.draw(n, rng);
    for (std::size_t i = 0; i < n; ++i) z[i] += R[i];
    out.emplace_back(std::move(z));
  }
  return out;
}

inline double owner_utility(const OwnershipGraph& g, OwnerId owner, const UtilityModel& u,
                            const ScoreVector& adjusted) {
  double total = 0.0;
  for (ItemId i : g.items_of(owner)) total += u(adjusted[i]);
  return total;
}

struct Expectation {
  double mean = 0.0;
  double stderr_ = 0.0;  // zero in exact mode
  std::size_t realizations = 0;
};

namespace detail {

inline Expectation average_utility(const MechanismSpec& mech, const OwnershipGraph& g,
                                   const std::vector<ScoreVector>& ys, const ReportProfile& profile,
                                   OwnerId owner, const UtilityModel& u, bool exact) {
  double sum = 0.0, sum_sq = 0.0;
  for (const ScoreVector& y : ys) {
    const double v = owner_utility(g, owner, u, apply_mechanism(mech, g, y, profile));
    sum += v;
    sum_sq += v * v;
  }
  const double k = static_cast<double>(ys.size());
  Expectation e{sum / k, 0.0, ys.size()};
  if (!exact && ys.size() > 1) {
    const double var = std::max(0.0, (sum_sq - sum * sum / k) / (k - 1.0));
    e.stderr_ = std::sqrt(var / k);
  }
  return e;
}

}  // namespace detail

/// Expected utility of `owner` under `profile` when scores are R + z.
inline Expectation expected_utility(const MechanismSpec& mech, const OwnershipGraph& g,
                                    const ScoreVector& R, const NoiseModel& noise,
                                    const ReportProfile& profile, OwnerId owner,
                                    const UtilityModel& u, const ExpectationMode& mode) {
  const auto ys = noise_realizations(R, noise, mode);
  return detail::average_utility(mech, g, ys, profile, owner, u, mode.exact);
}

/// Whether `r` orders its items by non-increasing true score.
inline bool consistent_with(const Ranking& r, const ScoreVector& R) {
  for (std::size_t k = 1; k < r.size(); ++k) {
    if (R[r[k - 1]] < R[r[k]]) return false;
  }
  return true;
}

struct AuditResult {
  OwnerId owner = 0;
  std::vector<Ranking> best_reports;
  bool truthful_is_best = true;
  std::vector<std::pair<Ranking, double>> utility_table;
  double best_utility = 0.0;
  double truthful_utility = 0.0;
  double gap = 0.0;
};

inline constexpr std::size_t kBestResponseCap = 7;

namespace detail {

inline AuditResult best_response_on(const MechanismSpec& mech, const OwnershipGraph& g,
                                    const ScoreVector& R, const std::vector<ScoreVector>& ys,
                                    ReportProfile profile, OwnerId owner, const UtilityModel& u,
                                    double tolerance, bool exact) {
  const ItemSet& items = g.items_of(owner);
  if (items.size() > kBestResponseCap) {
    throw Error(ErrorCode::kBudgetExceeded,
                "owner " + std::to_string(owner) + " has " + std::to_string(items.size()) +
                    " items; exhaustive best response is limited to " +
                    std::to_string(kBestResponseCap));
  }
  AuditResult res;
  res.owner = owner;
  if (items.empty()) return res;
  std::vector<std::size_t> order(items.begin(), items.end());
  double best = -std::numeric_limits<double>::infinity();
  double truthful = -std::numeric_limits<double>::infinity();
  do {
    Ranking candidate(order);
    profile.set(owner, candidate);
    const double v = average_utility(mech, g, ys, profile, owner, u, exact).mean;
    best = std::max(best, v);
    if (consistent_with(candidate, R)) truthful = std::max(truthful, v);
    res.utility_table.emplace_back(std::move(candidate), v);
  } while (std::next_permutation(order.begin(), order.end()));
  for (const auto& [r, v] : res.utility_table) {
    if (v >= best - tolerance) res.best_reports.push_back(r);
  }
  res.best_utility = best;
  res.truthful_utility = truthful;
  res.gap = best - truthful;
  res.truthful_is_best = res.gap <= tolerance;
  return res;
}

}  // namespace detail

/// Exhaustive best response of `owner` over all rankings of its items, with
/// everyone else's reports fixed by `others`.
inline AuditResult best_response(const MechanismSpec& mech, const OwnershipGraph& g,
                                 const ScoreVector& R, const NoiseModel& noise,
                                 const ReportProfile& others, OwnerId owner, const UtilityModel& u,
                                 double tolerance,
                                 const ExpectationMode& mode = ExpectationMode::exact_mode()) {
  const auto ys = noise_realizations(R, noise, mode);
  return detail::best_response_on(mech, g, R, ys, others, owner, u, tolerance, mode.exact);
}

struct AuditOptions {
  double tolerance = 1e-9;
  ExpectationMode mode = ExpectationMode::exact_mode();
  /// Owners with a forced report are not audited and always play it.
  std::vector<std::optional<Ranking>> forced;
};

/// Best response of every owner with items, against truthful reports from
/// everyone else (or the forced report, where one is given).
inline std::vector<AuditResult> equilibrium_audit(const MechanismSpec& mech,
                                                  const OwnershipGraph& g, const ScoreVector& R,
                                                  const NoiseModel& noise,
                                                  const std::vector<UtilityModel>& utilities,
                                                  const AuditOptions& options = {}) {
  if (utilities.size() != g.num_owners()) {
    throw Error(ErrorCode::kDimensionMismatch, "need one utility model per owner");
  }
  const auto ys = noise_realizations(R, noise, options.mode);
  ReportProfile base = ReportProfile::truthful(g, R.values());
  for (OwnerId j = 0; j < options.forced.size() && j < g.num_owners(); ++j) {
    if (options.forced[j]) base.set(j, *options.forced[j]);
  }
  std::vector<AuditResult> out;
  for (OwnerId j = 0; j < g.num_owners(); ++j) {
    if (g.items_of(j).empty()) continue;
    if (j < options.forced.size() && options.forced[j]) continue;
    out.push_back(detail::best_response_on(mech, g, R, ys, base, j, utilities[j],
                                           options.tolerance, options.mode.exact));
  }
  return out;
}

struct PayoffDominanceResult {
  std::size_t profiles_checked = 0;
  std::size_t violations = 0;
  double worst_excess = 0.0;  // max over profiles/owners of U(profile) - U(truthful)
};

inline constexpr double kPayoffDominanceBudget = 5e7;

/// Compares every owner's expected utility under every pure report profile
/// with its utility under the all-truthful profile.
inline PayoffDominanceResult payoff_dominance_check(const MechanismSpec& mech,
                                                    const OwnershipGraph& g,
                                                    const ScoreVector& R, const NoiseModel& noise,
                                                    const std::vector<UtilityModel>& utilities,
                                                    double tolerance = 1e-9) {
  const auto ys = noise_realizations(R, noise, ExpectationMode::exact_mode());
  std::vector<OwnerId> players;
  std::vector<std::vector<Ranking>> strategies;
  double total = static_cast<double>(ys.size());
  for (OwnerId j = 0; j < g.num_owners(); ++j) {
    const ItemSet& items = g.items_of(j);
    if (items.empty()) continue;
    players.push_back(j);
    std::vector<std::size_t> order(items.begin(), items.end());
    std::vector<Ranking> mine;
    do {
      mine.emplace_back(order);
    } while (std::next_permutation(order.begin(), order.end()));
    total *= static_cast<double>(mine.size());
    strategies.push_back(std::move(mine));
  }
  if (total > kPayoffDominanceBudget) {
    throw Error(ErrorCode::kBudgetExceeded, "payoff dominance check needs " +
                                                std::to_string(total) + " evaluations");
  }

  auto utilities_of = [&](const ReportProfile& profile) {
    std::vector<double> acc(players.size(), 0.0);
    for (const ScoreVector& y : ys) {
      const ScoreVector adjusted = apply_mechanism(mech, g, y, profile);
      for (std::size_t p = 0; p < players.size(); ++p) {
        acc[p] += owner_utility(g, players[p], utilities[players[p]], adjusted);
      }
    }
    for (double& v : acc) v /= static_cast<double>(ys.size());
    return acc;
  };

  const std::vector<double> truthful = utilities_of(ReportProfile::truthful(g, R.values()));
  PayoffDominanceResult res;
  std::vector<std::size_t> choice(players.size(), 0);
  ReportProfile profile(g.num_owners());
  while (true) {
    for (std::size_t p = 0; p < players.size(); ++p) profile.set(players[p], strategies[p][choice[p]]);
    const std::vector<double> u = utilities_of(profile);
    ++res.profiles_checked;
    for (std::size_t p = 0; p < players.size(); ++p) {
      const double excess = u[p] - truthful[p];
      res.worst_excess = std::max(res.worst_excess, excess);
      if (excess > tolerance) ++res.violations;
    }
    std::size_t p = 0;
    while (p < players.size() && ++choice[p] == strategies[p].size()) choice[p++] = 0;
    if (p == players.size()) break;
  }
  return res;
}

/// a majorizes b: equal totals and every prefix sum of a sorted descending
/// dominates the corresponding prefix sum of b.
inline bool check_majorization(std::span<const double> a, std::span<const double> b,
                               double tol = 1e-9) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "majorization needs vectors of equal length");
  }
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end(), std::greater<>());
  std::sort(sb.begin(), sb.end(), std::greater<>());
  double pa = 0.0, pb = 0.0;
  for (std::size_t k = 0; k < sa.size(); ++k) {
    pa += sa[k];
    pb += sb[k];
    if (pa < pb - tol) return false;
  }
  return std::abs(pa - pb) <= tol;
}

inline bool check_majorization(const ScoreVector& a, const ScoreVector& b, double tol = 1e-9) {
  return check_majorization(a.values(), b.values(), tol);
}

/// Ranking of `scope` by descending R_i + zeta_i with zeta_i ~ N(0, variance)
/// drawn independently per item from (seed, owner). Exact ties are broken by
/// a seeded random key.
inline Ranking perceived_ranking(std::span<const double> R, const ItemSet& scope, double variance,
                                 std::uint64_t seed, OwnerId owner = 0) {
  if (variance < 0.0) throw Error(ErrorCode::kInvalidArgument, "perception variance must be >= 0");
  Rng rng = make_rng(seed, {0x70657263ULL, owner});
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  struct Key {
    double perceived;
    std::uint64_t tie;
    ItemId item;
  };
  std::vector<Key> keys;
  keys.reserve(scope.size());
  for (ItemId i : scope) {
    const double zeta = variance > 0.0 ? normal(rng) : 0.0;
    keys.push_back({R[i] + zeta, rng(), i});
  }
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    if (a.perceived != b.perceived) return a.perceived > b.perceived;
    return a.tie < b.tie;
  });
  std::vector<std::size_t> order;
  order.reserve(keys.size());
  for (const Key& k : keys) order.push_back(k.item);
  return Ranking(std::move(order));
}

}  // namespace isocal
