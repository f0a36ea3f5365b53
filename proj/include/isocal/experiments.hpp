#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "isocal/error.hpp"
#include "isocal/generators.hpp"
#include "isocal/incentives.hpp"
#include "isocal/isotonic.hpp"
#include "isocal/mechanisms.hpp"
#include "isocal/ownership.hpp"
#include "isocal/partition_opt.hpp"
#include "isocal/random.hpp"

namespace isocal {

/// Fraction of the true top-k items that also appear in the estimated top-k,
/// k = round(n * top_percent / 100). Ties rank the larger item id first.
inline double accept_accuracy(const ScoreVector& truth, const ScoreVector& estimate,
                              double top_percent) {
  if (truth.size() != estimate.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "accept accuracy needs vectors of equal length");
  }
  if (!(top_percent > 0.0 && top_percent <= 100.0)) {
    throw Error(ErrorCode::kInvalidArgument, "top percent must be in (0, 100]");
  }
  const std::size_t n = truth.size();
  const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(n) * top_percent / 100.0));
  if (k == 0) {
    throw Error(ErrorCode::kInvalidArgument, "top " + std::to_string(top_percent) + "% of " +
                                                 std::to_string(n) + " items is empty");
  }
  auto top = [&](const ScoreVector& s) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (s[a] != s[b]) return s[a] > s[b];
                        return a > b;
                      });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
  };
  const auto a = top(truth), b = top(estimate);
  std::vector<std::size_t> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(k);
}

inline double mean_squared_error(const ScoreVector& truth, const ScoreVector& estimate) {
  if (truth.size() != estimate.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "MSE needs vectors of equal length");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = truth[i] - estimate[i];
    s += d * d;
  }
  return s / static_cast<double>(truth.size());
}

struct Summary {
  double mean = 0.0;
  double stderr_ = 0.0;
};

inline Summary summarize(const std::vector<double>& v) {
  Summary s;
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stderr_ = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return s;
}

enum class PartitionMethod { kGreedy, kRandom, kBruteForce, kFixed, kSingletons };

inline const char* to_string(PartitionMethod m) {
  switch (m) {
    case PartitionMethod::kGreedy: return "greedy";
    case PartitionMethod::kRandom: return "random";
    case PartitionMethod::kBruteForce: return "bruteforce";
    case PartitionMethod::kFixed: return "fixed";
    case PartitionMethod::kSingletons: return "singletons";
  }
  return "unknown";
}

inline PartitionMethod parse_partition_method(const std::string& s) {
  if (s == "greedy") return PartitionMethod::kGreedy;
  if (s == "random") return PartitionMethod::kRandom;
  if (s == "bruteforce") return PartitionMethod::kBruteForce;
  if (s == "fixed") return PartitionMethod::kFixed;
  if (s == "singletons") return PartitionMethod::kSingletons;
  throw Error(ErrorCode::kInvalidArgument, "unknown partition method '" + s + "'");
}

/// Where the ownership graph comes from. kGiven uses `graph` as is.
struct GraphSource {
  enum class Kind { kConference, kTree, kGiven };
  Kind kind = Kind::kConference;
  std::size_t num_items = 3000;
  std::size_t num_owners = 6000;
  DegreeLaw law;
  std::size_t depth = 7;
  std::shared_ptr<const OwnershipGraph> graph;
};

/// Ground-truth prior for synthetic runs.
inline constexpr double kSyntheticScoreMean = 5.0;
inline constexpr double kSyntheticScoreSd = 1.5;

struct ExperimentConfig {
  GraphSource graph;
  /// Recorded review scores. When set, each trial treats them as y and
  /// samples R = y - z; otherwise R is drawn and y = R + z.
  std::optional<std::vector<double>> scores;
  double noise_sigma = 2.0;
  std::optional<double> perception_variance;
  PartitionMethod partition_method = PartitionMethod::kGreedy;
  std::optional<Partition> fixed_partition;
  std::size_t L = 1;
  std::size_t trials = 30;
  std::uint64_t seed = 0;
  std::vector<double> accept_percents{30.0};

  void validate() const {
    if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be at least 1");
    if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "sigma must be >= 0");
    if (perception_variance && !(*perception_variance >= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "perception variance must be >= 0");
    }
    if (L < 1) throw Error(ErrorCode::kInvalidArgument, "L must be at least 1");
    if (partition_method == PartitionMethod::kFixed && !fixed_partition) {
      throw Error(ErrorCode::kInvalidArgument, "fixed partition method needs a partition");
    }
  }
};

struct MethodMetrics {
  std::string method;
  std::vector<double> mse;                             // one per trial
  std::map<double, std::vector<double>> accept;        // percent -> per trial
  Summary mse_summary;
  std::map<double, Summary> accept_summary;
  /// Versus the baseline, from the mean MSEs: (model - baseline) / baseline.
  double pct_change = 0.0;
  /// Mean and standard error of the per-trial percentage change.
  Summary pct_change_per_trial;
};

/// One cell of a parameter sweep.
struct SweepCell {
  double sigma = 0.0;
  double perception_variance = 0.0;
  std::size_t L = 1;
  MethodMetrics metrics;
};

struct MetricsReport {
  std::string experiment;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::map<std::string, double> parameters;
  std::vector<MethodMetrics> methods;  // methods[0] is the baseline when present
  std::vector<SweepCell> sweep;

  const MethodMetrics& method(const std::string& name) const {
    for (const MethodMetrics& m : methods) {
      if (m.method == name) return m;
    }
    throw Error(ErrorCode::kNotFound, "no metrics for method '" + name + "'");
  }
};

namespace detail {

inline void finalize(MethodMetrics& m, const MethodMetrics* baseline) {
  m.mse_summary = summarize(m.mse);
  for (const auto& [pct, values] : m.accept) m.accept_summary[pct] = summarize(values);
  if (!baseline || baseline == &m) return;
  const double b = baseline->mse_summary.mean;
  m.pct_change = b > 0.0 ? (m.mse_summary.mean - b) / b : 0.0;
  std::vector<double> per;
  per.reserve(m.mse.size());
  for (std::size_t t = 0; t < m.mse.size(); ++t) {
    const double bt = baseline->mse[t];
    per.push_back(bt > 0.0 ? (m.mse[t] - bt) / bt : 0.0);
  }
  m.pct_change_per_trial = summarize(per);
}

inline void record(MethodMetrics& m, const ScoreVector& R, const ScoreVector& estimate,
                   const std::vector<double>& percents) {
  m.mse.push_back(mean_squared_error(R, estimate));
  for (double pct : percents) m.accept[pct].push_back(accept_accuracy(R, estimate, pct));
}

inline OwnershipGraph build_graph(const GraphSource& src, std::uint64_t seed) {
  switch (src.kind) {
    case GraphSource::Kind::kConference:
      return gen_random_conference(src.num_items, src.num_owners, src.law,
                                   derive_seed(seed, {0x67726170ULL}));
    case GraphSource::Kind::kTree:
      return gen_ternary_tree(src.depth);
    case GraphSource::Kind::kGiven:
      if (!src.graph) throw Error(ErrorCode::kInvalidArgument, "graph source has no graph");
      return *src.graph;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown graph source");
}

inline Partition build_partition(const OwnershipGraph& g, const ExperimentConfig& cfg,
                                 PartitionMethod method) {
  switch (method) {
    case PartitionMethod::kGreedy: return greedy_partition_l(g, cfg.L);
    case PartitionMethod::kRandom: return random_partition(g, derive_seed(cfg.seed, {0x70617274ULL}));
    case PartitionMethod::kBruteForce:
      return brute_force_optimal(g, WellnessFunction::comparison_focused(), cfg.L);
    case PartitionMethod::kFixed: return Partition(g, cfg.fixed_partition->blocks());
    case PartitionMethod::kSingletons: return Partition::singletons(g);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown partition method");
}

/// Reports for one trial: truthful in R, or each owner's perceived ranking.
inline ReportProfile trial_reports(const OwnershipGraph& g, const ScoreVector& R,
                                   std::optional<double> perception_variance,
                                   std::uint64_t trial_seed) {
  if (!perception_variance) return ReportProfile::truthful(g, R.values());
  ReportProfile p(g.num_owners());
  for (OwnerId j = 0; j < g.num_owners(); ++j) {
    if (g.items_of(j).empty()) continue;
    p.set(j, perceived_ranking(R.values(), g.items_of(j), *perception_variance, trial_seed, j));
  }
  return p;
}

}  // namespace detail

/// Conference-style pipeline: for each trial draw (R, y), form reports,
/// calibrate with Mechanism 2 under the configured partition and compare
/// against the raw scores. A random partition is run alongside unless it is
/// the configured method.
inline MetricsReport run_iclr_style(const ExperimentConfig& cfg) {
  cfg.validate();
  const OwnershipGraph g = detail::build_graph(cfg.graph, cfg.seed);
  const std::size_t n = g.num_items();
  if (cfg.scores && cfg.scores->size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "have " + std::to_string(cfg.scores->size()) +
                                                   " scores for " + std::to_string(n) + " items");
  }
  std::vector<std::pair<std::string, Partition>> partitions;
  partitions.emplace_back(to_string(cfg.partition_method),
                          detail::build_partition(g, cfg, cfg.partition_method));
  if (cfg.partition_method != PartitionMethod::kRandom) {
    partitions.emplace_back("random", detail::build_partition(g, cfg, PartitionMethod::kRandom));
  }
  const OwnerCredentials cred = OwnerCredentials::uniform(g.num_owners());

  MetricsReport report;
  report.experiment = "iclr";
  report.seed = cfg.seed;
  report.trials = cfg.trials;
  report.parameters["num_items"] = static_cast<double>(n);
  report.parameters["num_owners"] = static_cast<double>(g.num_owners());
  report.parameters["num_edges"] = static_cast<double>(g.num_edges());
  report.parameters["sigma"] = cfg.noise_sigma;
  report.parameters["L"] = static_cast<double>(cfg.L);
  report.parameters["ingest"] = cfg.scores ? 1.0 : 0.0;
  if (!cfg.scores) {
    report.parameters["prior_mean"] = kSyntheticScoreMean;
    report.parameters["prior_sd"] = kSyntheticScoreSd;
  }
  if (cfg.perception_variance) report.parameters["perception_variance"] = *cfg.perception_variance;

  report.methods.resize(1 + partitions.size());
  report.methods[0].method = "baseline";
  for (std::size_t k = 0; k < partitions.size(); ++k) report.methods[k + 1].method = partitions[k].first;

  for (std::size_t t = 0; t < cfg.trials; ++t) {
    Rng rng = make_rng(cfg.seed, {0x7472ULL, t});
    std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
    std::normal_distribution<double> prior(kSyntheticScoreMean, kSyntheticScoreSd);
    std::vector<double> R(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = cfg.noise_sigma > 0.0 ? noise(rng) : 0.0;
      if (cfg.scores) {
        y[i] = (*cfg.scores)[i];
        R[i] = y[i] - z;
      } else {
        R[i] = prior(rng);
        y[i] = R[i] + z;
      }
    }
    const ScoreVector Rv(std::move(R)), yv(std::move(y));
    const ReportProfile reports =
        detail::trial_reports(g, Rv, cfg.perception_variance, derive_seed(cfg.seed, {0x7065ULL, t}));
    detail::record(report.methods[0], Rv, yv, cfg.accept_percents);
    for (std::size_t k = 0; k < partitions.size(); ++k) {
      const ScoreVector adjusted = mechanism2(g, partitions[k].second, yv, reports, cred);
      detail::record(report.methods[k + 1], Rv, adjusted, cfg.accept_percents);
    }
  }
  for (MethodMetrics& m : report.methods) detail::finalize(m, &report.methods[0]);
  return report;
}

inline constexpr std::size_t kMaxTradeoffDepth = 8;

/// Ternary-tree tradeoff between block size and the number of rankings that
/// inform each block. For every (sigma, perception variance) pair and every
/// L in 1..depth, blocks are the leaf sets of depth-(L-1) nodes and each
/// owner reports its perceived ranking; perception noise is drawn
/// independently per (owner, item). All L share the same draws within a trial.
inline MetricsReport run_tree_tradeoff(std::size_t depth, const std::vector<double>& sigmas,
                                       const std::vector<double>& perception_variances,
                                       std::size_t trials, std::uint64_t seed) {
  if (depth > kMaxTradeoffDepth) {
    throw Error(ErrorCode::kBudgetExceeded, "tree depth is limited to " +
                                                std::to_string(kMaxTradeoffDepth));
  }
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be at least 1");
  const OwnershipGraph tree = gen_ternary_tree(depth);
  const std::size_t n = tree.num_items();
  std::vector<Partition> partitions;
  for (std::size_t L = 1; L <= depth; ++L) partitions.push_back(ternary_tree_partition(tree, depth, L));
  const OwnerCredentials cred = OwnerCredentials::uniform(tree.num_owners());

  MetricsReport report;
  report.experiment = "tree";
  report.seed = seed;
  report.trials = trials;
  report.parameters["depth"] = static_cast<double>(depth);
  report.parameters["num_items"] = static_cast<double>(n);
  report.parameters["prior_mean"] = kSyntheticScoreMean;
  report.parameters["prior_sd"] = kSyntheticScoreSd;

  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    for (std::size_t vi = 0; vi < perception_variances.size(); ++vi) {
      std::vector<SweepCell> cells(depth + 1);
      for (std::size_t c = 0; c <= depth; ++c) {
        cells[c].sigma = sigmas[si];
        cells[c].perception_variance = perception_variances[vi];
        cells[c].L = c;
        cells[c].metrics.method = c == 0 ? "baseline" : "L" + std::to_string(c);
      }
      for (std::size_t t = 0; t < trials; ++t) {
        Rng rng = make_rng(seed, {0x74726565ULL, si, vi, t});
        std::normal_distribution<double> noise(0.0, sigmas[si]);
        std::normal_distribution<double> prior(kSyntheticScoreMean, kSyntheticScoreSd);
        std::vector<double> R(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
          R[i] = prior(rng);
          y[i] = R[i] + (sigmas[si] > 0.0 ? noise(rng) : 0.0);
        }
        const ScoreVector Rv(std::move(R)), yv(std::move(y));
        const ReportProfile reports = detail::trial_reports(
            tree, Rv, perception_variances[vi], derive_seed(seed, {0x7065ULL, si, vi, t}));
        detail::record(cells[0].metrics, Rv, yv, {});
        for (std::size_t L = 1; L <= depth; ++L) {
          detail::record(cells[L].metrics, Rv, mechanism2(tree, partitions[L - 1], yv, reports, cred), {});
        }
      }
      for (SweepCell& c : cells) detail::finalize(c.metrics, &cells[0].metrics);
      for (SweepCell& c : cells) report.sweep.push_back(std::move(c));
    }
  }
  return report;
}

/// L with the smallest mean MSE among the sweep cells for (sigma, variance).
inline std::size_t tradeoff_argmin(const MetricsReport& report, double sigma, double variance) {
  std::size_t best = 0;
  double best_mse = std::numeric_limits<double>::infinity();
  for (const SweepCell& c : report.sweep) {
    if (c.L == 0 || c.sigma != sigma || c.perception_variance != variance) continue;
    if (c.metrics.mse_summary.mean < best_mse) {
      best_mse = c.metrics.mse_summary.mean;
      best = c.L;
    }
  }
  if (best == 0) throw Error(ErrorCode::kNotFound, "no sweep cells for the requested parameters");
  return best;
}

/// Greedy and random (seeded) partitions scored under every wellness function.
inline std::vector<PartitionObjectiveReport> run_partition_benchmark(
    const OwnershipGraph& g, const std::vector<WellnessFunction>& ws, std::uint64_t seed = 0) {
  const Partition greedy = greedy_partition(g);
  const Partition random = random_partition(g, seed);
  std::vector<PartitionObjectiveReport> out;
  for (const WellnessFunction& w : ws) {
    out.push_back(report_partition(greedy, w, "greedy"));
    out.push_back(report_partition(random, w, "random"));
  }
  return out;
}

}  // namespace isocal
