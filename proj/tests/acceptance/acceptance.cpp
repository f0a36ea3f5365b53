// Acceptance run: one PASS/FAIL line per criterion. `acceptance 3 7` runs only
// criteria 3 and 7. Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "isocal/experiments.hpp"
#include "isocal/generators.hpp"
#include "isocal/incentives.hpp"
#include "isocal/isotonic.hpp"
#include "isocal/mechanisms.hpp"
#include "isocal/ownership.hpp"
#include "isocal/partition_opt.hpp"
#include "isocal/random.hpp"
#include "test_support.hpp"

using namespace isocal;

namespace {

constexpr std::uint64_t kSeed = 20240901;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Notes {
 public:
  template <class T>
  Notes& operator<<(const T& v) {
    ss_ << v;
    return *this;
  }
  std::string str() const { return ss_.str(); }

 private:
  std::ostringstream ss_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Ranking random_perm(std::size_t n, Rng& rng) {
  std::vector<std::size_t> o(n);
  std::iota(o.begin(), o.end(), 0);
  shuffle(o, rng);
  return Ranking(o);
}

std::vector<double> normals(std::size_t n, double sd, Rng& rng) {
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

OwnershipGraph full(std::size_t m, std::size_t n) {
  std::vector<ItemSet> sets(m, ItemSet(n));
  for (auto& s : sets) std::iota(s.begin(), s.end(), 0);
  return OwnershipGraph::from_item_sets(n, sets);
}

UtilityModel random_utility(Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < 0.5) return UtilityModel::hinge(12.0 * unit(rng) - 1.0);
  return UtilityModel::power(1.0 + 2.0 * unit(rng));
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_rng(kSeed, {1});
  double max_diff = 0.0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + uniform_index(rng, 6);
    const ScoreVector y(normals(n, 3.0, rng));
    const Ranking pi = random_perm(n, rng);
    const ScoreVector a = isotonic_fit(y, pi);
    const ScoreVector b = brute_force_projection(y, pi, 1e-12);
    for (std::size_t i = 0; i < n; ++i) max_diff = std::max(max_diff, std::abs(a[i] - b[i]));
  }
  std::size_t property_failures = 0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + uniform_index(rng, 100);
    const ScoreVector y(normals(n, 3.0, rng)), y2(normals(n, 3.0, rng));
    const Ranking pi = random_perm(n, rng);
    const ScoreVector r = isotonic_fit(y, pi), r2 = isotonic_fit(y2, pi), rr = isotonic_fit(r, pi);
    double sum_y = 0, sum_r = 0, d_fit = 0, d_in = 0, idem = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sum_y += y[i];
      sum_r += r[i];
      d_fit += (r[i] - r2[i]) * (r[i] - r2[i]);
      d_in += (y[i] - y2[i]) * (y[i] - y2[i]);
      idem = std::max(idem, std::abs(r[i] - rr[i]));
    }
    bool ok = idem <= 1e-12 && std::abs(sum_y - sum_r) <= 1e-9 && d_fit <= d_in + 1e-9;
    for (std::size_t k = 1; k < n; ++k) ok = ok && r[pi[k - 1]] >= r[pi[k]] - 1e-12;
    if (!ok) ++property_failures;
  }
  const double secs = seconds_since(t0);
  Notes d;
  d << "max |PAVA - brute force| = " << max_diff << " over 500 cases; " << property_failures
    << " property failures over 500 cases with n <= 100; " << secs << " s";
  return {max_diff <= 1e-8 && property_failures == 0 && secs < 10.0, d.str()};
}

// ---------------------------------------------------------------------------

Outcome criterion2() {
  const OwnershipGraph g = OwnershipGraph::from_item_sets(3, {{0, 1}, {0, 1}, {1, 2}});
  const ScoreVector R{9, 8, 4};
  const ReportProfile truthful = ReportProfile::truthful(g, R.values());
  ReportProfile flipped = truthful;
  flipped.set(2, Ranking{2, 1});
  const ScoreVector a = naive_average(g, R, truthful);
  const ScoreVector b = naive_average(g, R, flipped);
  const std::vector<double> want_a{9, 8, 4}, want_b{9, 8.0 - 2.0 / 3.0, 6};
  double err = 0.0;
  for (std::size_t i = 0; i < 3; ++i) err = std::max({err, std::abs(a[i] - want_a[i]), std::abs(b[i] - want_b[i])});

  MechanismSpec naive;
  naive.kind = MechanismKind::kNaive;
  naive.credentials = OwnerCredentials::uniform(3);
  const AuditResult r = best_response(naive, g, R, NoiseModel::none(3), truthful, 2, UtilityModel::hinge(5), 1e-12);
  const bool utilities = std::abs(r.truthful_utility - 3.0) <= 1e-12 && std::abs(r.best_utility - 10.0 / 3.0) <= 1e-12 &&
                         std::abs(r.gap - 1.0 / 3.0) <= 1e-12 && !r.truthful_is_best &&
                         r.best_reports == std::vector<Ranking>{Ranking{2, 1}};
  Notes d;
  d << "naive outputs max error " << err << "; owner 3 utility " << r.truthful_utility << " truthful vs "
    << r.best_utility << " flipped, gap " << r.gap;
  return {err <= 1e-12 && utilities, d.str()};
}

// ---------------------------------------------------------------------------

// Independent oracle: two owners with weight 1/2 under complete overlap, every
// ordering of the base noise (repeats included), brute-force projections.
double oracle_owner2(const std::vector<double>& R, const std::vector<double>& z0, const Ranking& pi1,
                     const Ranking& pi2, double threshold) {
  const std::size_t n = R.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double total = 0.0;
  std::size_t count = 0;
  do {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = R[i] + z0[perm[i]];
    const ScoreVector a = brute_force_projection(ScoreVector(y), pi1, 1e-12);
    const ScoreVector b = brute_force_projection(ScoreVector(y), pi2, 1e-12);
    for (std::size_t i = 0; i < n; ++i) total += std::max(0.5 * a[i] + 0.5 * b[i] - threshold, 0.0);
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total / static_cast<double>(count);
}

Outcome criterion3() {
  const OwnershipGraph g = full(2, 3);
  const ScoreVector R{7, 4, 3};
  const UtilityModel u = UtilityModel::hinge(6.25);
  MechanismSpec m1;
  m1.kind = MechanismKind::kComplete;
  m1.credentials = OwnerCredentials{{0.5, 0.5}};
  const Ranking forced{2, 0, 1}, truthful{0, 1, 2}, deviation{0, 2, 1};
  auto lib = [&](const std::vector<double>& z0, const Ranking& second) {
    ReportProfile p(2);
    p.set(0, forced);
    p.set(1, second);
    return expected_utility(m1, g, R, NoiseModel::exchangeable(z0), p, 1, u, ExpectationMode::exact_mode()).mean;
  };
  const std::vector<double> stated{2, 2, 4}, printed{4, 4, 2};
  const double lt = lib(stated, truthful), ld = lib(stated, deviation);
  const double ot = oracle_owner2({7, 4, 3}, stated, forced, truthful, 6.25);
  const double od = oracle_owner2({7, 4, 3}, stated, forced, deviation, 6.25);
  const double pt = lib(printed, truthful), pd = lib(printed, deviation);

  AuditOptions opt;
  opt.forced = {forced, std::nullopt};
  const auto audit = equilibrium_audit(m1, g, R, NoiseModel::exchangeable(stated), {u, u}, opt);
  const bool flagged = audit.size() == 1 && audit[0].owner == 1 && !audit[0].truthful_is_best &&
                       std::find(audit[0].best_reports.begin(), audit[0].best_reports.end(), deviation) !=
                           audit[0].best_reports.end();

  const bool oracle_ok = std::abs(lt - ot) <= 1e-9 && std::abs(ld - od) <= 1e-9 &&
                         std::abs(lt - 121.0 / 36.0) <= 1e-9 && std::abs(ld - 3.5) <= 1e-9;
  const bool printed_ok = std::abs(pt - 21.0 / 4.0) <= 1e-9 && std::abs(pd - 16.0 / 3.0) <= 1e-9;
  Notes d;
  d << "z0=(2,2,4): truthful " << lt << " (oracle " << ot << " = 121/36), deviation " << ld << " (oracle " << od
    << " = 7/2); z0=(4,4,2): " << pt << " vs " << pd << " (21/4 vs 16/3); auditor flags owner 2: "
    << (flagged ? "yes" : "no");
  return {oracle_ok && printed_ok && flagged, d.str()};
}

// ---------------------------------------------------------------------------

Outcome criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_rng(kSeed, {4});
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t owner_failures = 0, dominance_violations = 0, profiles = 0;
  double worst_gap = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + uniform_index(rng, 3);
    const std::size_t m = 2 + uniform_index(rng, 2);
    const OwnershipGraph g = full(m, n);
    std::vector<double> R(n), base(n);
    for (double& v : R) v = 10.0 * unit(rng);
    for (double& v : base) v = std::round(8.0 * unit(rng) - 4.0);  // rounding creates repeated entries
    std::vector<UtilityModel> us;
    std::vector<double> alpha;
    for (std::size_t j = 0; j < m; ++j) {
      us.push_back(random_utility(rng));
      alpha.push_back(0.1 + unit(rng));
    }
    MechanismSpec spec;
    spec.kind = MechanismKind::kComplete;
    spec.credentials = OwnerCredentials{alpha};
    const NoiseModel noise = NoiseModel::exchangeable(base);
    for (const AuditResult& r : equilibrium_audit(spec, g, ScoreVector(R), noise, us)) {
      worst_gap = std::max(worst_gap, r.gap);
      if (!r.truthful_is_best || r.gap > 1e-9) ++owner_failures;
    }
    const PayoffDominanceResult pd = payoff_dominance_check(spec, g, ScoreVector(R), noise, us, 1e-9);
    profiles += pd.profiles_checked;
    dominance_violations += pd.violations;
  }
  const double secs = seconds_since(t0);
  Notes d;
  d << owner_failures << " owners not truthful, worst gap " << worst_gap << "; " << dominance_violations
    << " payoff-dominance violations over " << profiles << " profiles; " << secs << " s";
  return {owner_failures == 0 && dominance_violations == 0 && secs < 120.0, d.str()};
}

// ---------------------------------------------------------------------------

Partition random_strong_partition(const OwnershipGraph& g, Rng& rng) {
  const std::size_t n = g.num_items();
  for (int attempt = 0; attempt < 50; ++attempt) {
    std::vector<ItemSet> blocks(n);
    for (ItemId i = 0; i < n; ++i) blocks[uniform_index(rng, n)].push_back(i);
    std::erase_if(blocks, [](const ItemSet& b) { return b.empty(); });
    const Partition p(g, blocks);
    if (is_l_strong(g, p, 1) && p.num_blocks() < n) return p;
  }
  return random_partition(g, rng());
}

Outcome criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_rng(kSeed, {5});
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t failures = 0, audited = 0, nontrivial = 0;
  double worst_gap = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + uniform_index(rng, 4);
    const std::size_t m = 2 + uniform_index(rng, 3);
    const OwnershipGraph g = testing_support::random_graph(m, n, 0.55, rng);
    const Partition p = t % 2 == 0 ? random_partition(g, rng()) : random_strong_partition(g, rng);
    if (!is_l_strong(g, p, 1)) {
      ++failures;
      continue;
    }
    for (std::size_t k = 0; k < p.num_blocks(); ++k) nontrivial += p.block(k).size() > 1;
    std::vector<double> R(n), base(n);
    for (double& v : R) v = 10.0 * unit(rng);
    for (double& v : base) v = 6.0 * unit(rng) - 3.0;
    std::vector<UtilityModel> us;
    std::vector<double> alpha;
    for (std::size_t j = 0; j < m; ++j) {
      us.push_back(random_utility(rng));
      alpha.push_back(0.1 + unit(rng));
    }
    MechanismSpec spec;
    spec.kind = MechanismKind::kPartition;
    spec.partition = p;
    spec.credentials = OwnerCredentials{alpha};
    for (const AuditResult& r :
         equilibrium_audit(spec, g, ScoreVector(R), NoiseModel::exchangeable(base), us)) {
      ++audited;
      worst_gap = std::max(worst_gap, r.gap);
      if (!r.truthful_is_best || r.gap > 1e-9) ++failures;
    }
  }
  const double secs = seconds_since(t0);
  Notes d;
  d << failures << " failures over " << audited << " owner audits (" << nontrivial
    << " multi-item blocks), worst gap " << worst_gap << "; " << secs << " s";
  return {failures == 0 && secs < 120.0, d.str()};
}

// ---------------------------------------------------------------------------

Outcome criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_rng(kSeed, {6});
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<std::pair<WellnessFunction, double>> ws{
      {WellnessFunction::power(2), 0.5}, {WellnessFunction::power(3), 1.0 / 3.0}, {WellnessFunction::size_focused(), 0.5}};
  std::size_t failures = 0;
  double worst_ratio = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + uniform_index(rng, 9);
    const std::size_t m = 1 + uniform_index(rng, 6);
    const OwnershipGraph g = testing_support::random_graph(m, n, 0.15 + 0.5 * unit(rng), rng);
    const Partition greedy = greedy_partition(g);
    for (const auto& [w, c] : ws) {
      const double opt = objective(brute_force_optimal(g, w, 1), w);
      const double got = objective(greedy, w);
      if (got < c * opt - 1e-9) ++failures;
      if (opt > 0) worst_ratio = std::min(worst_ratio, got / opt);
    }
  }
  const double secs = seconds_since(t0);
  Notes d;
  d << failures << " bound violations over 300 graphs x 3 wellness functions; worst greedy/OPT " << worst_ratio
    << "; " << secs << " s";
  return {failures == 0 && secs < 300.0, d.str()};
}

// ---------------------------------------------------------------------------

Outcome criterion7() {
  constexpr std::size_t M = 4;
  const double limit = (1.0 / M) / (1.0 - (1.0 - 1.0 / M) * (1.0 - 1.0 / M));
  const WellnessFunction w = WellnessFunction::power(2);
  std::vector<double> ratios;
  Notes d;
  d << "ratios";
  for (std::size_t L = 1; L <= 6; ++L) {
    const std::size_t N = 16 * ipow(4, L);
    const OwnershipGraph g = gen_tightness_family(M, L, N);
    std::vector<ItemSet> base;
    for (OwnerId b = 0; b < M; ++b) base.push_back(g.items_of(b));
    const double ratio = objective(greedy_partition(g), w) / objective(Partition(g, base), w);
    ratios.push_back(ratio);
    d << " L=" << L << ":" << ratio;
  }
  bool decreasing = true, above_half = true;
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    above_half = above_half && ratios[k] >= 0.5 - 1e-9;
    if (k) decreasing = decreasing && ratios[k] < ratios[k - 1];
  }
  const bool close = std::abs(ratios.back() - limit) <= 0.05;
  d << "; limit 4/7 = " << limit << (decreasing ? "; decreasing" : "; NOT decreasing");
  return {decreasing && above_half && close, d.str()};
}

// ---------------------------------------------------------------------------

Outcome criterion8() {
  Rng rng = make_rng(kSeed, {8});
  std::size_t mismatches = 0, partitions = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + uniform_index(rng, 6);
    const std::size_t m = 1 + uniform_index(rng, 5);
    const std::size_t L = 2 + uniform_index(rng, 2);
    const OwnershipGraph g = testing_support::random_graph(m, n, 0.6, rng);
    const ReducedGraph reduced = reduce_l_to_1(g, L);
    testing_support::for_each_set_partition(n, [&](const std::vector<ItemSet>& blocks) {
      ++partitions;
      const bool original = is_l_strong(g, Partition(g, blocks), L);
      const bool via = is_l_strong(reduced.graph, Partition(reduced.graph, blocks), 1);
      if (original != via) ++mismatches;
    });
  }
  Notes d;
  d << mismatches << " mismatches over " << partitions << " set partitions of 100 graphs";
  return {mismatches == 0, d.str()};
}

// ---------------------------------------------------------------------------

bool is_coarsening(const Partition& coarse, const Partition& fine) {
  for (std::size_t k = 0; k < fine.num_blocks(); ++k) {
    const ItemSet& b = fine.block(k);
    for (ItemId i : b) {
      if (coarse.block_of(i) != coarse.block_of(b.front())) return false;
    }
  }
  return true;
}

Outcome criterion9() {
  Rng rng = make_rng(kSeed, {9});
  std::size_t greedy_fail = 0, structure_fail = 0, shrink = 0, idempotent_fail = 0, coarsen_fail = 0, coarsened = 0;
  const int kGraphs = 300;
  for (int t = 0; t < kGraphs; ++t) {
    const OwnershipGraph g =
        testing_support::random_graph(1 + uniform_index(rng, 6), 1 + uniform_index(rng, 10), 0.45, rng);
    const Partition greedy = greedy_partition(g);
    if (!merge_to_global_partition(g, encode_partition(g, greedy)).same_blocks(greedy)) ++greedy_fail;

    for (const Partition& p : {random_partition(g, rng()), random_strong_partition(g, rng)}) {
      const Mech3Params enc = encode_partition(g, p);
      const Partition merged = merge_to_global_partition(g, enc);
      if (!partition_structure_check(encode_partition(g, merged)).empty()) ++structure_fail;
      const auto before = elicited_pairs(enc), after = elicited_pairs(merged);
      if (!std::includes(after.begin(), after.end(), before.begin(), before.end())) ++shrink;
      if (!merge_to_global_partition(g, encode_partition(g, merged)).same_blocks(merged)) ++idempotent_fail;
      if (!is_coarsening(merged, p)) ++coarsen_fail;
      if (!merged.same_blocks(p)) ++coarsened;
    }
  }
  Notes d;
  d << "greedy round-trip failures " << greedy_fail << "; structure failures " << structure_fail
    << "; elicited-pair shrinks " << shrink << "; non-idempotent " << idempotent_fail << "; non-coarsening "
    << coarsen_fail << " (" << coarsened << " of " << 2 * kGraphs << " random partitions coarsened)";
  return {greedy_fail + structure_fail + shrink + idempotent_fail + coarsen_fail == 0, d.str()};
}

// ---------------------------------------------------------------------------

// Convex piecewise-linear test function: any first slope, then nonnegative
// slope increases at random breakpoints.
std::function<double(double)> random_convex(Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double s0 = 4.0 * unit(rng) - 2.0;
  const std::size_t k = 1 + uniform_index(rng, 4);
  std::vector<double> bps(k), inc(k);
  for (std::size_t t = 0; t < k; ++t) {
    bps[t] = 20.0 * unit(rng) - 10.0;
    inc[t] = 3.0 * unit(rng);
  }
  return [=](double x) {
    double v = s0 * x;
    for (std::size_t t = 0; t < bps.size(); ++t) v += inc[t] * std::max(x - bps[t], 0.0);
    return v;
  };
}

std::vector<double> permuted(const std::vector<double>& v, const Ranking& p) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[p[i]];
  return out;
}

std::vector<double> plus(const std::vector<double>& v) { return project_descending_cone(ScoreVector(v)).vec(); }

std::vector<double> add(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Outcome criterion10() {
  Rng rng = make_rng(kSeed, {10});
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t sorted_sum = 0, transfer = 0, convex = 0, coupling = 0;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t n = 1 + uniform_index(rng, 6);
    // sum of two sorted projections majorizes the mismatched sum; convex sums follow
    const auto ap = plus(normals(n, 3.0, rng)), bp = plus(normals(n, 3.0, rng));
    const auto x = add(ap, bp), y = add(ap, permuted(bp, random_perm(n, rng)));
    const bool maj = check_majorization(x, y);
    if (!maj) ++sorted_sum;
    if (maj) {
      for (int f = 0; f < 50; ++f) {
        const auto h = random_convex(rng);
        double hx = 0, hy = 0;
        for (std::size_t i = 0; i < n; ++i) {
          hx += h(x[i]);
          hy += h(y[i]);
        }
        if (hx < hy - 1e-9) {
          ++convex;
          break;
        }
      }
    }
    // transfers from richer to poorer entries keep the sum majorized
    std::vector<double> a = normals(n, 3.0, rng);
    std::sort(a.begin(), a.end(), std::greater<>());
    std::vector<double> a2 = a;
    for (std::size_t k = 0, moves = uniform_index(rng, 4); k < moves && n > 1; ++k) {
      std::size_t i = uniform_index(rng, n), j = uniform_index(rng, n);
      if (a2[i] < a2[j]) std::swap(i, j);
      const double delta = unit(rng) * (a2[i] - a2[j]) / 2.0;
      a2[i] -= delta;
      a2[j] += delta;
    }
    std::sort(a2.begin(), a2.end(), std::greater<>());
    std::vector<double> b = normals(n, 3.0, rng);
    std::sort(b.begin(), b.end(), std::greater<>());
    if (!check_majorization(add(a, b), add(a2, b))) ++transfer;
    // Coupling: (R + pi rho z)+ majorizes (pi R + pi rho z)+
    std::vector<double> R = normals(n, 3.0, rng);
    std::sort(R.begin(), R.end(), std::greater<>());
    const Ranking pi = random_perm(n, rng), rho = random_perm(n, rng);
    const auto prz = permuted(permuted(normals(n, 2.0, rng), rho), pi);
    if (!check_majorization(plus(add(R, prz)), plus(add(permuted(R, pi), prz)))) ++coupling;
  }
  Notes d;
  d << "failures over 10^4 instances each: sorted sum " << sorted_sum << ", transfer " << transfer << ", convex sums " << convex << ", coupling "
    << coupling;
  return {sorted_sum + transfer + convex + coupling == 0, d.str()};
}

// ---------------------------------------------------------------------------

Outcome criterion11() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.graph.num_items = 3000;
  cfg.graph.num_owners = 6000;
  cfg.noise_sigma = 2.0;
  cfg.trials = 30;
  cfg.seed = kSeed;
  cfg.accept_percents = {30.0};
  const MetricsReport r = run_iclr_style(cfg);
  const MethodMetrics& base = r.method("baseline");
  const MethodMetrics& greedy = r.method("greedy");
  const Summary pct = greedy.pct_change_per_trial;
  const double acc_base = base.accept_summary.at(30.0).mean, acc_greedy = greedy.accept_summary.at(30.0).mean;
  const double secs = seconds_since(t0);
  Notes d;
  d << "pctChange " << 100.0 * pct.mean << "% (stderr " << 100.0 * pct.stderr_ << "%); accept@30 " << acc_greedy
    << " vs baseline " << acc_base << "; " << secs << " s";
  return {pct.mean < 0.0 && std::abs(pct.mean) > 2.0 * pct.stderr_ && acc_greedy > acc_base && secs < 180.0, d.str()};
}

// ---------------------------------------------------------------------------

Outcome criterion12() {
  const MetricsReport r = run_tree_tradeoff(7, {2.0}, {0.1, 2.0}, 20, kSeed);
  const std::size_t low = tradeoff_argmin(r, 2.0, 0.1), high = tradeoff_argmin(r, 2.0, 2.0);
  Notes d;
  d << "argmin L at variance 0.1: " << low << ", at variance 2.0: " << high << "; mean MSE by L at 0.1:";
  for (const SweepCell& c : r.sweep) {
    if (c.perception_variance == 0.1 && c.L > 0) d << " " << c.metrics.mse_summary.mean;
  }
  return {low == 1 && high > 1, d.str()};
}

// ---------------------------------------------------------------------------

double best_greedy_time(const OwnershipGraph& g) {
  double best = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 3; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    const Partition p = greedy_partition(g);
    best = std::min(best, seconds_since(t0));
    if (p.num_items() != g.num_items()) return std::numeric_limits<double>::infinity();
  }
  return best;
}

Outcome criterion13() {
  const OwnershipGraph probe = gen_random_conference(20000, 40000, DegreeLaw{}, kSeed);
  const double per_item = static_cast<double>(probe.num_edges()) / 20000.0;
  const auto small_n = static_cast<std::size_t>(1e5 / per_item);
  const auto large_n = static_cast<std::size_t>(1e6 / per_item);
  const OwnershipGraph small = gen_random_conference(small_n, 2 * small_n, DegreeLaw{}, kSeed);
  const OwnershipGraph large = gen_random_conference(large_n, 2 * large_n, DegreeLaw{}, kSeed);
  const double ts = best_greedy_time(small), tl = best_greedy_time(large);
  Notes d;
  d << small.num_edges() << " edges: " << ts << " s; " << large.num_edges() << " edges: " << tl << " s; ratio "
    << tl / ts;
  return {tl / ts <= 15.0 && tl <= 5.0, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, Outcome (*)()>> criteria{
      {1, criterion1},  {2, criterion2},   {3, criterion3},   {4, criterion4},  {5, criterion5},
      {6, criterion6},  {7, criterion7},   {8, criterion8},   {9, criterion9},  {10, criterion10},
      {11, criterion11}, {12, criterion12}, {13, criterion13}};
  std::set<int> only;
  for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %2d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
