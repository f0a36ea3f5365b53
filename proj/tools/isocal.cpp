#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "isocal/experiments.hpp"
#include "isocal/generators.hpp"
#include "isocal/incentives.hpp"
#include "isocal/io.hpp"
#include "isocal/mechanisms.hpp"
#include "isocal/partition_opt.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using namespace isocal;
using io::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNotTruthful = 1;
constexpr int kExitError = 2;

bool g_manifest_only = false;

void warn(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

/// Writes `content` to `output` (stdout when empty) and the run manifest with
/// timings next to it.
void emit(const std::string& output, const std::string& content, cli::RunManifest& manifest) {
  manifest.lap("total");
  if (output.empty() || output == "-") {
    std::cout << content;
    return;
  }
  io::write_file_atomic(output, content);
  io::write_file_atomic(output + ".run.json", manifest.with_timings().dump(2) + "\n");
}

/// Prints the manifest instead of running when --manifest-only is set.
bool manifest_only(const cli::RunManifest& manifest) {
  if (!g_manifest_only) return false;
  std::cout << manifest.with_hash().dump(2) << "\n";
  return true;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string kind;
  std::size_t depth = 3;
  std::size_t M = 4, L = 1, N = 16;
  std::size_t items = 3000, owners = 0, cap = 0;
  double exponent = 2.5;
  std::uint64_t seed = 0;
  std::string output;
};

int run_gen(const GenArgs& a) {
  cli::RunManifest manifest("gen");
  manifest.set("kind", a.kind);
  manifest.set_seed(a.seed);
  OwnershipGraph g;
  if (a.kind == "tree") {
    manifest.set("depth", a.depth);
    if (manifest_only(manifest)) return kExitOk;
    g = gen_ternary_tree(a.depth);
  } else if (a.kind == "tightness") {
    manifest.set("M", a.M);
    manifest.set("L", a.L);
    manifest.set("N", a.N);
    if (manifest_only(manifest)) return kExitOk;
    g = gen_tightness_family(a.M, a.L, a.N);
  } else {
    const std::size_t m = a.owners ? a.owners : 2 * a.items;
    manifest.set("items", a.items);
    manifest.set("owners", m);
    manifest.set("exponent", a.exponent);
    manifest.set("cap", a.cap);
    if (manifest_only(manifest)) return kExitOk;
    g = gen_random_conference(a.items, m, DegreeLaw{a.exponent, a.cap}, a.seed);
  }
  emit(a.output, io::format_edge_list(g, nullptr, nullptr, manifest.hash()), manifest);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct PartitionArgs {
  std::string edges;
  std::string method = "greedy";
  std::size_t strong = 1;
  std::uint64_t seed = 0;
  bool map_ids = false;
  std::string mapping_out;
  std::string output;
};

int run_partition(const PartitionArgs& a) {
  cli::RunManifest manifest("partition");
  manifest.add_input("edges", a.edges);
  manifest.set("method", a.method);
  manifest.set("strong", a.strong);
  manifest.set("map_ids", a.map_ids);
  manifest.set_seed(a.seed);
  if (manifest_only(manifest)) return kExitOk;
  if (a.strong < 1) throw Error(ErrorCode::kInvalidArgument, "--strong must be at least 1");

  const io::EdgeList e = io::read_edge_list(a.edges, a.map_ids);
  manifest.lap("read");
  Partition p = Partition::singletons(e.graph);
  if (a.method == "greedy") {
    p = greedy_partition_l(e.graph, a.strong);
  } else if (a.method == "random") {
    if (a.strong == 1) {
      p = random_partition(e.graph, a.seed);
    } else {
      const ReducedGraph reduced = reduce_l_to_1(e.graph, a.strong);
      p = Partition(e.graph, random_partition(reduced.graph, a.seed).blocks());
    }
  } else if (a.method == "bruteforce") {
    p = brute_force_optimal(e.graph, WellnessFunction::comparison_focused(), a.strong);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown partition method '" + a.method + "'");
  }
  manifest.lap("partition");

  ordered_json doc = io::partition_json(p, a.method, a.strong, e.owners, e.items);
  doc["manifest"] = manifest.hash();
  if (!a.mapping_out.empty()) {
    io::write_file_atomic(a.mapping_out, io::id_mapping_json(e.owners, e.items).dump(2) + "\n");
  }
  std::cerr << a.method << " partition: " << p.num_blocks() << " blocks, objective "
            << doc["objective"]["value"].get<double>() << " (comparison), "
            << doc["objectives"]["size"].get<double>() << " (size)\n";
  emit(a.output, doc.dump(2) + "\n", manifest);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct CalibrateArgs {
  std::string edges, scores, reports;
  std::string partition = "greedy";
  std::string mechanism = "partition";
  bool no_fill = false;
  bool map_ids = false;
  std::uint64_t seed = 0;
  std::string output;
};

int run_calibrate(const CalibrateArgs& a) {
  cli::RunManifest manifest("calibrate");
  manifest.add_input("edges", a.edges);
  manifest.add_input("scores", a.scores);
  manifest.add_input("reports", a.reports);
  const bool inline_greedy = a.partition == "greedy";
  if (!inline_greedy) manifest.add_input("partition", a.partition);
  manifest.set("mechanism", a.mechanism);
  manifest.set("partition", inline_greedy ? "greedy" : "file");
  manifest.set("fill", !a.no_fill);
  manifest.set("map_ids", a.map_ids);
  manifest.set_seed(a.seed);
  if (manifest_only(manifest)) return kExitOk;

  const io::EdgeList e = io::read_edge_list(a.edges, a.map_ids);
  const OwnershipGraph& g = e.graph;
  const ScoreVector y = io::parse_scores(io::read_file(a.scores), e.items, a.scores);
  const io::json reports_doc = [&] {
    try {
      return io::json::parse(io::read_file(a.reports));
    } catch (const io::json::parse_error& err) {
      throw Error(ErrorCode::kParse, a.reports + ": " + err.what());
    }
  }();
  ReportProfile reports = io::parse_reports(reports_doc, e.owners, e.items, a.reports);
  for (OwnerId j = 0; j < g.num_owners(); ++j) {
    if (reports.has(j) && g.items_of(j).empty()) {
      warn("owner '" + e.owners.name(j) + "' owns no items; its ranking is ignored");
    }
  }
  std::vector<bool> supplied(g.num_owners());
  for (OwnerId j = 0; j < g.num_owners(); ++j) supplied[j] = reports.has(j);
  if (!a.no_fill) reports = fill_missing_reports(g, reports, a.seed);
  manifest.lap("read");

  MechanismSpec spec;
  spec.kind = parse_mechanism_kind(a.mechanism);
  spec.credentials = OwnerCredentials::uniform(g.num_owners());
  if (spec.kind == MechanismKind::kPartition || spec.kind == MechanismKind::kPersonalized) {
    if (inline_greedy) {
      spec.partition = greedy_partition(g);
    } else {
      spec.partition = io::parse_partition(io::json::parse(io::read_file(a.partition)), g, e.owners, e.items,
                                           a.partition);
    }
    io::complete_mechanism(spec, g);
    const Partition& p = *spec.partition;
    std::vector<bool> used(g.num_owners(), false);
    for (std::size_t k = 0; k < p.num_blocks(); ++k) {
      if (p.block(k).size() < 2) continue;
      for (OwnerId j : p.common_owners(k)) used[j] = true;
    }
    for (OwnerId j = 0; j < g.num_owners(); ++j) {
      if (supplied[j] && !used[j] && !g.items_of(j).empty()) {
        warn("ranking of owner '" + e.owners.name(j) + "' is not used by the partition and is ignored");
      }
    }
    if (spec.kind == MechanismKind::kPartition) {
      for (std::size_t k : mechanism2_detailed(g, p, y, reports, spec.credentials).raw_fallback_blocks) {
        warn("block " + std::to_string(k) + " has no reports from its common owners; raw scores kept");
      }
    }
  } else if (!inline_greedy) {
    warn("--partition is ignored by the " + a.mechanism + " mechanism");
  }
  const ScoreVector adjusted = apply_mechanism(spec, g, y, reports);
  manifest.lap("calibrate");
  emit(a.output, io::format_calibrated(y, adjusted, e.items, manifest.hash()), manifest);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct AuditArgs {
  std::string fixture;
  std::string mechanism;
  bool full_table = false;
  std::size_t draws = 0;
  std::string output;
};

int run_audit(const AuditArgs& a) {
  cli::RunManifest manifest("audit");
  manifest.add_input("fixture", a.fixture);
  if (!a.mechanism.empty()) manifest.set("mechanism", a.mechanism);
  if (a.draws) manifest.set("draws", a.draws);
  manifest.set("full_table", a.full_table);
  if (manifest_only(manifest)) return kExitOk;

  const io::json doc = [&] {
    try {
      return io::json::parse(io::read_file(a.fixture));
    } catch (const io::json::parse_error& err) {
      throw Error(ErrorCode::kParse, a.fixture + ": " + err.what());
    }
  }();
  io::AuditFixture f = io::parse_audit_fixture(doc, a.fixture);
  if (!a.mechanism.empty()) {
    f.mechanism.kind = parse_mechanism_kind(a.mechanism);
    io::complete_mechanism(f.mechanism, f.graph);
  }
  if (a.draws) f.options.mode = ExpectationMode::monte_carlo(a.draws);
  manifest.set_seed(f.noise.seed);
  manifest.lap("read");

  const auto results = io::run_audit(f);
  manifest.lap("audit");
  ordered_json out = io::audit_json(results, f, a.full_table);
  out["manifest"] = manifest.hash();
  for (const AuditResult& r : results) {
    std::cerr << "owner " << r.owner << ": " << (r.truthful_is_best ? "truthful is a best response" : "deviation pays")
              << ", gap " << r.gap << "\n";
  }
  emit(a.output, out.dump(2) + "\n", manifest);
  return io::all_truthful(results) ? kExitOk : kExitNotTruthful;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string preset;
  std::optional<std::size_t> trials, depth, items, L;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma, perception_variance;
  std::string method, edges, scores;
  bool map_ids = false;
  std::string out_dir = ".";
};

int run_simulate(const SimulateArgs& a) {
  cli::RunManifest manifest("simulate");
  io::json raw = io::json::object();
  if (!a.config.empty()) {
    manifest.add_input("config", a.config);
    raw = io::load_config(a.config);
  }
  // Command-line flags override the config file.
  if (!a.preset.empty()) raw["preset"] = a.preset;
  if (a.trials) raw["trials"] = *a.trials;
  if (a.seed) raw["seed"] = *a.seed;
  if (a.sigma) raw["noise"]["sigma"] = *a.sigma;
  if (a.perception_variance) raw["noise"]["perception_variance"] = *a.perception_variance;
  if (a.items) raw["graph"]["items"] = *a.items;
  if (!a.method.empty()) raw["partition"]["method"] = a.method;
  if (a.L) raw["partition"]["L"] = *a.L;
  if (a.depth) raw["tree"]["depth"] = *a.depth;
  if (!a.edges.empty()) {
    raw["graph"]["kind"] = "file";
    raw["graph"]["path"] = a.edges;
  }
  if (a.map_ids) raw["graph"]["map_ids"] = true;
  if (!a.scores.empty()) raw["scores"] = a.scores;
  if (a.sigma && raw.value("preset", "iclr") == "tree") raw["tree"]["sigmas"] = io::json::array({*a.sigma});

  io::SimulateConfig cfg = io::parse_simulate_config(raw);
  ExperimentConfig& ec = cfg.experiment;
  manifest.set("preset", cfg.preset);
  manifest.set("config", ordered_json::parse(raw.dump()));
  manifest.set_seed(ec.seed);
  if (cfg.edges_path) manifest.add_input("edges", *cfg.edges_path);
  if (cfg.scores_path) manifest.add_input("scores", *cfg.scores_path);
  if (manifest_only(manifest)) return kExitOk;

  std::optional<io::EdgeList> edges;
  if (cfg.edges_path) {
    edges = io::read_edge_list(*cfg.edges_path, cfg.map_ids);
    ec.graph.graph = std::make_shared<const OwnershipGraph>(edges->graph);
  }
  if (cfg.scores_path) {
    if (!edges) throw Error(ErrorCode::kInvalidArgument, "config.scores: needs graph.kind = \"file\"");
    ec.scores = io::parse_scores(io::read_file(*cfg.scores_path), edges->items, *cfg.scores_path).vec();
  }
  manifest.lap("read");

  const fs::path dir(a.out_dir);
  const std::string hash = manifest.hash();
  const std::string comment = "# manifest=" + hash + "\r\n";
  if (cfg.preset == "benchmark") {
    const OwnershipGraph g = detail::build_graph(ec.graph, ec.seed);
    std::vector<WellnessFunction> ws;
    for (const std::string& name : cfg.wellness) ws.push_back(io::wellness_by_name(name));
    const auto reports = run_partition_benchmark(g, ws, ec.seed);
    manifest.lap("run");
    ordered_json doc;
    doc["experiment"] = "benchmark";
    doc["seed"] = ec.seed;
    doc["num_items"] = g.num_items();
    doc["num_owners"] = g.num_owners();
    doc["num_edges"] = g.num_edges();
    doc["results"] = ordered_json::array();
    std::string csv = comment + io::csv_row({"method", "wellness", "objective", "num_blocks", "strongness"});
    for (const auto& r : reports) {
      doc["results"].push_back(io::objective_report_json(r));
      csv += io::csv_row({r.method, r.wellness, io::format_double(r.objective_value),
                          std::to_string(r.block_sizes.size()), r.strongness ? std::to_string(*r.strongness) : ""});
    }
    doc["manifest"] = hash;
    io::write_file_atomic(dir / "benchmark.json", doc.dump(2) + "\n");
    io::write_file_atomic(dir / "benchmark.csv", csv);
  } else {
    const MetricsReport report = cfg.preset == "tree"
                                     ? run_tree_tradeoff(cfg.tree_depth, cfg.tree_sigmas, cfg.tree_variances,
                                                         ec.trials, ec.seed)
                                     : run_iclr_style(ec);
    manifest.lap("run");
    ordered_json doc = io::metrics_json(report);
    doc["manifest"] = hash;
    io::write_file_atomic(dir / "metrics.json", doc.dump(2) + "\n");
    io::write_file_atomic(dir / "metrics.csv", comment + io::metrics_csv(report));
    if (cfg.preset == "tree") {
      io::write_file_atomic(dir / "tradeoff.csv", comment + io::tradeoff_csv(report));
      for (double s : cfg.tree_sigmas) {
        for (double v : cfg.tree_variances) {
          std::cerr << "sigma " << s << ", perception variance " << v
                    << ": best L = " << tradeoff_argmin(report, s, v) << "\n";
        }
      }
    } else {
      for (std::size_t k = 1; k < report.methods.size(); ++k) {
        const MethodMetrics& m = report.methods[k];
        std::cerr << m.method << ": MSE " << m.mse_summary.mean << " vs baseline "
                  << report.methods[0].mse_summary.mean << " (" << 100.0 * m.pct_change << "%)\n";
      }
    }
  }
  manifest.lap("total");
  io::write_file_atomic(dir / "run_manifest.json", manifest.with_timings().dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"isocal: isotonic calibration of review scores from owner rankings"};
  app.set_version_flag("--version", cli::kVersion);
  app.add_flag("--manifest-only", g_manifest_only, "Print the run manifest and exit without running");
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate an ownership graph as an edge-list CSV");
  gen_cmd->add_option("kind", gen.kind, "tree, tightness or conference")
      ->required()
      ->check(CLI::IsMember({"tree", "tightness", "conference"}));
  gen_cmd->add_option("--depth", gen.depth, "Tree depth");
  gen_cmd->add_option("--M", gen.M, "Tightness: base owners");
  gen_cmd->add_option("--L", gen.L, "Tightness: strongness level");
  gen_cmd->add_option("--N", gen.N, "Tightness: items per base owner");
  gen_cmd->add_option("--items", gen.items, "Conference: number of items");
  gen_cmd->add_option("--owners", gen.owners, "Conference: number of owners (default 2 x items)");
  gen_cmd->add_option("--exponent", gen.exponent, "Conference: power-law exponent of owner degrees");
  gen_cmd->add_option("--cap", gen.cap, "Conference: maximum owner degree (0 = items)");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("-o,--output", gen.output, "Output CSV (default stdout)");

  PartitionArgs part;
  auto* part_cmd = app.add_subcommand("partition", "Partition items into blocks with common owners");
  part_cmd->add_option("edges", part.edges, "Edge-list CSV")->required();
  part_cmd->add_option("--method", part.method, "greedy, random or bruteforce")
      ->check(CLI::IsMember({"greedy", "random", "bruteforce"}));
  part_cmd->add_option("--strong", part.strong, "Require every multi-item block to have L common owners");
  part_cmd->add_option("--seed", part.seed, "Seed for the random method");
  part_cmd->add_flag("--map-ids", part.map_ids, "Treat ids as opaque strings");
  part_cmd->add_option("--mapping", part.mapping_out, "Write the id mapping sidecar here");
  part_cmd->add_option("-o,--output", part.output, "Output JSON (default stdout)");

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "Adjust scores using owner rankings");
  cal_cmd->add_option("--edges", cal.edges, "Edge-list CSV")->required();
  cal_cmd->add_option("--scores", cal.scores, "Scores CSV")->required();
  cal_cmd->add_option("--reports", cal.reports, "Reports JSON")->required();
  cal_cmd->add_option("--partition", cal.partition, "Partition JSON, or greedy to compute one");
  cal_cmd->add_option("--mechanism", cal.mechanism, "partition, naive or complete")
      ->check(CLI::IsMember({"partition", "naive", "complete", "personalized"}));
  cal_cmd->add_flag("--no-fill", cal.no_fill, "Do not fill missing rankings at random");
  cal_cmd->add_option("--seed", cal.seed, "Seed for filling missing rankings");
  cal_cmd->add_flag("--map-ids", cal.map_ids, "Treat ids as opaque strings");
  cal_cmd->add_option("-o,--output", cal.output, "Output CSV (default stdout)");

  AuditArgs aud;
  auto* aud_cmd = app.add_subcommand("audit", "Check whether truthful reporting is a best response");
  aud_cmd->add_option("fixture", aud.fixture, "Audit fixture JSON")->required();
  aud_cmd->add_option("--mechanism", aud.mechanism, "Override the fixture's mechanism")
      ->check(CLI::IsMember({"partition", "naive", "complete", "personalized"}));
  aud_cmd->add_flag("--full-table", aud.full_table, "Include the utility of every candidate ranking");
  aud_cmd->add_option("--draws", aud.draws, "Use Monte Carlo with this many draws");
  aud_cmd->add_option("-o,--output", aud.output, "Output JSON (default stdout)");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a synthetic experiment");
  sim_cmd->add_option("--config", sim.config, "TOML or JSON config");
  sim_cmd->add_option("--preset", sim.preset, "iclr, tree or benchmark")
      ->check(CLI::IsMember({"iclr", "tree", "benchmark"}));
  sim_cmd->add_option("--trials", sim.trials, "Number of trials");
  sim_cmd->add_option("--seed", sim.seed, "Master seed");
  sim_cmd->add_option("--sigma", sim.sigma, "Review noise standard deviation");
  sim_cmd->add_option("--perception-variance", sim.perception_variance, "Owner perception noise variance");
  sim_cmd->add_option("--depth", sim.depth, "Tree depth");
  sim_cmd->add_option("--items", sim.items, "Number of items for generated graphs");
  sim_cmd->add_option("--method", sim.method, "Partition method");
  sim_cmd->add_option("--L", sim.L, "Strongness of the partition");
  sim_cmd->add_option("--edges", sim.edges, "Use this edge list instead of a generated graph");
  sim_cmd->add_flag("--map-ids", sim.map_ids, "Treat ids as opaque strings");
  sim_cmd->add_option("--scores", sim.scores, "Observed scores for the edge list (ingest mode)");
  sim_cmd->add_option("--out-dir", sim.out_dir, "Directory for metrics files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_cmd->parsed()) return run_gen(gen);
    if (part_cmd->parsed()) return run_partition(part);
    if (cal_cmd->parsed()) return run_calibrate(cal);
    if (aud_cmd->parsed()) return run_audit(aud);
    if (sim_cmd->parsed()) return run_simulate(sim);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
