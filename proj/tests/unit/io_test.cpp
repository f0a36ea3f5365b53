#include <gtest/gtest.h>

#include <filesystem>

#include "isocal/io.hpp"

using namespace isocal;
using namespace isocal::io;

namespace {

std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(ISOCAL_FIXTURE_DIR) / name; }

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.message();
  }
  return {};
}

}  // namespace

TEST(Csv, QuotingAndLineEndings) {
  const auto rows = parse_csv("a,b\r\n\"x,1\",\"say \"\"hi\"\"\"\n\"multi\nline\",z\n\n last,\n");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1].fields, (std::vector<std::string>{"x,1", "say \"hi\""}));
  EXPECT_EQ(rows[2].fields, (std::vector<std::string>{"multi\nline", "z"}));
  EXPECT_EQ(rows[3].line, 6u);
  EXPECT_EQ(rows[3].fields, (std::vector<std::string>{" last", ""}));
  EXPECT_THROW(parse_csv("a,\"open\n"), Error);
  EXPECT_THROW(parse_csv("a,\"x\"y\n"), Error);
}

TEST(Csv, EscapeRoundTrip) {
  const std::vector<std::string> fields{"plain", "with,comma", "with \"quote\"", "new\nline", ""};
  const auto rows = parse_csv(csv_row(fields));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].fields, fields);
}

TEST(Numbers, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 121.0 / 36.0, 6.0}) EXPECT_EQ(*parse_double(format_double(v)), v);
  EXPECT_EQ(format_double(6.0), "6");
  EXPECT_FALSE(parse_double("1.5x"));
  EXPECT_FALSE(parse_double(""));
}

TEST(EdgeList, IntegerIds) {
  const EdgeList e = read_edge_list(fixture("table2_edges.csv"), false);
  EXPECT_EQ(e.graph.num_owners(), 3u);
  EXPECT_EQ(e.graph.num_items(), 3u);
  EXPECT_EQ(e.graph.items_of(2), (ItemSet{1, 2}));
  EXPECT_EQ(parse_edge_list("owner_id,item_id\n0,1\n", false, "e", 4).graph.num_items(), 4u);
}

TEST(EdgeList, MappedIdsInFirstSeenOrder) {
  const EdgeList e = read_edge_list(fixture("named_edges.csv"), true);
  EXPECT_EQ(e.owners.names(), (std::vector<std::string>{"alice", "bob", "carol"}));
  EXPECT_EQ(e.items.names(), (std::vector<std::string>{"paperA", "paper,B", "paperC"}));
  EXPECT_EQ(e.graph.items_of(2), (ItemSet{1, 2}));
  const auto sidecar = id_mapping_json(e.owners, e.items);
  EXPECT_EQ(sidecar["items"][1], "paper,B");
  const IdMap again = IdMap::from_names(sidecar["items"].get<std::vector<std::string>>());
  EXPECT_EQ(again.find("paperC"), std::optional<std::size_t>(2));
}

TEST(EdgeList, ErrorsCarryLineNumbers) {
  EXPECT_NE(error_of([] { parse_edge_list("owner,item\n0,1\n", false, "e"); }).find("e:1: bad header"),
            std::string::npos);
  const std::string dup = error_of([] { parse_edge_list("owner_id,item_id\n0,1\n1,1\n0,1\n", false, "e"); });
  EXPECT_NE(dup.find("e:4: duplicate edge"), std::string::npos) << dup;
  EXPECT_NE(dup.find("line 2"), std::string::npos) << dup;
  EXPECT_NE(error_of([] { parse_edge_list("owner_id,item_id\n0,x\n", false, "e"); }).find("e:2:"),
            std::string::npos);
  EXPECT_NE(error_of([] { parse_edge_list("owner_id,item_id\n0\n", false, "e"); }).find("e:2: expected 2"),
            std::string::npos);
}

TEST(EdgeList, FormatRoundTrip) {
  const EdgeList e = read_edge_list(fixture("named_edges.csv"), true);
  const EdgeList back = parse_edge_list(format_edge_list(e.graph, &e.owners, &e.items), true);
  EXPECT_EQ(back.graph.edges(), e.graph.edges());
  EXPECT_EQ(back.items.names(), e.items.names());
}

TEST(Scores, ReadAndValidate) {
  const EdgeList e = read_edge_list(fixture("named_edges.csv"), true);
  const ScoreVector y = parse_scores(read_file(fixture("named_scores.csv")), e.items);
  EXPECT_EQ(y.vec(), (std::vector<double>{9, 8, 4}));
  EXPECT_THROW(parse_scores("item_id,score\npaperA,1\npaperC,2\n", e.items), Error);  // missing
  EXPECT_THROW(parse_scores("item_id,score\npaperZ,1\n", e.items), Error);             // unknown
  EXPECT_THROW(parse_scores("item_id,score\npaperA,nan\n", e.items), Error);
  const std::string dup = error_of([&] { parse_scores("item_id,score\npaperA,1\npaperA,2\n", e.items, "s"); });
  EXPECT_NE(dup.find("s:3: duplicate"), std::string::npos) << dup;
}

TEST(Reports, ReadAndRoundTrip) {
  const EdgeList e = read_edge_list(fixture("example32_edges.csv"), false);
  const ReportProfile p = parse_reports(json::parse(read_file(fixture("example32_reports.json"))), e.owners, e.items);
  EXPECT_EQ(p.at(2), (Ranking{2, 1}));
  const ReportProfile back = parse_reports(json::parse(reports_json(p, e.owners, e.items).dump()), e.owners, e.items);
  for (OwnerId j = 0; j < 3; ++j) EXPECT_EQ(back.at(j), p.at(j));
  EXPECT_THROW(parse_reports(json::parse(R"([{"owner_id": 7, "ranking": [0]}])"), e.owners, e.items), Error);
  EXPECT_THROW(parse_reports(json::parse(R"([{"owner_id": 0, "ranking": [0, 9]}])"), e.owners, e.items), Error);
  EXPECT_THROW(parse_reports(json::parse(R"([{"owner_id": 0, "ranking": [0, 0]}])"), e.owners, e.items), Error);
  EXPECT_THROW(parse_reports(json::parse(R"([{"owner_id": 0, "ranking": [0]}, {"owner_id": 0, "ranking": [1]}])"),
                             e.owners, e.items),
               Error);
}

TEST(PartitionJson, RoundTrip) {
  const EdgeList e = read_edge_list(fixture("named_edges.csv"), true);
  const Partition p = greedy_partition(e.graph);
  const auto doc = partition_json(p, "greedy", 1, e.owners, e.items);
  EXPECT_EQ(doc["objective"]["name"], "comparison");
  EXPECT_DOUBLE_EQ(doc["objectives"]["comparison"].get<double>(), 5.0);
  EXPECT_DOUBLE_EQ(doc["objectives"]["size"].get<double>(), 1.0);
  EXPECT_EQ(doc["blocks"][0]["owners"][0], "alice");
  const Partition back = parse_partition(json::parse(doc.dump()), e.graph, e.owners, e.items);
  EXPECT_TRUE(back.same_blocks(p));
  EXPECT_EQ(back.blocks(), p.blocks());
}

TEST(PartitionJson, Rejections) {
  const EdgeList e = read_edge_list(fixture("table2_edges.csv"), false);
  EXPECT_THROW(parse_partition(json::parse(R"({"blocks": [[0, 1]]})"), e.graph, e.owners, e.items), Error);
  EXPECT_THROW(parse_partition(json::parse(R"({"blocks": [[0, 1], [1, 2]]})"), e.graph, e.owners, e.items), Error);
  EXPECT_THROW(parse_partition(json::parse(R"({"blocks": [{"items": [0, 1], "owners": [2]}, {"items": [2]}]})"),
                               e.graph, e.owners, e.items),
               Error);
  const Partition ok = parse_partition(json::parse(R"({"blocks": [[2], {"items": [1, 0], "owners": [1, 0]}]})"),
                                       e.graph, e.owners, e.items);
  EXPECT_EQ(ok.canonical_blocks(), (std::vector<ItemSet>{{0, 1}, {2}}));
}

TEST(Calibrated, FormatAndParse) {
  IdMap items(false);
  items.reserve_dense(2);
  const std::string text = format_calibrated(ScoreVector({1.5, 2}), ScoreVector({1.75, 1.75}), items, "sha256:ab");
  EXPECT_EQ(text.rfind("# manifest=sha256:ab\r\n", 0), 0u);
  const auto rows = parse_calibrated(text);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].first, "0");
  EXPECT_EQ(rows[0].second, (std::pair<double, double>{1.5, 1.75}));
}

TEST(Toml, Subset) {
  const json j = parse_toml(R"(
# comment
title = "demo"  # trailing
n = 1_000
x = -2.5e-1
flag = true
list = [1, 2,
        3]   # multi-line
empty = []
lit = 'C:\path'
[a.b]
c = "q\"uote"
d.e = 4
[inline]
t = {k = 1, s = "v"}
)");
  EXPECT_EQ(j["title"], "demo");
  EXPECT_EQ(j["n"], 1000);
  EXPECT_DOUBLE_EQ(j["x"].get<double>(), -0.25);
  EXPECT_EQ(j["flag"], true);
  EXPECT_EQ(j["list"], json::array({1, 2, 3}));
  EXPECT_TRUE(j["empty"].empty());
  EXPECT_EQ(j["lit"], "C:\\path");
  EXPECT_EQ(j["a"]["b"]["c"], "q\"uote");
  EXPECT_EQ(j["a"]["b"]["d"]["e"], 4);
  EXPECT_EQ(j["inline"]["t"]["s"], "v");
}

TEST(Toml, ErrorsNameTheLine) {
  EXPECT_NE(error_of([] { parse_toml("a = 1\nb = \n", "cfg"); }).find("cfg:2:"), std::string::npos);
  EXPECT_NE(error_of([] { parse_toml("a = 1\na = 2\n", "cfg"); }).find("duplicate key"), std::string::npos);
  EXPECT_THROW(parse_toml("s = \"open\n"), Error);
  EXPECT_THROW(parse_toml("[[arr]]\n"), Error);
  EXPECT_THROW(parse_toml("a = 1 2\n"), Error);
}

TEST(AtomicWrite, ReplacesContent) {
  const auto dir = std::filesystem::temp_directory_path() / "isocal_io_test";
  std::filesystem::remove_all(dir);
  const auto path = dir / "sub" / "out.txt";
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  EXPECT_EQ(read_file(path), "second");
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove_all(dir);
}

TEST(AuditFixture, Example32) {
  const AuditFixture f = parse_audit_fixture(json::parse(read_file(fixture("example32.json"))));
  EXPECT_EQ(f.mechanism.kind, MechanismKind::kPartition);
  ASSERT_TRUE(f.mechanism.partition);
  EXPECT_EQ(f.mechanism.partition->canonical_blocks(), (std::vector<ItemSet>{{0, 1}, {2}}));
  EXPECT_TRUE(all_truthful(run_audit(f)));

  AuditFixture naive = f;
  naive.mechanism.kind = MechanismKind::kNaive;
  const auto res = run_audit(naive);
  EXPECT_FALSE(all_truthful(res));
  EXPECT_NEAR(res[2].gap, 1.0 / 3.0, 1e-12);
  const auto doc = audit_json(res, naive, true);
  EXPECT_EQ(doc["truthful_equilibrium"], false);
  EXPECT_EQ(doc["owners"][2]["utility_table"].size(), 2u);
}

TEST(AuditFixture, RemarkFixtures) {
  const AuditFixture f = parse_audit_fixture(json::parse(read_file(fixture("remark61.json"))));
  const auto res = run_audit(f);
  ASSERT_EQ(res.size(), 1u);
  EXPECT_EQ(res[0].owner, 1u);
  EXPECT_NEAR(res[0].truthful_utility, 121.0 / 36.0, 1e-9);
  EXPECT_NEAR(res[0].gap, 5.0 / 36.0, 1e-9);
  EXPECT_EQ(res[0].best_reports.front(), (Ranking{0, 2, 1}));

  const auto printed = run_audit(parse_audit_fixture(json::parse(read_file(fixture("remark61_printed.json")))));
  EXPECT_NEAR(printed[0].truthful_utility, 21.0 / 4.0, 1e-9);
  EXPECT_NEAR(printed[0].gap, 1.0 / 12.0, 1e-9);
}

TEST(AuditFixture, PathPreciseErrors) {
  json doc = json::parse(read_file(fixture("example32.json")));
  doc["noise"] = {{"kind", "gaussian"}, {"sigma", "big"}};
  EXPECT_EQ(error_of([&] { parse_audit_fixture(doc); }), "fixture.noise.sigma: expected a number");
  doc = json::parse(read_file(fixture("example32.json")));
  doc["owners"][2][1] = 5;
  EXPECT_EQ(error_of([&] { parse_audit_fixture(doc); }), "fixture.owners[2]: item 5 out of range");
  doc = json::parse(read_file(fixture("example32.json")));
  doc["utlity"] = 1;
  EXPECT_EQ(error_of([&] { parse_audit_fixture(doc); }), "fixture.utlity: unknown key");
  doc = json::parse(read_file(fixture("example32.json")));
  doc["utility"] = {{"kind", "power"}, {"exponent", 0.5}};
  EXPECT_NE(error_of([&] { parse_audit_fixture(doc); }).find("fixture.utility:"), std::string::npos);
}

TEST(SimulateConfig, FromToml) {
  const SimulateConfig c = parse_simulate_config(load_config(fixture("simulate_small.toml")));
  EXPECT_EQ(c.preset, "iclr");
  EXPECT_EQ(c.experiment.seed, 3u);
  EXPECT_EQ(c.experiment.trials, 3u);
  EXPECT_EQ(c.experiment.graph.num_items, 300u);
  EXPECT_EQ(c.experiment.accept_percents, (std::vector<double>{10, 30}));
  const SimulateConfig t = parse_simulate_config(load_config(fixture("simulate_tree.toml")));
  EXPECT_EQ(t.tree_depth, 4u);
  EXPECT_EQ(t.tree_variances, (std::vector<double>{0.1, 2.0}));
  EXPECT_EQ(parse_simulate_config(json::parse(R"({"preset": "tree"})")).experiment.trials, 20u);
}

TEST(SimulateConfig, SchemaViolations) {
  EXPECT_EQ(error_of([] { parse_simulate_config(json::parse(R"({"noise": {"sigma": "2"}})")); }),
            "config.noise.sigma: expected a number");
  EXPECT_EQ(error_of([] { parse_simulate_config(json::parse(R"({"graph": {"nodes": 3}})")); }),
            "config.graph.nodes: unknown key");
  EXPECT_EQ(error_of([] { parse_simulate_config(json::parse(R"({"tree": {"depth": 12}})")); }),
            "config.tree.depth: must be in 1..8");
  EXPECT_EQ(error_of([] { parse_simulate_config(json::parse(R"({"graph": {"kind": "file"}})")); }),
            "config.graph.path: missing");
  EXPECT_NE(error_of([] { parse_simulate_config(json::parse(R"({"partition": {"method": "best"}})")); })
                .find("config.partition.method:"),
            std::string::npos);
}

TEST(Metrics, JsonAndCsv) {
  ExperimentConfig cfg;
  cfg.graph.num_items = 60;
  cfg.graph.num_owners = 120;
  cfg.trials = 2;
  const MetricsReport r = run_iclr_style(cfg);
  const auto j = metrics_json(r);
  EXPECT_EQ(j["methods"][0]["method"], "baseline");
  EXPECT_FALSE(j["methods"][0].contains("pct_change"));
  EXPECT_TRUE(j["methods"][1].contains("pct_change"));
  const auto rows = parse_csv(metrics_csv(r));
  // header + trials * methods * (mse + one accept metric)
  EXPECT_EQ(rows.size(), 1u + 2u * 3u * 2u);
  const MetricsReport t = run_tree_tradeoff(2, {1.0}, {0.0}, 2, 0);
  EXPECT_EQ(parse_csv(tradeoff_csv(t)).size(), 1u + 3u);
}
