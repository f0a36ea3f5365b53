#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "isocal/error.hpp"
#include "isocal/experiments.hpp"
#include "isocal/incentives.hpp"
#include "isocal/mechanisms.hpp"
#include "isocal/ownership.hpp"
#include "isocal/partition_opt.hpp"

namespace isocal::io {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Text helpers

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<std::size_t> parse_index(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes `content` to a temporary sibling and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kNotFound, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::kNotFound, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::kNotFound, "cannot rename into " + path.string() + ": " + ec.message());
  }
}

// ---------------------------------------------------------------------------
// CSV (RFC 4180)

struct CsvRecord {
  std::size_t line = 0;  // 1-based line on which the record starts
  std::vector<std::string> fields;
};

/// Parses CSV text with quoted fields, doubled quotes, CRLF or LF line ends
/// and newlines inside quotes. Blank lines are skipped. A UTF-8 byte order
/// mark is ignored.
/// With `skip_comments`, lines starting with `#` before the first record are
/// skipped.
inline std::vector<CsvRecord> parse_csv(std::string_view text, const std::string& source = "csv",
                                        bool skip_comments = false) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<CsvRecord> out;
  std::size_t line = 1;
  std::size_t pos = 0;
  while (skip_comments && pos < text.size() && text[pos] == '#') {
    const auto nl = text.find('\n', pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line;
  }
  while (pos < text.size()) {
    CsvRecord rec;
    rec.line = line;
    std::string field;
    bool in_quotes = false, quoted = false, done = false;
    while (!done) {
      if (pos >= text.size()) {
        if (in_quotes) {
          throw Error(ErrorCode::kParse, source + ":" + std::to_string(rec.line) +
                                             ": unterminated quoted field");
        }
        rec.fields.push_back(std::move(field));
        break;
      }
      const char c = text[pos];
      if (in_quotes) {
        if (c == '"') {
          if (pos + 1 < text.size() && text[pos + 1] == '"') {
            field += '"';
            pos += 2;
          } else {
            in_quotes = false;
            ++pos;
          }
        } else {
          if (c == '\n') ++line;
          field += c;
          ++pos;
        }
        continue;
      }
      switch (c) {
        case '"':
          if (!field.empty() || quoted) {
            throw Error(ErrorCode::kParse, source + ":" + std::to_string(line) +
                                               ": stray quote inside unquoted field");
          }
          in_quotes = quoted = true;
          ++pos;
          break;
        case ',':
          rec.fields.push_back(std::move(field));
          field.clear();
          quoted = false;
          ++pos;
          break;
        case '\r':
          ++pos;
          if (pos < text.size() && text[pos] == '\n') ++pos;
          ++line;
          rec.fields.push_back(std::move(field));
          done = true;
          break;
        case '\n':
          ++pos;
          ++line;
          rec.fields.push_back(std::move(field));
          done = true;
          break;
        default:
          if (quoted) {
            throw Error(ErrorCode::kParse, source + ":" + std::to_string(line) +
                                               ": text after closing quote");
          }
          field += c;
          ++pos;
      }
    }
    const bool blank = rec.fields.size() == 1 && rec.fields[0].empty();
    if (!blank) out.push_back(std::move(rec));
  }
  return out;
}

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) out += ',';
    out += csv_escape(fields[k]);
  }
  out += "\r\n";
  return out;
}

// ---------------------------------------------------------------------------
// Identifier mapping

/// External identifiers for owners or items. In integer mode the text of an
/// id is its index. In mapped mode opaque strings get dense indices in
/// first-seen order.
class IdMap {
 public:
  explicit IdMap(bool mapped = false) : mapped_(mapped) {}

  static IdMap from_names(std::vector<std::string> names) {
    IdMap m(true);
    for (auto& s : names) m.intern(s);
    return m;
  }

  bool mapped() const noexcept { return mapped_; }
  std::size_t size() const noexcept { return mapped_ ? names_.size() : count_; }

  std::string name(std::size_t i) const { return mapped_ ? names_.at(i) : std::to_string(i); }

  std::optional<std::size_t> find(const std::string& id) const {
    if (!mapped_) {
      const auto v = parse_index(id);
      if (!v || *v >= count_) return std::nullopt;
      return v;
    }
    const auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Index for `id`, adding it if new. Throws in integer mode when `id` is
  /// not a nonnegative integer.
  std::size_t intern(const std::string& id) {
    if (!mapped_) {
      const auto v = parse_index(id);
      if (!v) throw Error(ErrorCode::kParse, "id '" + id + "' is not a nonnegative integer");
      count_ = std::max(count_, *v + 1);
      return *v;
    }
    const auto [it, inserted] = index_.try_emplace(id, names_.size());
    if (inserted) names_.push_back(id);
    return it->second;
  }

  /// Integer mode only: make sure indices below `n` are valid.
  void reserve_dense(std::size_t n) {
    if (!mapped_) count_ = std::max(count_, n);
  }

  /// JSON id: a number in integer mode, the original string otherwise.
  ordered_json to_json(std::size_t i) const { return mapped_ ? ordered_json(names_.at(i)) : ordered_json(i); }

  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  bool mapped_;
  std::size_t count_ = 0;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline std::string id_text(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return std::to_string(v.get<std::int64_t>());
  throw Error(ErrorCode::kParse, where + ": expected a nonnegative integer or string id");
}

// ---------------------------------------------------------------------------
// Edge lists

struct EdgeList {
  OwnershipGraph graph;
  IdMap owners;
  IdMap items;
};

/// Reads `owner_id,item_id` rows. Integer ids are used as indices unless
/// `map_ids` is set, in which case any strings are accepted and mapped in
/// first-seen order. `min_items` pads the item range in integer mode.
inline EdgeList parse_edge_list(std::string_view text, bool map_ids, const std::string& source = "edges",
                                std::size_t min_items = 0) {
  const auto records = parse_csv(text, source, true);
  if (records.empty()) throw Error(ErrorCode::kParse, source + ": empty file, expected header owner_id,item_id");
  const auto& header = records.front();
  if (header.fields.size() != 2 || header.fields[0] != "owner_id" || header.fields[1] != "item_id") {
    throw Error(ErrorCode::kParse, source + ":" + std::to_string(header.line) +
                                       ": bad header, expected owner_id,item_id");
  }
  EdgeList out{{}, IdMap(map_ids), IdMap(map_ids)};
  out.items.reserve_dense(min_items);
  std::vector<Edge> edges;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> first_line;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const CsvRecord& rec = records[r];
    const std::string where = source + ":" + std::to_string(rec.line);
    if (rec.fields.size() != 2) {
      throw Error(ErrorCode::kParse, where + ": expected 2 fields, got " + std::to_string(rec.fields.size()));
    }
    for (const std::string& f : rec.fields) {
      if (f.empty()) throw Error(ErrorCode::kParse, where + ": empty id");
    }
    std::size_t owner = 0, item = 0;
    try {
      owner = out.owners.intern(rec.fields[0]);
      item = out.items.intern(rec.fields[1]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, where + ": " + e.message() + " (use id mapping for opaque ids)");
    }
    const auto [it, inserted] = first_line.try_emplace({owner, item}, rec.line);
    if (!inserted) {
      throw Error(ErrorCode::kParse, where + ": duplicate edge (" + rec.fields[0] + ", " + rec.fields[1] +
                                         "), first seen on line " + std::to_string(it->second));
    }
    edges.push_back({owner, item});
  }
  out.graph = OwnershipGraph(out.owners.size(), out.items.size(), std::move(edges));
  return out;
}

inline EdgeList read_edge_list(const std::filesystem::path& path, bool map_ids, std::size_t min_items = 0) {
  return parse_edge_list(read_file(path), map_ids, path.string(), min_items);
}

inline std::string format_edge_list(const OwnershipGraph& g, const IdMap* owners = nullptr,
                                    const IdMap* items = nullptr, const std::string& manifest_hash = {}) {
  std::string out;
  if (!manifest_hash.empty()) out += "# manifest=" + manifest_hash + "\r\n";
  out += csv_row({"owner_id", "item_id"});
  for (const Edge& e : g.edges()) {
    out += csv_row({owners ? owners->name(e.owner) : std::to_string(e.owner),
                    items ? items->name(e.item) : std::to_string(e.item)});
  }
  return out;
}

/// Sidecar describing the mapping from dense indices back to original ids.
inline ordered_json id_mapping_json(const IdMap& owners, const IdMap& items) {
  ordered_json j;
  j["owners"] = owners.names();
  j["items"] = items.names();
  return j;
}

// ---------------------------------------------------------------------------
// Scores

/// Reads `item_id,score` rows into a dense vector indexed like `items`.
/// Every item must have exactly one score.
inline ScoreVector parse_scores(std::string_view text, const IdMap& items, const std::string& source = "scores") {
  const auto records = parse_csv(text, source, true);
  if (records.empty() || records[0].fields != std::vector<std::string>{"item_id", "score"}) {
    throw Error(ErrorCode::kParse, source + ":1: bad header, expected item_id,score");
  }
  const std::size_t n = items.size();
  std::vector<double> v(n, 0.0);
  std::vector<std::size_t> seen(n, 0);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const CsvRecord& rec = records[r];
    const std::string where = source + ":" + std::to_string(rec.line);
    if (rec.fields.size() != 2) throw Error(ErrorCode::kParse, where + ": expected 2 fields");
    const auto i = items.find(rec.fields[0]);
    if (!i) throw Error(ErrorCode::kNotFound, where + ": unknown item '" + rec.fields[0] + "'");
    const auto s = parse_double(rec.fields[1]);
    if (!s || !std::isfinite(*s)) throw Error(ErrorCode::kParse, where + ": score is not a finite number");
    if (seen[*i]) {
      throw Error(ErrorCode::kParse, where + ": duplicate score for item '" + rec.fields[0] +
                                         "', first given on line " + std::to_string(seen[*i]));
    }
    seen[*i] = rec.line;
    v[*i] = *s;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) throw Error(ErrorCode::kNotFound, source + ": score missing for item '" + items.name(i) + "'");
  }
  return ScoreVector(std::move(v));
}

inline std::string format_scores(const ScoreVector& y, const IdMap* items = nullptr) {
  std::string out = csv_row({"item_id", "score"});
  for (std::size_t i = 0; i < y.size(); ++i) {
    out += csv_row({items ? items->name(i) : std::to_string(i), format_double(y[i])});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

/// Reads `[{"owner_id": ..., "ranking": [...]}, ...]`.
inline ReportProfile parse_reports(const json& doc, const IdMap& owners, const IdMap& items,
                                   const std::string& source = "reports") {
  if (!doc.is_array()) throw Error(ErrorCode::kParse, source + ": expected a JSON array");
  ReportProfile p(owners.size());
  for (std::size_t k = 0; k < doc.size(); ++k) {
    const json& e = doc[k];
    const std::string where = source + "[" + std::to_string(k) + "]";
    if (!e.is_object() || !e.contains("owner_id") || !e.contains("ranking")) {
      throw Error(ErrorCode::kParse, where + ": expected {\"owner_id\", \"ranking\"}");
    }
    const std::string oid = id_text(e["owner_id"], where + ".owner_id");
    const auto j = owners.find(oid);
    if (!j) throw Error(ErrorCode::kNotFound, where + ".owner_id: unknown owner '" + oid + "'");
    if (p.has(*j)) throw Error(ErrorCode::kParse, where + ": second report for owner '" + oid + "'");
    if (!e["ranking"].is_array()) throw Error(ErrorCode::kParse, where + ".ranking: expected an array");
    std::vector<std::size_t> order;
    for (std::size_t t = 0; t < e["ranking"].size(); ++t) {
      const std::string at = where + ".ranking[" + std::to_string(t) + "]";
      const std::string iid = id_text(e["ranking"][t], at);
      const auto i = items.find(iid);
      if (!i) throw Error(ErrorCode::kNotFound, at + ": unknown item '" + iid + "'");
      order.push_back(*i);
    }
    try {
      p.set(*j, Ranking(std::move(order)));
    } catch (const Error& err) {
      throw Error(err.code(), where + ".ranking: " + err.message());
    }
  }
  return p;
}

inline ordered_json reports_json(const ReportProfile& p, const IdMap& owners, const IdMap& items) {
  ordered_json out = ordered_json::array();
  for (OwnerId j = 0; j < p.num_owners(); ++j) {
    if (!p.has(j)) continue;
    ordered_json r;
    r["owner_id"] = owners.to_json(j);
    r["ranking"] = ordered_json::array();
    for (std::size_t i : p.at(j).order()) r["ranking"].push_back(items.to_json(i));
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Partitions

inline ordered_json partition_json(const Partition& p, const std::string& method, std::optional<std::size_t> strong,
                                   const IdMap& owners, const IdMap& items) {
  ordered_json out;
  out["method"] = method;
  if (strong) out["strong"] = *strong;
  out["num_items"] = p.num_items();
  out["blocks"] = ordered_json::array();
  for (std::size_t k = 0; k < p.num_blocks(); ++k) {
    ordered_json b;
    b["items"] = ordered_json::array();
    for (ItemId i : p.block(k)) b["items"].push_back(items.to_json(i));
    b["owners"] = ordered_json::array();
    for (OwnerId j : p.common_owners(k)) b["owners"].push_back(owners.to_json(j));
    out["blocks"].push_back(std::move(b));
  }
  const WellnessFunction cmp = WellnessFunction::comparison_focused();
  const WellnessFunction size = WellnessFunction::size_focused();
  out["objective"] = {{"name", cmp.name}, {"value", objective(p, cmp)}};
  out["objectives"] = {{cmp.name, objective(p, cmp)}, {size.name, objective(p, size)}};
  const auto s = strongness_of(p);
  out["strongness"] = s ? ordered_json(*s) : ordered_json(nullptr);
  return out;
}

/// Rebuilds a partition from its JSON form. Common owners listed in the file
/// must agree with the graph.
inline Partition parse_partition(const json& doc, const OwnershipGraph& g, const IdMap& owners,
                                 const IdMap& items, const std::string& source = "partition") {
  if (!doc.is_object() || !doc.contains("blocks") || !doc["blocks"].is_array()) {
    throw Error(ErrorCode::kParse, source + ": expected an object with a \"blocks\" array");
  }
  std::vector<ItemSet> blocks;
  std::vector<std::optional<OwnerSet>> listed;
  for (std::size_t k = 0; k < doc["blocks"].size(); ++k) {
    const json& b = doc["blocks"][k];
    const std::string where = source + ".blocks[" + std::to_string(k) + "]";
    const json* arr = &b;
    if (b.is_object()) {
      if (!b.contains("items")) throw Error(ErrorCode::kParse, where + ": missing \"items\"");
      arr = &b["items"];
    }
    if (!arr->is_array()) throw Error(ErrorCode::kParse, where + ".items: expected an array");
    ItemSet block;
    for (std::size_t t = 0; t < arr->size(); ++t) {
      const std::string at = where + ".items[" + std::to_string(t) + "]";
      const std::string id = id_text((*arr)[t], at);
      const auto i = items.find(id);
      if (!i) throw Error(ErrorCode::kNotFound, at + ": unknown item '" + id + "'");
      block.push_back(*i);
    }
    blocks.push_back(std::move(block));
    if (b.is_object() && b.contains("owners")) {
      OwnerSet os;
      for (std::size_t t = 0; t < b["owners"].size(); ++t) {
        const std::string at = where + ".owners[" + std::to_string(t) + "]";
        const std::string id = id_text(b["owners"][t], at);
        const auto j = owners.find(id);
        if (!j) throw Error(ErrorCode::kNotFound, at + ": unknown owner '" + id + "'");
        os.push_back(*j);
      }
      std::sort(os.begin(), os.end());
      listed.emplace_back(std::move(os));
    } else {
      listed.emplace_back();
    }
  }
  Partition p = [&] {
    try {
      return Partition(g, blocks);
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, source + ": " + e.message());
    }
  }();
  for (std::size_t k = 0; k < listed.size(); ++k) {
    if (listed[k] && *listed[k] != p.common_owners(k)) {
      throw Error(ErrorCode::kParse, source + ".blocks[" + std::to_string(k) +
                                         "].owners: does not match the common owners in the graph");
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Calibrated scores

inline std::string format_calibrated(const ScoreVector& raw, const ScoreVector& adjusted, const IdMap& items,
                                     const std::string& manifest_hash = {}) {
  std::string out;
  if (!manifest_hash.empty()) out += "# manifest=" + manifest_hash + "\r\n";
  out += csv_row({"item_id", "raw", "adjusted"});
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out += csv_row({items.name(i), format_double(raw[i]), format_double(adjusted[i])});
  }
  return out;
}

/// Reads `item_id,raw,adjusted`, skipping leading `#` comment lines.
inline std::vector<std::pair<std::string, std::pair<double, double>>> parse_calibrated(std::string_view text) {
  const auto records = parse_csv(text, "calibrated", true);
  if (records.empty() || records[0].fields != std::vector<std::string>{"item_id", "raw", "adjusted"}) {
    throw Error(ErrorCode::kParse, "calibrated: bad header, expected item_id,raw,adjusted");
  }
  std::vector<std::pair<std::string, std::pair<double, double>>> out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r].fields;
    const auto a = f.size() == 3 ? parse_double(f[1]) : std::nullopt;
    const auto b = f.size() == 3 ? parse_double(f[2]) : std::nullopt;
    if (!a || !b) throw Error(ErrorCode::kParse, "calibrated:" + std::to_string(records[r].line) + ": bad row");
    out.push_back({f[0], {*a, *b}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// TOML subset

namespace detail {

class TomlParser {
 public:
  TomlParser(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

  json parse() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_ws_comments_newlines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        if (peek() == '[') fail("arrays of tables are not supported");
        const auto path = parse_key_path();
        skip_inline_ws();
        expect(']');
        table = &descend(root, path, true);
      } else {
        const auto path = parse_key_path();
        skip_inline_ws();
        expect('=');
        skip_inline_ws();
        json value = parse_value();
        json* target = table;
        for (std::size_t k = 0; k + 1 < path.size(); ++k) target = &child_table(*target, path[k]);
        if (target->contains(path.back())) fail("duplicate key '" + path.back() + "'");
        (*target)[path.back()] = std::move(value);
      }
      end_of_line();
    }
    return root;
  }

 private:
  std::string_view text_;
  std::string source_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::kParse, source_ + ":" + std::to_string(line_) + ": " + msg);
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_inline_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }

  void skip_ws_comments_newlines() {
    while (!eof()) {
      skip_inline_ws();
      skip_comment();
      if (peek() == '\r') ++pos_;
      if (peek() == '\n') {
        ++pos_;
        ++line_;
        continue;
      }
      break;
    }
  }

  void end_of_line() {
    skip_inline_ws();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (eof()) return;
    if (peek() != '\n') fail("unexpected text after value");
    ++pos_;
    ++line_;
  }

  std::string parse_key() {
    skip_inline_ws();
    if (peek() == '"' || peek() == '\'') return parse_string();
    std::string key;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) {
      key += text_[pos_++];
    }
    if (key.empty()) fail("expected a key");
    return key;
  }

  std::vector<std::string> parse_key_path() {
    std::vector<std::string> path{parse_key()};
    skip_inline_ws();
    while (peek() == '.') {
      ++pos_;
      path.push_back(parse_key());
      skip_inline_ws();
    }
    return path;
  }

  json& child_table(json& parent, const std::string& key) {
    if (!parent.contains(key)) parent[key] = json::object();
    json& c = parent[key];
    if (!c.is_object()) fail("key '" + key + "' is not a table");
    return c;
  }

  json& descend(json& root, const std::vector<std::string>& path, bool) {
    json* t = &root;
    for (const auto& k : path) t = &child_table(*t, k);
    return *t;
  }

  std::string parse_string() {
    const char q = text_[pos_++];
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = text_[pos_++];
      if (c == q) break;
      if (c == '\\' && q == '"') {
        if (eof()) fail("unterminated escape");
        const char e = text_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case '\\': out += '\\'; break;
          case '"': out += '"'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  json parse_value() {
    const char c = peek();
    if (c == '"' || c == '\'') return parse_string();
    if (c == '[') return parse_array();
    if (c == '{') return parse_inline_table();
    std::string tok;
    while (!eof() && peek() != ',' && peek() != ']' && peek() != '}' && peek() != '#' && peek() != '\n' &&
           peek() != '\r' && peek() != ' ' && peek() != '\t') {
      tok += text_[pos_++];
    }
    if (tok == "true") return true;
    if (tok == "false") return false;
    std::string digits;
    for (char d : tok) {
      if (d != '_') digits += d;
    }
    if (!digits.empty() && digits.find_first_of(".eE") == std::string::npos && digits != "inf" && digits != "nan") {
      std::int64_t v = 0;
      std::string_view sv = digits;
      if (sv.front() == '+') sv.remove_prefix(1);
      const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), v);
      if (res.ec == std::errc() && res.ptr == sv.data() + sv.size()) return v;
    }
    if (const auto d = parse_double(digits); d && std::isfinite(*d)) return *d;
    fail("cannot parse value '" + tok + "'");
  }

  json parse_array() {
    expect('[');
    json arr = json::array();
    while (true) {
      skip_ws_comments_newlines();
      if (peek() == ']') {
        ++pos_;
        return arr;
      }
      arr.push_back(parse_value());
      skip_ws_comments_newlines();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() != ']') fail("expected ',' or ']' in array");
    }
  }

  json parse_inline_table() {
    expect('{');
    json t = json::object();
    skip_inline_ws();
    if (peek() == '}') {
      ++pos_;
      return t;
    }
    while (true) {
      const auto path = parse_key_path();
      skip_inline_ws();
      expect('=');
      skip_inline_ws();
      json* target = &t;
      for (std::size_t k = 0; k + 1 < path.size(); ++k) target = &child_table(*target, path[k]);
      (*target)[path.back()] = parse_value();
      skip_inline_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect('}');
      return t;
    }
  }
};

}  // namespace detail

/// Parses the TOML subset used for configs: tables, dotted keys, basic and
/// literal strings, integers, floats, booleans, arrays and inline tables.
inline json parse_toml(std::string_view text, const std::string& source = "config") {
  return detail::TomlParser(text, source).parse();
}

/// Loads a config from TOML or JSON, chosen by file extension.
inline json load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  if (path.extension() == ".json") {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
    }
  }
  return parse_toml(text, path.string());
}

// ---------------------------------------------------------------------------
// Metrics

inline ordered_json summary_json(const Summary& s) { return {{"mean", s.mean}, {"stderr", s.stderr_}}; }

inline ordered_json method_json(const MethodMetrics& m, bool baseline) {
  ordered_json j;
  j["method"] = m.method;
  j["mse"] = summary_json(m.mse_summary);
  j["mse_per_trial"] = m.mse;
  if (!baseline) {
    j["pct_change"] = m.pct_change;
    j["pct_change_per_trial"] = summary_json(m.pct_change_per_trial);
  }
  ordered_json acc = ordered_json::object();
  for (const auto& [pct, s] : m.accept_summary) {
    ordered_json a = summary_json(s);
    a["per_trial"] = m.accept.at(pct);
    acc["@" + format_double(pct)] = std::move(a);
  }
  if (!acc.empty()) j["accept_accuracy"] = std::move(acc);
  return j;
}

inline ordered_json metrics_json(const MetricsReport& r) {
  ordered_json j;
  j["experiment"] = r.experiment;
  j["seed"] = r.seed;
  j["trials"] = r.trials;
  j["parameters"] = ordered_json::object();
  for (const auto& [k, v] : r.parameters) j["parameters"][k] = v;
  if (!r.methods.empty()) {
    j["methods"] = ordered_json::array();
    for (std::size_t k = 0; k < r.methods.size(); ++k) j["methods"].push_back(method_json(r.methods[k], k == 0));
  }
  if (!r.sweep.empty()) {
    j["sweep"] = ordered_json::array();
    for (const SweepCell& c : r.sweep) {
      ordered_json row;
      row["sigma"] = c.sigma;
      row["perception_variance"] = c.perception_variance;
      row["L"] = c.L;
      ordered_json m = method_json(c.metrics, c.L == 0);
      m.erase("method");
      row["metrics"] = std::move(m);
      j["sweep"].push_back(std::move(row));
    }
  }
  return j;
}

/// One row per (cell, method, trial, metric) for plotting elsewhere.
inline std::string metrics_csv(const MetricsReport& r) {
  std::string out = csv_row({"experiment", "sigma", "perception_variance", "L", "method", "trial", "metric", "value"});
  auto emit = [&](double sigma, double pv, const std::string& L, const MethodMetrics& m) {
    for (std::size_t t = 0; t < m.mse.size(); ++t) {
      out += csv_row({r.experiment, format_double(sigma), format_double(pv), L, m.method, std::to_string(t), "mse",
                      format_double(m.mse[t])});
      for (const auto& [pct, vals] : m.accept) {
        out += csv_row({r.experiment, format_double(sigma), format_double(pv), L, m.method, std::to_string(t),
                        "accept@" + format_double(pct), format_double(vals[t])});
      }
    }
  };
  const auto param = [&](const char* k) {
    const auto it = r.parameters.find(k);
    return it == r.parameters.end() ? 0.0 : it->second;
  };
  for (const MethodMetrics& m : r.methods) {
    emit(param("sigma"), param("perception_variance"), format_double(param("L")), m);
  }
  for (const SweepCell& c : r.sweep) emit(c.sigma, c.perception_variance, std::to_string(c.L), c.metrics);
  return out;
}

/// Mean MSE per (sigma, perception variance, L): the tradeoff curve.
inline std::string tradeoff_csv(const MetricsReport& r) {
  std::string out = csv_row({"sigma", "perception_variance", "L", "mse_mean", "mse_stderr"});
  for (const SweepCell& c : r.sweep) {
    out += csv_row({format_double(c.sigma), format_double(c.perception_variance), std::to_string(c.L),
                    format_double(c.metrics.mse_summary.mean), format_double(c.metrics.mse_summary.stderr_)});
  }
  return out;
}

inline ordered_json objective_report_json(const PartitionObjectiveReport& r) {
  ordered_json j;
  j["method"] = r.method;
  j["wellness"] = r.wellness;
  j["objective"] = r.objective_value;
  j["num_blocks"] = r.block_sizes.size();
  j["strongness"] = r.strongness ? ordered_json(*r.strongness) : ordered_json(nullptr);
  return j;
}

// ---------------------------------------------------------------------------
// Checked access into JSON documents. Paths in messages look like
// `config.noise.sigma`.

namespace detail {

inline const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw Error(ErrorCode::kParse, path + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::kParse, path + "." + key + ": missing");
  return *it;
}

inline void allow_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& path) {
  if (!obj.is_object()) throw Error(ErrorCode::kParse, path + ": expected an object");
  for (const auto& [k, v] : obj.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) throw Error(ErrorCode::kParse, path + "." + k + ": unknown key");
  }
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw Error(ErrorCode::kParse, path + ": expected a number");
  return v.get<double>();
}

inline std::size_t as_count(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::size_t>(v.get<std::int64_t>());
  throw Error(ErrorCode::kParse, path + ": expected a nonnegative integer");
}

inline std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw Error(ErrorCode::kParse, path + ": expected a string");
  return v.get<std::string>();
}

inline bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw Error(ErrorCode::kParse, path + ": expected true or false");
  return v.get<bool>();
}

inline std::vector<double> as_numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw Error(ErrorCode::kParse, path + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_number(v[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

inline std::vector<std::size_t> as_counts(const json& v, const std::string& path) {
  if (!v.is_array()) throw Error(ErrorCode::kParse, path + ": expected an array of integers");
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_count(v[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

inline std::vector<ItemSet> as_item_sets(const json& v, std::size_t n, const std::string& path) {
  if (!v.is_array()) throw Error(ErrorCode::kParse, path + ": expected an array of item arrays");
  std::vector<ItemSet> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::string at = path + "[" + std::to_string(k) + "]";
    ItemSet s = as_counts(v[k], at);
    for (ItemId i : s) {
      if (i >= n) throw Error(ErrorCode::kParse, at + ": item " + std::to_string(i) + " out of range");
    }
    out.push_back(std::move(s));
  }
  return out;
}

template <class T>
T at_path(const std::string& path, auto&& make) {
  try {
    return make();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw;
    throw Error(e.code(), path + ": " + e.message());
  }
}

}  // namespace detail

inline UtilityModel parse_utility(const json& v, const std::string& path) {
  const std::string kind = detail::as_string(detail::field(v, "kind", path), path + ".kind");
  return detail::at_path<UtilityModel>(path, [&] {
    if (kind == "hinge") {
      detail::allow_keys(v, {"kind", "threshold"}, path);
      return UtilityModel::hinge(detail::as_number(detail::field(v, "threshold", path), path + ".threshold"));
    }
    if (kind == "power") {
      detail::allow_keys(v, {"kind", "exponent"}, path);
      return UtilityModel::power(detail::as_number(detail::field(v, "exponent", path), path + ".exponent"));
    }
    if (kind == "piecewise_linear") {
      detail::allow_keys(v, {"kind", "breakpoints", "slopes"}, path);
      return UtilityModel::piecewise_linear(
          detail::as_numbers(detail::field(v, "breakpoints", path), path + ".breakpoints"),
          detail::as_numbers(detail::field(v, "slopes", path), path + ".slopes"));
    }
    if (kind == "linear") {
      detail::allow_keys(v, {"kind"}, path);
      return UtilityModel::linear();
    }
    throw Error(ErrorCode::kParse, path + ".kind: unknown utility '" + kind + "'");
  });
}

inline ordered_json utility_json(const UtilityModel& u) {
  switch (u.kind()) {
    case UtilityModel::Kind::kHinge: return {{"kind", "hinge"}, {"threshold", u.threshold()}};
    case UtilityModel::Kind::kPower: return {{"kind", "power"}, {"exponent", u.exponent()}};
    case UtilityModel::Kind::kPiecewiseLinear:
      return {{"kind", "piecewise_linear"}, {"breakpoints", u.breakpoints()}, {"slopes", u.slopes()}};
  }
  return {};
}

/// `"none"`, or an object with kind none, exchangeable, gaussian or empirical.
inline NoiseModel parse_noise(const json& v, std::size_t n, const std::string& path) {
  if (v.is_string() && v.get<std::string>() == "none") return NoiseModel::none(n);
  const std::string kind = detail::as_string(detail::field(v, "kind", path), path + ".kind");
  const auto seed = [&] { return v.contains("seed") ? detail::as_count(v["seed"], path + ".seed") : 0; };
  if (kind == "none") {
    detail::allow_keys(v, {"kind"}, path);
    return NoiseModel::none(n);
  }
  if (kind == "exchangeable") {
    detail::allow_keys(v, {"kind", "base", "seed"}, path);
    auto base = detail::as_numbers(detail::field(v, "base", path), path + ".base");
    if (base.size() != n) throw Error(ErrorCode::kParse, path + ".base: expected " + std::to_string(n) + " values");
    return NoiseModel::exchangeable(std::move(base), seed());
  }
  if (kind == "gaussian") {
    detail::allow_keys(v, {"kind", "sigma", "seed"}, path);
    const double sigma = detail::as_number(detail::field(v, "sigma", path), path + ".sigma");
    if (!(sigma >= 0.0)) throw Error(ErrorCode::kParse, path + ".sigma: must be >= 0");
    return NoiseModel::gaussian(sigma, seed());
  }
  if (kind == "empirical") {
    detail::allow_keys(v, {"kind", "samples", "seed"}, path);
    const json& s = detail::field(v, "samples", path);
    if (!s.is_array() || s.empty()) throw Error(ErrorCode::kParse, path + ".samples: expected a nonempty array");
    std::vector<std::vector<double>> samples;
    for (std::size_t k = 0; k < s.size(); ++k) {
      const std::string at = path + ".samples[" + std::to_string(k) + "]";
      samples.push_back(detail::as_numbers(s[k], at));
      if (samples.back().size() != n) throw Error(ErrorCode::kParse, at + ": expected " + std::to_string(n) + " values");
    }
    return NoiseModel::empirical(std::move(samples), seed());
  }
  throw Error(ErrorCode::kParse, path + ".kind: unknown noise '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Audit fixtures

struct AuditFixture {
  OwnershipGraph graph;
  ScoreVector truth{std::vector<double>{0.0}};
  NoiseModel noise;
  std::vector<UtilityModel> utilities;
  MechanismSpec mechanism;
  AuditOptions options;
};

/// Fills in the default partition (greedy) or weights when the chosen
/// mechanism needs them and the fixture gave none.
inline void complete_mechanism(MechanismSpec& spec, const OwnershipGraph& g) {
  if (spec.kind == MechanismKind::kPartition && !spec.partition) spec.partition = greedy_partition(g);
  if (spec.kind == MechanismKind::kPersonalized && !spec.params) {
    spec.params = encode_partition(g, spec.partition ? *spec.partition : greedy_partition(g));
  }
}

inline AuditFixture parse_audit_fixture(const json& doc, const std::string& path = "fixture") {
  detail::allow_keys(doc,
                     {"description", "mechanism", "items", "owners", "credentials", "true_scores", "noise", "utility",
                      "utilities", "partition", "params", "forced", "tolerance", "expectation"},
                     path);
  const std::size_t n = detail::as_count(detail::field(doc, "items", path), path + ".items");
  if (n == 0) throw Error(ErrorCode::kParse, path + ".items: must be positive");
  AuditFixture f;
  f.graph = OwnershipGraph::from_item_sets(n, detail::as_item_sets(detail::field(doc, "owners", path), n, path + ".owners"));
  const std::size_t m = f.graph.num_owners();

  auto truth = detail::as_numbers(detail::field(doc, "true_scores", path), path + ".true_scores");
  if (truth.size() != n) throw Error(ErrorCode::kParse, path + ".true_scores: expected " + std::to_string(n) + " values");
  f.truth = ScoreVector(std::move(truth));
  f.noise = doc.contains("noise") ? parse_noise(doc["noise"], n, path + ".noise") : NoiseModel::none(n);

  if (doc.contains("utilities")) {
    const json& us = doc["utilities"];
    if (!us.is_array() || us.size() != m) {
      throw Error(ErrorCode::kParse, path + ".utilities: expected one utility per owner");
    }
    for (std::size_t j = 0; j < m; ++j) f.utilities.push_back(parse_utility(us[j], path + ".utilities[" + std::to_string(j) + "]"));
  } else {
    const UtilityModel u = parse_utility(detail::field(doc, "utility", path), path + ".utility");
    f.utilities.assign(m, u);
  }

  f.mechanism.kind = detail::at_path<MechanismKind>(path + ".mechanism", [&] {
    return parse_mechanism_kind(doc.contains("mechanism") ? detail::as_string(doc["mechanism"], path + ".mechanism")
                                                           : std::string("partition"));
  });
  if (doc.contains("credentials")) {
    f.mechanism.credentials = {detail::as_numbers(doc["credentials"], path + ".credentials")};
    detail::at_path<int>(path + ".credentials", [&] {
      f.mechanism.credentials.validate(m);
      return 0;
    });
  } else {
    f.mechanism.credentials = OwnerCredentials::uniform(m);
  }
  if (doc.contains("partition")) {
    const auto blocks = detail::as_item_sets(doc["partition"], n, path + ".partition");
    f.mechanism.partition = detail::at_path<Partition>(path + ".partition", [&] { return Partition(f.graph, blocks); });
  }
  if (doc.contains("params")) {
    const json& pj = doc["params"];
    const std::string pp = path + ".params";
    detail::allow_keys(pj, {"blocks", "beta"}, pp);
    Mech3Params params;
    params.num_items = n;
    const json& bj = detail::field(pj, "blocks", pp);
    const json& wj = detail::field(pj, "beta", pp);
    if (!bj.is_array() || bj.size() != m || !wj.is_array() || wj.size() != m) {
      throw Error(ErrorCode::kParse, pp + ": expected blocks and beta for every owner");
    }
    for (std::size_t j = 0; j < m; ++j) {
      params.blocks.push_back(detail::as_item_sets(bj[j], n, pp + ".blocks[" + std::to_string(j) + "]"));
      params.beta.push_back(detail::as_numbers(wj[j], pp + ".beta[" + std::to_string(j) + "]"));
    }
    detail::at_path<int>(pp, [&] {
      params.validate(f.graph);
      return 0;
    });
    f.mechanism.params = std::move(params);
  }
  complete_mechanism(f.mechanism, f.graph);

  if (doc.contains("tolerance")) f.options.tolerance = detail::as_number(doc["tolerance"], path + ".tolerance");
  if (doc.contains("expectation")) {
    const json& e = doc["expectation"];
    if (e.is_string() && e.get<std::string>() == "exact") {
      f.options.mode = ExpectationMode::exact_mode();
    } else {
      detail::allow_keys(e, {"draws"}, path + ".expectation");
      const std::size_t draws = detail::as_count(detail::field(e, "draws", path + ".expectation"), path + ".expectation.draws");
      if (draws == 0) throw Error(ErrorCode::kParse, path + ".expectation.draws: must be positive");
      f.options.mode = ExpectationMode::monte_carlo(draws);
    }
  } else if (f.noise.kind != NoiseModel::Kind::kExchangeableBase || n > kExactNoiseCap) {
    f.options.mode = ExpectationMode::monte_carlo(2000);
  }
  if (doc.contains("forced")) {
    const json& fj = doc["forced"];
    if (!fj.is_array()) throw Error(ErrorCode::kParse, path + ".forced: expected an array");
    f.options.forced.assign(m, std::nullopt);
    for (std::size_t k = 0; k < fj.size(); ++k) {
      const std::string at = path + ".forced[" + std::to_string(k) + "]";
      detail::allow_keys(fj[k], {"owner_id", "ranking"}, at);
      const std::size_t j = detail::as_count(detail::field(fj[k], "owner_id", at), at + ".owner_id");
      if (j >= m) throw Error(ErrorCode::kParse, at + ".owner_id: no such owner");
      f.options.forced[j] = detail::at_path<Ranking>(at + ".ranking", [&] {
        return Ranking(detail::as_counts(detail::field(fj[k], "ranking", at), at + ".ranking"));
      });
    }
  }
  return f;
}

inline std::vector<AuditResult> run_audit(const AuditFixture& f) {
  return equilibrium_audit(f.mechanism, f.graph, f.truth, f.noise, f.utilities, f.options);
}

inline bool all_truthful(const std::vector<AuditResult>& results) {
  for (const AuditResult& r : results) {
    if (!r.truthful_is_best) return false;
  }
  return true;
}

inline ordered_json audit_json(const std::vector<AuditResult>& results, const AuditFixture& f, bool full_table) {
  ordered_json out;
  out["mechanism"] = to_string(f.mechanism.kind);
  out["expectation"] = f.options.mode.exact ? ordered_json("exact")
                                            : ordered_json({{"draws", f.options.mode.draws}});
  out["tolerance"] = f.options.tolerance;
  out["truthful_equilibrium"] = all_truthful(results);
  out["owners"] = ordered_json::array();
  for (const AuditResult& r : results) {
    ordered_json o;
    o["owner_id"] = r.owner;
    o["truthful_is_best"] = r.truthful_is_best;
    o["truthful_utility"] = r.truthful_utility;
    o["best_utility"] = r.best_utility;
    o["gap"] = r.gap;
    o["best_reports"] = ordered_json::array();
    for (const Ranking& b : r.best_reports) o["best_reports"].push_back(b.order());
    if (full_table) {
      o["utility_table"] = ordered_json::array();
      for (const auto& [rk, u] : r.utility_table) o["utility_table"].push_back({{"ranking", rk.order()}, {"utility", u}});
    }
    out["owners"].push_back(std::move(o));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simulation configs

/// Everything the `simulate` command needs. Paths stay unresolved here.
struct SimulateConfig {
  std::string preset = "iclr";
  ExperimentConfig experiment;
  std::optional<std::string> edges_path;
  bool map_ids = false;
  std::optional<std::string> scores_path;
  std::size_t tree_depth = 7;
  std::vector<double> tree_sigmas{2.0};
  std::vector<double> tree_variances{0.1, 0.5, 1.0, 2.0};
  std::vector<std::string> wellness{"comparison", "size"};
};

inline WellnessFunction wellness_by_name(const std::string& name) {
  if (name == "comparison") return WellnessFunction::comparison_focused();
  if (name == "size") return WellnessFunction::size_focused();
  if (name.rfind("power:", 0) == 0) {
    if (const auto a = parse_double(name.substr(6))) return WellnessFunction::power(*a);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown wellness function '" + name + "'");
}

inline std::size_t default_trials(const std::string& preset) { return preset == "tree" ? 20 : 30; }

inline SimulateConfig parse_simulate_config(const json& doc, const std::string& path = "config") {
  detail::allow_keys(doc, {"preset", "seed", "trials", "scores", "graph", "noise", "partition", "metrics", "tree", "benchmark"},
                     path);
  SimulateConfig c;
  if (doc.contains("preset")) c.preset = detail::as_string(doc["preset"], path + ".preset");
  if (c.preset != "iclr" && c.preset != "tree" && c.preset != "benchmark") {
    throw Error(ErrorCode::kParse, path + ".preset: expected iclr, tree or benchmark");
  }
  ExperimentConfig& e = c.experiment;
  if (doc.contains("seed")) e.seed = detail::as_count(doc["seed"], path + ".seed");
  e.trials = doc.contains("trials") ? detail::as_count(doc["trials"], path + ".trials") : default_trials(c.preset);
  if (e.trials == 0) throw Error(ErrorCode::kParse, path + ".trials: must be at least 1");
  if (doc.contains("scores")) c.scores_path = detail::as_string(doc["scores"], path + ".scores");

  if (doc.contains("graph")) {
    const json& g = doc["graph"];
    const std::string gp = path + ".graph";
    detail::allow_keys(g, {"kind", "items", "owners", "exponent", "cap", "depth", "path", "map_ids"}, gp);
    const std::string kind = g.contains("kind") ? detail::as_string(g["kind"], gp + ".kind") : "conference";
    if (kind == "conference") {
      e.graph.kind = GraphSource::Kind::kConference;
    } else if (kind == "tree") {
      e.graph.kind = GraphSource::Kind::kTree;
    } else if (kind == "file") {
      e.graph.kind = GraphSource::Kind::kGiven;
      c.edges_path = detail::as_string(detail::field(g, "path", gp), gp + ".path");
    } else {
      throw Error(ErrorCode::kParse, gp + ".kind: expected conference, tree or file");
    }
    if (g.contains("items")) e.graph.num_items = detail::as_count(g["items"], gp + ".items");
    e.graph.num_owners = g.contains("owners") ? detail::as_count(g["owners"], gp + ".owners") : 2 * e.graph.num_items;
    if (g.contains("exponent")) e.graph.law.exponent = detail::as_number(g["exponent"], gp + ".exponent");
    if (g.contains("cap")) e.graph.law.cap = detail::as_count(g["cap"], gp + ".cap");
    if (g.contains("depth")) e.graph.depth = detail::as_count(g["depth"], gp + ".depth");
    if (g.contains("map_ids")) c.map_ids = detail::as_bool(g["map_ids"], gp + ".map_ids");
  }
  if (doc.contains("noise")) {
    const json& nz = doc["noise"];
    detail::allow_keys(nz, {"sigma", "perception_variance"}, path + ".noise");
    if (nz.contains("sigma")) e.noise_sigma = detail::as_number(nz["sigma"], path + ".noise.sigma");
    if (!(e.noise_sigma >= 0.0)) throw Error(ErrorCode::kParse, path + ".noise.sigma: must be >= 0");
    if (nz.contains("perception_variance")) {
      e.perception_variance = detail::as_number(nz["perception_variance"], path + ".noise.perception_variance");
      if (!(*e.perception_variance >= 0.0)) {
        throw Error(ErrorCode::kParse, path + ".noise.perception_variance: must be >= 0");
      }
    }
  }
  if (doc.contains("partition")) {
    const json& p = doc["partition"];
    detail::allow_keys(p, {"method", "L"}, path + ".partition");
    if (p.contains("method")) {
      const std::string name = detail::as_string(p["method"], path + ".partition.method");
      e.partition_method = detail::at_path<PartitionMethod>(path + ".partition.method", [&] {
        return parse_partition_method(name);
      });
      if (e.partition_method == PartitionMethod::kFixed) {
        throw Error(ErrorCode::kParse, path + ".partition.method: fixed partitions are not configurable here");
      }
    }
    if (p.contains("L")) e.L = detail::as_count(p["L"], path + ".partition.L");
    if (e.L == 0) throw Error(ErrorCode::kParse, path + ".partition.L: must be at least 1");
  }
  if (doc.contains("metrics")) {
    detail::allow_keys(doc["metrics"], {"accept_percents"}, path + ".metrics");
    if (doc["metrics"].contains("accept_percents")) {
      e.accept_percents = detail::as_numbers(doc["metrics"]["accept_percents"], path + ".metrics.accept_percents");
      for (double p : e.accept_percents) {
        if (!(p > 0.0 && p <= 100.0)) throw Error(ErrorCode::kParse, path + ".metrics.accept_percents: values must be in (0, 100]");
      }
    }
  }
  if (doc.contains("tree")) {
    const json& t = doc["tree"];
    detail::allow_keys(t, {"depth", "sigmas", "perception_variances"}, path + ".tree");
    if (t.contains("depth")) c.tree_depth = detail::as_count(t["depth"], path + ".tree.depth");
    if (c.tree_depth < 1 || c.tree_depth > kMaxTradeoffDepth) {
      throw Error(ErrorCode::kParse, path + ".tree.depth: must be in 1.." + std::to_string(kMaxTradeoffDepth));
    }
    if (t.contains("sigmas")) c.tree_sigmas = detail::as_numbers(t["sigmas"], path + ".tree.sigmas");
    if (t.contains("perception_variances")) {
      c.tree_variances = detail::as_numbers(t["perception_variances"], path + ".tree.perception_variances");
    }
  }
  if (doc.contains("benchmark")) {
    detail::allow_keys(doc["benchmark"], {"wellness"}, path + ".benchmark");
    if (doc["benchmark"].contains("wellness")) {
      const json& w = doc["benchmark"]["wellness"];
      if (!w.is_array()) throw Error(ErrorCode::kParse, path + ".benchmark.wellness: expected an array of names");
      c.wellness.clear();
      for (std::size_t k = 0; k < w.size(); ++k) {
        const std::string at = path + ".benchmark.wellness[" + std::to_string(k) + "]";
        c.wellness.push_back(detail::as_string(w[k], at));
        detail::at_path<WellnessFunction>(at, [&] { return wellness_by_name(c.wellness.back()); });
      }
    }
  }
  return c;
}

}  // namespace isocal::io
