#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "pcnbal/ingestion.hpp"

namespace pcnbal {

namespace {

constexpr const char* kColNodeA = "node_a";
constexpr const char* kColNodeB = "node_b";
constexpr const char* kColCapacity = "capacity_sat";
constexpr const char* kColBaseFee = "base_fee_msat";
constexpr const char* kColFeeRate = "fee_rate_ppm";
constexpr const char* kColBalanceA = "balance_a_sat";
constexpr const char* kColBalanceB = "balance_b_sat";

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw InputError("line " + std::to_string(line) + ": " + what);
}

std::int64_t parse_int(std::string_view text, std::size_t line, const char* field) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    fail(line, std::string("invalid integer for ") + field + ": '" + std::string(text) + "'");
  return value;
}

std::vector<std::string_view> split_csv(std::string_view row) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = row.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(row.substr(start));
      return fields;
    }
    fields.push_back(row.substr(start, comma - start));
    start = comma + 1;
  }
}

void validate(SnapshotRecord& r, std::size_t line) {
  if (r.node_a.empty() || r.node_b.empty()) fail(line, "empty node id");
  if (r.node_a == r.node_b) fail(line, "self-channel " + r.node_a);
  if (r.capacity <= 0) fail(line, "capacity must be positive");
  if (r.base_fee_msat < 0) fail(line, "negative base fee");
  if (r.fee_rate_ppm < 0) fail(line, "negative fee rate");
  if (r.balance_a.has_value() != r.balance_b.has_value()) fail(line, "only one balance given");
  if (r.has_balances()) {
    if (*r.balance_a < 0 || *r.balance_b < 0) fail(line, "negative balance");
    if (*r.balance_a + *r.balance_b != r.capacity) fail(line, "balances do not sum to capacity");
  }
}

// Column layout: index of each known column, or -1.
struct Layout {
  int node_a = 0, node_b = 1, capacity = 2, base_fee = -1, fee_rate = -1, balance_a = -1,
      balance_b = -1;
  std::size_t width = 0;
};

Layout positional(std::size_t width, std::size_t line) {
  Layout l;
  l.width = width;
  if (width == 3) return l;
  l.base_fee = 3;
  l.fee_rate = 4;
  if (width == 5) return l;
  l.balance_a = 5;
  l.balance_b = 6;
  if (width == 7) return l;
  fail(line, "expected 3, 5 or 7 columns, got " + std::to_string(width));
}

Layout from_header(const std::vector<std::string_view>& cols, std::size_t line) {
  Layout l{-1, -1, -1, -1, -1, -1, -1, cols.size()};
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const int idx = static_cast<int>(i);
    if (cols[i] == kColNodeA) l.node_a = idx;
    else if (cols[i] == kColNodeB) l.node_b = idx;
    else if (cols[i] == kColCapacity) l.capacity = idx;
    else if (cols[i] == kColBaseFee) l.base_fee = idx;
    else if (cols[i] == kColFeeRate) l.fee_rate = idx;
    else if (cols[i] == kColBalanceA) l.balance_a = idx;
    else if (cols[i] == kColBalanceB) l.balance_b = idx;
    else fail(line, "unknown column '" + std::string(cols[i]) + "'");
  }
  if (l.node_a < 0 || l.node_b < 0 || l.capacity < 0)
    fail(line, "header must name node_a, node_b and capacity_sat");
  return l;
}

SnapshotRecord parse_csv_row(const std::vector<std::string_view>& f, const Layout& l,
                             std::size_t line) {
  if (f.size() != l.width)
    fail(line, "expected " + std::to_string(l.width) + " columns, got " + std::to_string(f.size()));
  SnapshotRecord r;
  r.node_a = std::string(f[l.node_a]);
  r.node_b = std::string(f[l.node_b]);
  r.capacity = parse_int(f[l.capacity], line, kColCapacity);
  if (l.base_fee >= 0) r.base_fee_msat = parse_int(f[l.base_fee], line, kColBaseFee);
  if (l.fee_rate >= 0) r.fee_rate_ppm = parse_int(f[l.fee_rate], line, kColFeeRate);
  if (l.balance_a >= 0) r.balance_a = parse_int(f[l.balance_a], line, kColBalanceA);
  if (l.balance_b >= 0) r.balance_b = parse_int(f[l.balance_b], line, kColBalanceB);
  validate(r, line);
  return r;
}

std::vector<SnapshotRecord> read_csv(std::istream& in) {
  std::vector<SnapshotRecord> out;
  std::optional<Layout> layout;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view row(raw);
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (row.empty()) continue;
    auto fields = split_csv(row);
    if (!layout) {
      if (fields.front() == kColNodeA) {
        layout = from_header(fields, line);
        continue;
      }
      layout = positional(fields.size(), line);
    }
    out.push_back(parse_csv_row(fields, *layout, line));
  }
  return out;
}

std::int64_t json_int(const nlohmann::json& obj, const char* key, std::size_t line) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) fail(line, std::string(key) + " must be an integer");
  return v.get<std::int64_t>();
}

std::vector<SnapshotRecord> read_jsonl(std::istream& in) {
  std::vector<SnapshotRecord> out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
      fail(line, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) fail(line, "expected a JSON object");
    SnapshotRecord r;
    try {
      r.node_a = obj.at(kColNodeA).get<std::string>();
      r.node_b = obj.at(kColNodeB).get<std::string>();
      r.capacity = json_int(obj, kColCapacity, line);
      if (obj.contains(kColBaseFee)) r.base_fee_msat = json_int(obj, kColBaseFee, line);
      if (obj.contains(kColFeeRate)) r.fee_rate_ppm = json_int(obj, kColFeeRate, line);
      if (obj.contains(kColBalanceA)) r.balance_a = json_int(obj, kColBalanceA, line);
      if (obj.contains(kColBalanceB)) r.balance_b = json_int(obj, kColBalanceB, line);
    } catch (const nlohmann::json::exception& e) {
      fail(line, e.what());
    }
    validate(r, line);
    out.push_back(std::move(r));
  }
  return out;
}

void check_name(const std::string& name) {
  if (name.find_first_of(",\r\n") != std::string::npos)
    throw InputError("node id '" + name + "' cannot be written to CSV");
}

}  // namespace

SnapshotFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".jsonl" || ext == ".json") ? SnapshotFormat::Jsonl : SnapshotFormat::Csv;
}

std::vector<SnapshotRecord> read_snapshot(std::istream& in, SnapshotFormat format) {
  return format == SnapshotFormat::Csv ? read_csv(in) : read_jsonl(in);
}

std::vector<SnapshotRecord> load_snapshot(const std::filesystem::path& path, SnapshotFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open snapshot " + path.string());
  return read_snapshot(in, format);
}

std::vector<SnapshotRecord> load_snapshot(const std::filesystem::path& path) {
  return load_snapshot(path, format_from_path(path));
}

void write_snapshot(std::ostream& out, const std::vector<SnapshotRecord>& records,
                    SnapshotFormat format) {
  const bool balances = !records.empty() && std::all_of(records.begin(), records.end(),
                                                        [](const auto& r) { return r.has_balances(); });
  if (format == SnapshotFormat::Csv) {
    out << kColNodeA << ',' << kColNodeB << ',' << kColCapacity << ',' << kColBaseFee << ','
        << kColFeeRate;
    if (balances) out << ',' << kColBalanceA << ',' << kColBalanceB;
    out << '\n';
    for (const auto& r : records) {
      check_name(r.node_a);
      check_name(r.node_b);
      out << r.node_a << ',' << r.node_b << ',' << r.capacity << ',' << r.base_fee_msat << ','
          << r.fee_rate_ppm;
      if (balances) out << ',' << *r.balance_a << ',' << *r.balance_b;
      out << '\n';
    }
    return;
  }
  for (const auto& r : records) {
    nlohmann::ordered_json obj;
    obj[kColNodeA] = r.node_a;
    obj[kColNodeB] = r.node_b;
    obj[kColCapacity] = r.capacity;
    obj[kColBaseFee] = r.base_fee_msat;
    obj[kColFeeRate] = r.fee_rate_ppm;
    if (balances) {
      obj[kColBalanceA] = *r.balance_a;
      obj[kColBalanceB] = *r.balance_b;
    }
    out << obj.dump() << '\n';
  }
}

std::vector<SnapshotRecord> to_records(const NetworkGraph& g, bool with_balances) {
  std::vector<SnapshotRecord> out;
  out.reserve(g.channel_count());
  for (const Channel& ch : g.channels()) {
    SnapshotRecord r{g.name(ch.a), g.name(ch.b), ch.capacity, ch.base_fee_msat, ch.fee_rate_ppm,
                     std::nullopt, std::nullopt};
    if (with_balances) {
      r.balance_a = ch.balance_a;
      r.balance_b = ch.balance_b;
    }
    out.push_back(std::move(r));
  }
  return out;
}

NetworkGraph build_graph(const std::vector<SnapshotRecord>& records) {
  NetworkGraph g;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!r.has_balances())
      throw InputError("record " + std::to_string(i + 1) + " has no balances");
    if (*r.balance_a + *r.balance_b != r.capacity)
      throw InputError("record " + std::to_string(i + 1) + " balances do not sum to capacity");
    const NodeId a = g.add_node(r.node_a);
    const NodeId b = g.add_node(r.node_b);
    try {
      g.add_channel(a, b, r.capacity, *r.balance_a, r.base_fee_msat, r.fee_rate_ppm);
    } catch (const std::invalid_argument& e) {
      throw InputError("record " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return g;
}

}  // namespace pcnbal
