// Matrix / wealth JSON files, transaction and wealth CSVs, trajectory CSV.
#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "icm/blocks.hpp"
#include "icm/core.hpp"
#include "icm/error.hpp"
#include "icm/ingest.hpp"

namespace icm::io {

using nlohmann::json;

/// %.12g, the precision used by every CSV this library writes.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::ParseError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::ParseError, "cannot write '" + path + "'");
  out << content;
}

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, what + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Matrix: { "n": int, "tolerance": real, "entries": [[row, col, value], ...] }

inline RawMatrix raw_matrix_from_json(const json& j) {
  try {
    RawMatrix raw;
    raw.n = j.at("n").get<std::size_t>();
    raw.tolerance = j.value("tolerance", kDefaultTolerance);
    for (const auto& e : j.at("entries")) {
      if (!e.is_array() || e.size() != 3) fail(ErrorKind::ParseError, "matrix entry must be [row, col, value]");
      raw.entries.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>(), e[2].get<double>()});
    }
    return raw;
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("matrix: ") + e.what());
  }
}

inline json matrix_to_json(const IncomeCirculationMatrix& f) {
  json entries = json::array();
  for (const auto& t : f.triplets()) entries.push_back(json::array({t.row, t.col, t.value}));
  return {{"n", f.n()}, {"tolerance", f.tolerance()}, {"entries", std::move(entries)}};
}

inline RawMatrix read_raw_matrix(const std::string& path) {
  return raw_matrix_from_json(parse_json(read_file(path), path));
}

inline IncomeCirculationMatrix read_matrix(const std::string& path) { return validate(read_raw_matrix(path)); }

// ---------------------------------------------------------------------------
// Wealth: { "time": int, "values": [real, ...] }

inline WealthVector wealth_from_json(const json& j) {
  std::vector<double> values;
  long time = 0;
  try {
    time = j.value("time", 0L);
    values = j.at("values").get<std::vector<double>>();
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("wealth: ") + e.what());
  }
  return WealthVector::make(std::move(values), time);
}

inline json wealth_to_json(const WealthVector& x) {
  return {{"time", x.time()}, {"values", std::vector<double>(x.values().begin(), x.values().end())}};
}

inline WealthVector read_wealth(const std::string& path) { return wealth_from_json(parse_json(read_file(path), path)); }

// ---------------------------------------------------------------------------
// CSV

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

/// Header row plus data rows; blank lines are skipped.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    first = false;
    if (trim(line).empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

inline double parse_real(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::ParseError, where + ": '" + s + "' is not a number");
  }
}

inline long parse_integer(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::ParseError, where + ": '" + s + "' is not an integer");
  }
}

inline std::size_t parse_index(const std::string& s, const std::string& where) {
  const long v = parse_integer(s, where);
  if (v < 0) fail(ErrorKind::ParseError, where + ": negative agent id");
  return static_cast<std::size_t>(v);
}

/// Header `t,payer,payee,amount`.
inline std::vector<TransactionRecord> parse_transactions_csv(const std::string& text) {
  const auto rows = parse_csv(text);
  if (rows.empty() || rows[0] != std::vector<std::string>{"t", "payer", "payee", "amount"})
    fail(ErrorKind::ParseError, "transaction CSV must start with header t,payer,payee,amount");
  std::vector<TransactionRecord> out;
  out.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "transactions line " + std::to_string(r + 1);
    if (row.size() != 4) fail(ErrorKind::ParseError, where + ": expected 4 fields");
    out.push_back({parse_integer(row[0], where), parse_index(row[1], where), parse_index(row[2], where),
                   parse_real(row[3], where)});
  }
  return out;
}

/// Wealth CSV: header `agent,wealth` (one observation) or
/// `agent,wealth_<t>,...` (wealth at the start of each listed step t).
struct WealthTable {
  std::optional<WealthVector> single;
  std::map<long, WealthVector> by_step;
};

inline WealthTable parse_wealth_csv(const std::string& text) {
  const auto rows = parse_csv(text);
  if (rows.empty() || rows[0].size() < 2 || rows[0][0] != "agent")
    fail(ErrorKind::ParseError, "wealth CSV must start with header agent,wealth");
  const auto& header = rows[0];
  const bool single = header.size() == 2 && header[1] == "wealth";
  std::vector<long> steps;
  if (!single)
    for (std::size_t c = 1; c < header.size(); ++c) {
      if (header[c].rfind("wealth_", 0) != 0)
        fail(ErrorKind::ParseError, "wealth CSV column '" + header[c] + "' is neither wealth nor wealth_<t>");
      steps.push_back(parse_integer(header[c].substr(7), "wealth CSV header"));
    }
  const std::size_t n = rows.size() - 1;
  std::vector<std::vector<double>> cols(header.size() - 1, std::vector<double>(n, 0.0));
  std::vector<bool> seen(n, false);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::string where = "wealth line " + std::to_string(r + 1);
    if (rows[r].size() != header.size()) fail(ErrorKind::ParseError, where + ": wrong field count");
    const std::size_t agent = parse_index(rows[r][0], where);
    if (agent >= n || seen[agent]) fail(ErrorKind::ParseError, where + ": agent ids must be 0..n-1, each once");
    seen[agent] = true;
    for (std::size_t c = 1; c < header.size(); ++c) cols[c - 1][agent] = parse_real(rows[r][c], where);
  }
  WealthTable table;
  if (single) {
    table.single = WealthVector::make(std::move(cols[0]), 0);
  } else {
    for (std::size_t c = 0; c < steps.size(); ++c)
      table.by_step.emplace(steps[c], WealthVector::make(std::move(cols[c]), steps[c]));
  }
  return table;
}

/// Header `t,agent_0,...,agent_{n-1}`.
inline std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t";
  const std::size_t n = traj.states.empty() ? 0 : traj.states.front().size();
  for (std::size_t i = 0; i < n; ++i) out += ",agent_" + std::to_string(i);
  out += '\n';
  for (const auto& x : traj.states) {
    out += std::to_string(x.time());
    for (double v : x.values()) out += "," + format_number(v);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Partition config: { "h_frac": 0.1, "l_frac": 0.1 } or { "h": [...], "l": [...] }

inline PartitionConfig partition_from_json(const json& j) {
  PartitionConfig cfg;
  try {
    cfg.h_frac = j.value("h_frac", cfg.h_frac);
    cfg.l_frac = j.value("l_frac", cfg.l_frac);
    if (j.contains("h")) cfg.h = j.at("h").get<std::vector<std::size_t>>();
    if (j.contains("l")) cfg.l = j.at("l").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("partition: ") + e.what());
  }
  return cfg;
}

inline PartitionConfig read_partition(const std::string& path) {
  return partition_from_json(parse_json(read_file(path), path));
}

}  // namespace icm::io
