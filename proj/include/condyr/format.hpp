#pragma once

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "condyr/executor.hpp"

namespace condyr {

enum class OutputFormat { Tsv, Json };

/// Row texts in output order; with `sorted`, rows are ordered by their text.
inline std::vector<std::vector<std::string>> table_text(const DecodedTable& t, bool sorted) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    std::vector<std::string> cells;
    for (const auto& c : r) cells.push_back(cell_text(c));
    rows.push_back(std::move(cells));
  }
  if (sorted) std::stable_sort(rows.begin(), rows.end());
  return rows;
}

/// Header line of column names, then one tab-separated line per row.
inline void write_tsv(std::ostream& out, const DecodedTable& t, bool sorted = false) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "\t" : "") << t.columns[i];
  out << '\n';
  for (const auto& row : table_text(t, sorted)) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "\t" : "") << row[i];
    out << '\n';
  }
}

/// JSON lines: an array of column names, then one array per row. Counts
/// are numbers; terms (N-Triples syntax) and bitstrings are strings.
inline void write_jsonl(std::ostream& out, const DecodedTable& t, bool sorted = false) {
  out << nlohmann::json(t.columns).dump() << '\n';
  std::vector<nlohmann::json> rows;
  for (const auto& r : t.rows) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& c : r) {
      if (auto* n = std::get_if<std::int64_t>(&c)) row.push_back(*n);
      else row.push_back(cell_text(c));
    }
    rows.push_back(std::move(row));
  }
  if (sorted) std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.dump() < b.dump(); });
  for (const auto& row : rows) out << row.dump() << '\n';
}

inline void write_table(std::ostream& out, const DecodedTable& t, OutputFormat format, bool sorted = false) {
  if (format == OutputFormat::Json) write_jsonl(out, t, sorted);
  else write_tsv(out, t, sorted);
}

}  // namespace condyr
