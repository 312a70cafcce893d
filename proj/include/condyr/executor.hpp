#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "condyr/dictionary.hpp"
#include "condyr/errors.hpp"
#include "condyr/plan.hpp"
#include "condyr/store.hpp"
#include "condyr/validity.hpp"

namespace condyr {

/// One result cell: a term id (`v$`/`ng$`), a validity (`bs$`) or a count.
using Cell = std::variant<TermId, Validity, std::int64_t>;
using ResultRow = std::vector<Cell>;

struct ResultTable {
  std::vector<PhysicalColumn> columns;
  std::vector<ResultRow> rows;

  std::size_t column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i].name == name) return i;
    throw Error("no column " + name);
  }
};

struct ExecStats {
  /// Stored entries visited by scans (index entries for quads, rows for metadata).
  std::size_t rows_scanned = 0;
  std::size_t and_ops = 0;
  std::size_t rows_produced = 0;
};

struct ExecOptions {
  /// Test hook: combine validities with OR instead of AND.
  bool fault_and_as_or = false;
};

namespace detail {

/// Index of the first physical cell of each schema column.
inline std::vector<std::size_t> cell_offsets(const Schema& schema) {
  std::vector<std::size_t> out;
  std::size_t at = 0;
  for (const auto& c : schema) {
    out.push_back(at);
    at += c.repr == Repr::Condensed ? 2 : 1;
  }
  return out;
}

inline std::size_t offset_of(const Schema& schema, const std::string& var) {
  const auto offsets = cell_offsets(schema);
  for (std::size_t i = 0; i < schema.size(); ++i)
    if (schema[i].var == var) return offsets[i];
  throw UnknownVariable(var);
}

struct KeyHash {
  std::size_t operator()(const std::vector<std::uint32_t>& key) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (auto v : key) h = (h ^ v) * 0x100000001b3ULL;
    return h;
  }
};

class Evaluator {
 public:
  Evaluator(const Store& store, ExecStats& stats, const ExecOptions& options)
      : store_(store), stats_(stats), options_(options) {}

  std::vector<ResultRow> run(const PlanNode& node) {
    if (auto* scan = std::get_if<ScanOp>(&node.op)) return scan_rows(*scan, node.schema);
    if (auto* join = std::get_if<BitJoinOp>(&node.op)) return join_rows(*join);
    if (auto* lower = std::get_if<LowerOp>(&node.op)) return lower_rows(*lower);
    if (auto* group = std::get_if<GroupByOp>(&node.op)) return group_rows(*group);
    return finalize_rows(std::get<FinalizeOp>(node.op));
  }

 private:
  std::vector<ResultRow> scan_rows(const ScanOp& scan, const Schema& schema) {
    std::vector<ResultRow> out;
    if (scan.empty) return out;

    // First position of each schema variable; later repeats must agree with it.
    std::vector<std::size_t> first(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c)
      for (std::size_t pos = 4; pos-- > 0;)
        if (scan.vars[pos] == schema[c].var) first[c] = pos;

    auto emit = [&](const QuadIds& ids, const Validity* validity) {
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j)
          if (scan.vars[i] && scan.vars[i] == scan.vars[j] && ids[i] != ids[j]) return;
      ResultRow row;
      for (std::size_t c = 0; c < schema.size(); ++c) {
        row.emplace_back(ids[first[c]]);
        if (schema[c].repr == Repr::Condensed) row.emplace_back(*validity);
      }
      out.push_back(std::move(row));
    };

    ScanStats ss;
    if (scan.source == ScanSource::Quads) {
      QuadPatternKey key;
      key.bound = scan.bound_ids;
      store_.for_each_quad(
          key,
          [&](const CondensedQuad& q) {
            if (q.validity.any()) emit(q.ids(), &q.validity);
          },
          &ss);
    } else {
      TriplePatternKey key;
      for (std::size_t i = 0; i < 3; ++i) key.bound[i] = scan.bound_ids[i];
      for (const auto& t : store_.metadata_matching(key, &ss)) emit({t.subject, t.predicate, t.object, TermId{}}, nullptr);
    }
    stats_.rows_scanned += ss.entries_touched;
    return out;
  }

  std::vector<ResultRow> join_rows(const BitJoinOp& join) {
    const Schema& ls = join.left->schema;
    const Schema& rs = join.right->schema;
    auto left = run(*join.left);
    auto right = run(*join.right);

    std::vector<std::size_t> lkey, rkey;
    for (const auto& v : join.id_keys) {
      lkey.push_back(offset_of(ls, v));
      rkey.push_back(offset_of(rs, v));
    }
    for (const auto& v : join.graph_keys) {
      lkey.push_back(offset_of(ls, v));
      rkey.push_back(offset_of(rs, v));
    }
    std::vector<std::pair<std::size_t, std::size_t>> bits;
    for (const auto& v : join.graph_keys) bits.emplace_back(offset_of(ls, v) + 1, offset_of(rs, v) + 1);

    // Right-hand cells that are not already in the left schema.
    std::vector<std::size_t> right_extra;
    {
      const auto offsets = cell_offsets(rs);
      for (std::size_t c = 0; c < rs.size(); ++c) {
        if (find_column(ls, rs[c].var)) continue;
        right_extra.push_back(offsets[c]);
        if (rs[c].repr == Repr::Condensed) right_extra.push_back(offsets[c] + 1);
      }
    }

    auto key_of = [](const ResultRow& row, const std::vector<std::size_t>& cols) {
      std::vector<std::uint32_t> key;
      key.reserve(cols.size());
      for (auto c : cols) key.push_back(std::get<TermId>(row[c]).value);
      return key;
    };

    std::vector<ResultRow> out;
    auto combine = [&](const ResultRow& l, const ResultRow& r) {
      ResultRow row = l;
      for (const auto& [lb, rb] : bits) {
        Validity& v = std::get<Validity>(row[lb]);
        if (options_.fault_and_as_or) v |= std::get<Validity>(r[rb]);
        else v &= std::get<Validity>(r[rb]);
        ++stats_.and_ops;
        if (v.none()) return;
      }
      for (auto c : right_extra) row.push_back(r[c]);
      out.push_back(std::move(row));
    };

    const bool build_left = left.size() < right.size();
    const auto& build = build_left ? left : right;
    const auto& probe = build_left ? right : left;
    const auto& bcols = build_left ? lkey : rkey;
    const auto& pcols = build_left ? rkey : lkey;

    std::unordered_map<std::vector<std::uint32_t>, std::vector<std::size_t>, KeyHash> table;
    for (std::size_t i = 0; i < build.size(); ++i) table[key_of(build[i], bcols)].push_back(i);
    for (const auto& p : probe) {
      auto it = table.find(key_of(p, pcols));
      if (it == table.end()) continue;
      for (auto i : it->second) {
        if (build_left) combine(build[i], p);
        else combine(p, build[i]);
      }
    }
    return out;
  }

  std::vector<ResultRow> lower_rows(const LowerOp& lower) {
    const std::size_t at = offset_of(lower.sub->schema, lower.var);
    std::vector<ResultRow> out;
    for (auto& row : run(*lower.sub)) {
      const TermId graph = std::get<TermId>(row[at]);
      const Validity& bits = std::get<Validity>(row[at + 1]);
      for (const auto& entry : store_.vng_for_graph(graph)) {
        if (entry.version == 0 || entry.version > bits.size() || !bits.test(entry.version - 1)) continue;
        ResultRow copy;
        copy.reserve(row.size() - 1);
        copy.insert(copy.end(), row.begin(), row.begin() + static_cast<std::ptrdiff_t>(at));
        copy.emplace_back(entry.vng);
        copy.insert(copy.end(), row.begin() + static_cast<std::ptrdiff_t>(at + 2), row.end());
        out.push_back(std::move(copy));
      }
    }
    return out;
  }

  std::vector<ResultRow> group_rows(const GroupByOp& group) {
    const Schema& in = group.sub->schema;
    std::vector<std::size_t> keys;
    for (const auto& k : group.keys) keys.push_back(offset_of(in, k));
    std::vector<std::size_t> mult;
    for (const auto& v : group.multiplicity) mult.push_back(offset_of(in, v) + 1);

    std::map<std::vector<std::uint32_t>, std::int64_t> counts;
    for (const auto& row : run(*group.sub)) {
      std::vector<std::uint32_t> key;
      for (auto k : keys) key.push_back(std::get<TermId>(row[k]).value);
      std::int64_t m = 1;
      for (auto b : mult) m *= static_cast<std::int64_t>(std::get<Validity>(row[b]).popcount());
      counts[key] += m;
    }
    if (keys.empty() && counts.empty()) counts[{}] = 0;

    std::vector<ResultRow> out;
    for (const auto& [key, n] : counts) {
      ResultRow row;
      for (auto id : key) row.emplace_back(TermId{id});
      for (std::size_t i = 0; i < group.aggregates.size(); ++i) row.emplace_back(n);
      out.push_back(std::move(row));
    }
    return out;
  }

  std::vector<ResultRow> finalize_rows(const FinalizeOp& fin) {
    const Schema& in = fin.sub->schema;
    std::vector<std::size_t> cells;
    for (const auto& v : fin.vars) {
      const std::size_t at = offset_of(in, v);
      cells.push_back(at);
      if (find_column(in, v)->repr == Repr::Condensed) cells.push_back(at + 1);
    }
    std::vector<ResultRow> out;
    for (auto& row : run(*fin.sub)) {
      ResultRow projected;
      projected.reserve(cells.size());
      for (auto c : cells) projected.push_back(row[c]);
      out.push_back(std::move(projected));
    }
    return out;
  }

  const Store& store_;
  ExecStats& stats_;
  const ExecOptions& options_;
};

}  // namespace detail

/// Evaluates a plan over `store`. Row order is unspecified.
inline ResultTable execute(const PlanNode& plan, const Store& store, ExecStats* stats = nullptr,
                           const ExecOptions& options = {}) {
  ExecStats local;
  ExecStats& s = stats ? *stats : local;
  detail::Evaluator ev(store, s, options);
  ResultTable out{physical_columns(plan.schema), ev.run(plan)};
  s.rows_produced += out.rows.size();
  return out;
}

/// Value bound to a variable after flattening.
using FlatValue = std::variant<TermId, std::int64_t>;

/// One solution with every graph variable bound to a versioned named graph.
struct FlatRow {
  std::map<std::string, FlatValue> bindings;
  friend bool operator==(const FlatRow&, const FlatRow&) = default;
  friend auto operator<=>(const FlatRow&, const FlatRow&) = default;
};

inline void sort_rows(std::vector<FlatRow>& rows) { std::sort(rows.begin(), rows.end()); }

/// Bag equality of two flat results.
inline bool same_bag(std::vector<FlatRow> a, std::vector<FlatRow> b) {
  sort_rows(a);
  sort_rows(b);
  return a == b;
}

/// Expands every condensed cell into one row per set bit; a row with
/// bitstring popcounts c1..ck yields c1 * ... * ck flat rows.
inline std::vector<FlatRow> flatten(const ResultTable& rt, const Store& store) {
  struct Slot {
    std::string var;
    std::size_t cell;
    CellKind kind;
  };
  std::vector<Slot> plain;
  std::vector<std::pair<std::string, std::size_t>> condensed;  // var, ng cell
  for (std::size_t i = 0; i < rt.columns.size(); ++i) {
    const auto& c = rt.columns[i];
    if (c.kind == CellKind::Graph) condensed.emplace_back(c.var, i);
    else if (c.kind != CellKind::Bits) plain.push_back({c.var, i, c.kind});
  }

  std::vector<FlatRow> out;
  for (const auto& row : rt.rows) {
    FlatRow base;
    for (const auto& s : plain) {
      if (s.kind == CellKind::Count) base.bindings[s.var] = std::get<std::int64_t>(row[s.cell]);
      else base.bindings[s.var] = std::get<TermId>(row[s.cell]);
    }
    std::vector<FlatRow> partial{base};
    for (const auto& [var, cell] : condensed) {
      const TermId graph = std::get<TermId>(row[cell]);
      const auto versions = std::get<Validity>(row[cell + 1]).set_positions();
      std::vector<FlatRow> next;
      for (const auto& p : partial)
        for (auto bit : versions) {
          auto vng = store.find_vng(graph, bit + 1);
          if (!vng) throw Error("no versioned named graph for graph #" + std::to_string(graph.value) + " version " +
                                std::to_string(bit + 1));
          FlatRow r = p;
          r.bindings[var] = *vng;
          next.push_back(std::move(r));
        }
      partial = std::move(next);
    }
    out.insert(out.end(), partial.begin(), partial.end());
  }
  return out;
}

/// A decoded cell: a term, a '0'/'1' bitstring or a count.
using DecodedCell = std::variant<Term, std::string, std::int64_t>;

struct DecodedTable {
  std::vector<std::string> columns;
  std::vector<std::vector<DecodedCell>> rows;
};

inline DecodedTable decode(const ResultTable& rt, const Dictionary& dict) {
  DecodedTable out;
  for (const auto& c : rt.columns) out.columns.push_back(c.name);
  for (const auto& row : rt.rows) {
    std::vector<DecodedCell> cells;
    for (const auto& cell : row) {
      if (auto* id = std::get_if<TermId>(&cell)) cells.emplace_back(dict.resolve(*id));
      else if (auto* bits = std::get_if<Validity>(&cell)) cells.emplace_back(bits->to_string());
      else cells.emplace_back(std::get<std::int64_t>(cell));
    }
    out.rows.push_back(std::move(cells));
  }
  return out;
}

inline std::string cell_text(const DecodedCell& cell) {
  if (auto* t = std::get_if<Term>(&cell)) return to_ntriples(*t);
  if (auto* s = std::get_if<std::string>(&cell)) return *s;
  return std::to_string(std::get<std::int64_t>(cell));
}

}  // namespace condyr
