#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "condyr/dictionary.hpp"
#include "condyr/errors.hpp"
#include "condyr/nquads.hpp"
#include "condyr/term.hpp"
#include "condyr/validity.hpp"

namespace condyr {

/// IRIs of the versioning vocabulary written into the metadata relation.
inline constexpr std::string_view kInVersionIri = "v:in-version";
inline constexpr std::string_view kVersionOfIri = "v:version-of";
inline constexpr std::string_view kVngIriPrefix = ":vng";
inline constexpr std::string_view kDefaultMetadataGraphIri = "ng:Metadata";

/// Canonical quad positions.
enum QuadPosition : std::size_t { kSubject = 0, kPredicate = 1, kObject = 2, kGraph = 3 };

using QuadIds = std::array<TermId, 4>;

/// One row of `versioned_quad`.
struct CondensedQuad {
  TermId subject;
  TermId predicate;
  TermId object;
  TermId graph;
  Validity validity;

  QuadIds ids() const { return {subject, predicate, object, graph}; }
  friend bool operator==(const CondensedQuad&, const CondensedQuad&) = default;
};

/// One row of `versioned_named_graph`: `vng` is the resource naming `graph` at `version`.
struct VersionedNamedGraph {
  TermId vng;
  TermId graph;
  std::size_t version = 0;
  friend bool operator==(const VersionedNamedGraph&, const VersionedNamedGraph&) = default;
};

struct MetadataTriple {
  TermId subject;
  TermId predicate;
  TermId object;
  friend bool operator==(const MetadataTriple&, const MetadataTriple&) = default;
  friend auto operator<=>(const MetadataTriple&, const MetadataTriple&) = default;
};

/// Bound-or-wildcard selector over (s, p, o, g).
struct QuadPatternKey {
  std::array<std::optional<TermId>, 4> bound;

  static QuadPatternKey any() { return {}; }
  bool matches(const QuadIds& ids) const {
    for (std::size_t i = 0; i < 4; ++i)
      if (bound[i] && *bound[i] != ids[i]) return false;
    return true;
  }
  unsigned mask() const {
    unsigned m = 0;
    for (std::size_t i = 0; i < 4; ++i)
      if (bound[i]) m |= 1U << i;
    return m;
  }
};

struct TriplePatternKey {
  std::array<std::optional<TermId>, 3> bound;

  bool matches(const MetadataTriple& t) const {
    return (!bound[0] || *bound[0] == t.subject) && (!bound[1] || *bound[1] == t.predicate) &&
           (!bound[2] || *bound[2] == t.object);
  }
};

/// Index and relation access counters.
struct ScanStats {
  std::size_t entries_touched = 0;
  std::size_t rows_matched = 0;
};

struct StoreStats {
  std::size_t versions = 0;
  std::size_t quad_count = 0;
  std::size_t term_count = 0;
  std::size_t vng_count = 0;
  std::size_t flat_row_count = 0;
  friend bool operator==(const StoreStats&, const StoreStats&) = default;
};

struct IngestOptions {
  bool allow_empty = false;
  std::string label;
};

/// Composite index orders, written over (g, s, p, o).
///
/// Every subset of bound positions is the leading prefix of at least one
/// of these six orders, so any bound/wildcard combination is a range scan.
enum class QuadOrder : std::uint8_t { GSPO, SPOG, POGS, OGSP, GPOS, SOGP };

inline constexpr std::array<QuadOrder, 6> kQuadOrders = {QuadOrder::GSPO, QuadOrder::SPOG, QuadOrder::POGS,
                                                         QuadOrder::OGSP, QuadOrder::GPOS, QuadOrder::SOGP};

/// Canonical positions in the key order of `order`.
inline constexpr std::array<std::size_t, 4> order_positions(QuadOrder order) {
  switch (order) {
    case QuadOrder::GSPO: return {kGraph, kSubject, kPredicate, kObject};
    case QuadOrder::SPOG: return {kSubject, kPredicate, kObject, kGraph};
    case QuadOrder::POGS: return {kPredicate, kObject, kGraph, kSubject};
    case QuadOrder::OGSP: return {kObject, kGraph, kSubject, kPredicate};
    case QuadOrder::GPOS: return {kGraph, kPredicate, kObject, kSubject};
    case QuadOrder::SOGP: return {kSubject, kObject, kGraph, kPredicate};
  }
  return {0, 1, 2, 3};
}

inline constexpr std::string_view order_name(QuadOrder order) {
  constexpr std::array<std::string_view, 6> names = {"GSPO", "SPOG", "POGS", "OGSP", "GPOS", "SOGP"};
  return names[static_cast<std::size_t>(order)];
}

/// The index whose leading columns are exactly the bound positions of `mask`.
inline QuadOrder choose_order(unsigned mask) {
  const auto bound = static_cast<std::size_t>(std::popcount(mask));
  for (QuadOrder order : kQuadOrders) {
    auto pos = order_positions(order);
    unsigned prefix = 0;
    for (std::size_t i = 0; i < bound; ++i) prefix |= 1U << pos[i];
    if (prefix == mask) return order;
  }
  return QuadOrder::GSPO;  // unreachable: the six orders cover every subset
}

namespace detail {

struct QuadIdsHash {
  std::size_t operator()(const QuadIds& q) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto id : q) {
      h ^= id.value;
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

struct IndexEntry {
  std::array<std::uint32_t, 4> key;
  std::uint32_t row;
  friend bool operator<(const IndexEntry& a, const IndexEntry& b) { return a.key < b.key; }
};

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

}  // namespace detail

/// The condensed versioned quad store.
///
/// Mutation (ingest, load) requires exclusive access. Any number of readers
/// may query a store concurrently as long as no mutation is in progress.
class Store {
 public:
  static constexpr int kFormatVersion = 1;

  const Dictionary& dictionary() const noexcept { return dict_; }
  std::size_t version_count() const noexcept { return versions_; }
  std::span<const CondensedQuad> quads() const noexcept { return rows_; }
  std::span<const MetadataTriple> metadata() const noexcept { return metadata_; }
  std::span<const VersionedNamedGraph> vngs() const noexcept { return vngs_; }
  const std::string& version_label(std::size_t version) const { return labels_.at(version - 1); }

  std::optional<TermId> in_version_id() const { return dict_.lookup(Term::iri(std::string(kInVersionIri))); }
  std::optional<TermId> version_of_id() const { return dict_.lookup(Term::iri(std::string(kVersionOfIri))); }

  /// Adds one snapshot as version V + 1 and returns V + 1.
  std::size_t ingest_version(std::span<const TermQuad> snapshot, const IngestOptions& options = {}) {
    if (snapshot.empty() && !options.allow_empty) throw EmptySnapshotError();
    for (const auto& q : snapshot) {
      if (q.graph.is_literal() || q.graph.lexical.empty()) throw Error("quad without a valid graph term");
      if (q.subject.is_literal()) throw Error("literal in subject position");
      if (!q.predicate.is_iri()) throw Error("predicate must be an IRI");
    }

    ++versions_;
    labels_.push_back(options.label);
    for (auto& row : rows_) row.validity.extend(1);
    const std::size_t bit = versions_ - 1;

    std::vector<TermId> graphs;
    for (const auto& q : snapshot) {
      QuadIds ids = {dict_.intern(q.subject), dict_.intern(q.predicate), dict_.intern(q.object),
                     dict_.intern(q.graph)};
      if (std::find(graphs.begin(), graphs.end(), ids[kGraph]) == graphs.end()) graphs.push_back(ids[kGraph]);
      if (auto it = row_of_.find(ids); it != row_of_.end()) {
        rows_[it->second].validity.set(bit);
        continue;
      }
      CondensedQuad row{ids[0], ids[1], ids[2], ids[3], Validity::single(versions_, versions_)};
      insert_row(std::move(row));
    }

    if (!graphs.empty()) {
      const TermId in_version = dict_.intern(Term::iri(std::string(kInVersionIri)));
      const TermId version_of = dict_.intern(Term::iri(std::string(kVersionOfIri)));
      const TermId version_literal = dict_.intern(Term::literal(std::to_string(versions_)));
      for (TermId g : graphs) {
        TermId vng = dict_.intern(Term::iri(std::string(kVngIriPrefix) + std::to_string(vngs_.size() + 1)));
        register_vng({vng, g, versions_});
        metadata_.push_back({vng, in_version, version_literal});
        metadata_.push_back({vng, version_of, g});
      }
    }
    return versions_;
  }

  /// Visits every stored quad agreeing with the bound positions of `key`,
  /// served by a range scan over the index led by those positions.
  template <class Fn>
  void for_each_quad(const QuadPatternKey& key, Fn&& fn, ScanStats* stats = nullptr) const {
    const QuadOrder order = choose_order(key.mask());
    const auto& index = indexes_[static_cast<std::size_t>(order)];
    const auto pos = order_positions(order);
    std::size_t prefix_len = static_cast<std::size_t>(std::popcount(key.mask()));

    detail::IndexEntry probe{{0, 0, 0, 0}, 0};
    for (std::size_t i = 0; i < prefix_len; ++i) probe.key[i] = key.bound[pos[i]]->value;
    for (auto it = index.lower_bound(probe); it != index.end(); ++it) {
      if (stats) ++stats->entries_touched;
      if (!std::equal(probe.key.begin(), probe.key.begin() + static_cast<std::ptrdiff_t>(prefix_len),
                      it->key.begin()))
        break;
      if (stats) ++stats->rows_matched;
      fn(rows_[it->row]);
    }
  }

  std::vector<CondensedQuad> quads_matching(const QuadPatternKey& key, ScanStats* stats = nullptr) const {
    std::vector<CondensedQuad> out;
    for_each_quad(key, [&out](const CondensedQuad& q) { out.push_back(q); }, stats);
    return out;
  }

  std::vector<MetadataTriple> metadata_matching(const TriplePatternKey& key, ScanStats* stats = nullptr) const {
    std::vector<MetadataTriple> out;
    for (const auto& t : metadata_) {
      if (stats) ++stats->entries_touched;
      if (key.matches(t)) {
        if (stats) ++stats->rows_matched;
        out.push_back(t);
      }
    }
    return out;
  }

  /// Registry entries of `graph`, ascending by version.
  std::vector<VersionedNamedGraph> vng_for_graph(TermId graph) const {
    std::vector<VersionedNamedGraph> out;
    if (auto it = by_graph_.find(graph); it != by_graph_.end())
      for (auto idx : it->second) out.push_back(vngs_[idx]);
    return out;
  }

  std::optional<TermId> find_vng(TermId graph, std::size_t version) const {
    if (auto it = by_graph_.find(graph); it != by_graph_.end())
      for (auto idx : it->second)
        if (vngs_[idx].version == version) return vngs_[idx].vng;
    return std::nullopt;
  }

  std::optional<VersionedNamedGraph> vng_entry(TermId vng) const {
    if (auto it = by_vng_.find(vng); it != by_vng_.end()) return vngs_[it->second];
    return std::nullopt;
  }

  StoreStats stats() const {
    StoreStats s;
    s.versions = versions_;
    s.quad_count = rows_.size();
    s.term_count = dict_.size();
    s.vng_count = vngs_.size();
    for (const auto& r : rows_) s.flat_row_count += r.validity.popcount();
    return s;
  }

  // Persistence -------------------------------------------------------------

  void save(std::ostream& out) const {
    out << "condyr-archive\t" << kFormatVersion << '\n';
    out << "versions\t" << versions_ << '\n';
    for (std::size_t v = 0; v < labels_.size(); ++v) out << "label\t" << v + 1 << '\t' << escape_string(labels_[v]) << '\n';
    out << "terms\t" << dict_.size() << '\n';
    std::uint32_t id = 0;
    for (const auto& t : dict_.terms()) {
      static constexpr std::array<std::string_view, 3> kinds = {"iri", "literal", "blank"};
      out << "term\t" << ++id << '\t' << kinds[static_cast<std::size_t>(t.kind)] << '\t' << escape_string(t.lexical)
          << '\t' << escape_string(t.datatype.value_or("")) << '\t' << escape_string(t.lang.value_or("")) << '\n';
    }
    out << "quads\t" << rows_.size() << '\n';
    for (const auto& r : rows_)
      out << "quad\t" << r.subject.value << '\t' << r.predicate.value << '\t' << r.object.value << '\t'
          << r.graph.value << '\t' << r.validity.to_string() << '\n';
    out << "vngs\t" << vngs_.size() << '\n';
    for (const auto& v : vngs_) out << "vng\t" << v.vng.value << '\t' << v.graph.value << '\t' << v.version << '\n';
    out << "metadata\t" << metadata_.size() << '\n';
    for (const auto& m : metadata_)
      out << "meta\t" << m.subject.value << '\t' << m.predicate.value << '\t' << m.object.value << '\n';
    out << "end\n";
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    save(out);
    out.flush();
    if (!out) throw Error("write failed: " + path.string());
  }

  std::string save_to_string() const {
    std::ostringstream out;
    save(out);
    return out.str();
  }

  /// Reads an archive produced by save(). Throws FormatError on any defect.
  static Store load(std::istream& in) {
    Loader loader(in);
    return loader.run();
  }

  static Store load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return load(in);
  }

  static Store load_from_string(const std::string& text) {
    std::istringstream in(text);
    return load(in);
  }

 private:
  class Loader {
   public:
    explicit Loader(std::istream& in) : in_(in) {}

    Store run() {
      Store s;
      auto header = fields("condyr-archive", 2);
      if (header[1] != std::to_string(kFormatVersion))
        throw FormatError("unsupported archive format version " + std::string(header[1]));
      s.versions_ = number(fields("versions", 2)[1]);
      for (std::size_t v = 1; v <= s.versions_; ++v) {
        auto f = fields("label", 3);
        if (number(f[1]) != v) fail("label records out of order");
        s.labels_.push_back(unescape(f[2]));
      }
      const std::size_t terms = number(fields("terms", 2)[1]);
      for (std::size_t i = 1; i <= terms; ++i) {
        auto f = fields("term", 6);
        if (number(f[1]) != i) fail("term ids must be dense and ordered");
        Term t;
        if (f[2] == "iri") t.kind = TermKind::Iri;
        else if (f[2] == "literal") t.kind = TermKind::Literal;
        else if (f[2] == "blank") t.kind = TermKind::Blank;
        else fail("unknown term kind");
        t.lexical = unescape(f[3]);
        if (!f[4].empty()) t.datatype = unescape(f[4]);
        if (!f[5].empty()) t.lang = unescape(f[5]);
        if (t.kind != TermKind::Literal && (t.datatype || t.lang)) fail("non-literal term with datatype or language");
        if (s.dict_.intern(t).value != i) fail("duplicate term");
      }
      const std::size_t quads = number(fields("quads", 2)[1]);
      for (std::size_t i = 0; i < quads; ++i) {
        auto f = fields("quad", 6);
        QuadIds ids = {id(f[1], s), id(f[2], s), id(f[3], s), id(f[4], s)};
        if (f[5].size() != s.versions_) fail("validity length differs from version count");
        Validity bits;
        try {
          bits = Validity::from_string(f[5]);
        } catch (const std::invalid_argument&) {
          fail("malformed validity");
        }
        if (bits.none()) fail("stored quad with empty validity");
        if (s.row_of_.count(ids)) fail("duplicate quad");
        s.insert_row({ids[0], ids[1], ids[2], ids[3], std::move(bits)});
      }
      const std::size_t vngs = number(fields("vngs", 2)[1]);
      for (std::size_t i = 0; i < vngs; ++i) {
        auto f = fields("vng", 4);
        VersionedNamedGraph v{id(f[1], s), id(f[2], s), number(f[3])};
        if (v.version == 0 || v.version > s.versions_) fail("vng version out of range");
        if (s.find_vng(v.graph, v.version)) fail("duplicate vng");
        s.register_vng(v);
      }
      const std::size_t meta = number(fields("metadata", 2)[1]);
      for (std::size_t i = 0; i < meta; ++i) {
        auto f = fields("meta", 4);
        s.metadata_.push_back({id(f[1], s), id(f[2], s), id(f[3], s)});
      }
      fields("end", 1);
      std::string rest;
      if (std::getline(in_, rest) && !rest.empty()) fail("trailing data after end record");
      return s;
    }

   private:
    [[noreturn]] void fail(const std::string& msg) const {
      throw FormatError("archive line " + std::to_string(line_no_) + ": " + msg);
    }

    std::vector<std::string_view> fields(std::string_view tag, std::size_t count) {
      if (!std::getline(in_, line_)) fail("truncated archive (expected '" + std::string(tag) + "')");
      ++line_no_;
      auto f = detail::split_tabs(line_);
      if (f.size() != count || f[0] != tag) fail("expected '" + std::string(tag) + "' record");
      return f;
    }

    std::size_t number(std::string_view s) const {
      if (s.empty() || s.size() > 18) fail("invalid number");
      std::size_t n = 0;
      for (char c : s) {
        if (c < '0' || c > '9') fail("invalid number");
        n = n * 10 + static_cast<std::size_t>(c - '0');
      }
      return n;
    }

    TermId id(std::string_view s, const Store& store) const {
      TermId t(static_cast<std::uint32_t>(number(s)));
      if (!store.dict_.contains(t)) fail("reference to unknown term id");
      return t;
    }

    std::string unescape(std::string_view s) const {
      std::string out;
      if (!detail::unescape_string(s, out)) fail("malformed escape");
      return out;
    }

    std::istream& in_;
    std::string line_;
    std::size_t line_no_ = 0;
  };

  void insert_row(CondensedQuad row) {
    const auto row_index = static_cast<std::uint32_t>(rows_.size());
    const QuadIds ids = row.ids();
    for (QuadOrder order : kQuadOrders) {
      auto pos = order_positions(order);
      detail::IndexEntry e{{ids[pos[0]].value, ids[pos[1]].value, ids[pos[2]].value, ids[pos[3]].value}, row_index};
      indexes_[static_cast<std::size_t>(order)].insert(e);
    }
    row_of_.emplace(ids, row_index);
    rows_.push_back(std::move(row));
  }

  void register_vng(const VersionedNamedGraph& v) {
    const auto idx = static_cast<std::uint32_t>(vngs_.size());
    vngs_.push_back(v);
    by_graph_[v.graph].push_back(idx);
    by_vng_.emplace(v.vng, idx);
  }

  Dictionary dict_;
  std::size_t versions_ = 0;
  std::vector<std::string> labels_;
  std::vector<CondensedQuad> rows_;
  std::unordered_map<QuadIds, std::uint32_t, detail::QuadIdsHash> row_of_;
  std::array<std::set<detail::IndexEntry>, 6> indexes_;
  std::vector<VersionedNamedGraph> vngs_;
  std::unordered_map<TermId, std::vector<std::uint32_t>> by_graph_;
  std::unordered_map<TermId, std::uint32_t> by_vng_;
  std::vector<MetadataTriple> metadata_;
};

/// Reads an N-Quads file and ingests it as the next version.
inline std::size_t ingest_nquads_file(Store& store, const std::filesystem::path& path,
                                      const NQuadsOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<TermQuad> quads;
  try {
    quads = parse_nquads(in, options);
  } catch (const NQuadsError& e) {
    throw NQuadsError(e.line(), e.column(), path.string() + ": " + e.message());
  }
  IngestOptions ingest;
  ingest.label = path.filename().string();
  return store.ingest_version(quads, ingest);
}

}  // namespace condyr
