#include <map>
#include <random>
#include <tuple>

#include <gtest/gtest.h>

#include "condyr/flat_oracle.hpp"
#include "condyr/nquads.hpp"
#include "condyr/sample.hpp"
#include "condyr/selftest.hpp"
#include "condyr/workload.hpp"

using namespace condyr;

namespace {

std::vector<std::string> oracle(const Store& store, std::string_view q, OracleStats* stats = nullptr) {
  return describe_all(evaluate(*parse(q), materialize_flat(store), stats), store);
}

}  // namespace

TEST(FlatOracle, OneRowPerQuadAndVersion) {
  const Store store = sample::load();
  const FlatStore flat = materialize_flat(store);
  EXPECT_EQ(flat.rows.size(), 10u);
  EXPECT_EQ(flat.rows.size(), store.stats().flat_row_count);
  EXPECT_EQ(flat.metadata.size(), store.metadata().size());
  for (const auto& r : flat.rows) {
    auto entry = store.vng_entry(r.vng);
    ASSERT_TRUE(entry.has_value());
    EXPECT_EQ(entry->graph, r.graph);
    EXPECT_EQ(entry->version, r.version);
  }
}

TEST(FlatOracle, BitPositionIsVersionMinusOne) {
  Store store;
  const auto q = parse_nquads("<:a> <:p> <:b> <:g> .\n");
  const auto other = parse_nquads("<:c> <:p> <:d> <:g> .\n");
  store.ingest_version(other);
  store.ingest_version(q);
  store.ingest_version(other);
  const FlatStore flat = materialize_flat(store);
  std::size_t seen = 0;
  for (const auto& r : flat.rows)
    if (store.dictionary().resolve(r.subject) == Term::iri(":a")) {
      EXPECT_EQ(r.version, 2u);
      ++seen;
    }
  EXPECT_EQ(seen, 1u);
  for (const auto& cq : store.quads())
    if (store.dictionary().resolve(cq.subject) == Term::iri(":a")) {
      EXPECT_EQ(cq.validity.to_string(), "010");
    }
}

TEST(FlatOracle, SampleQueries) {
  const Store store = sample::load();
  EXPECT_EQ(oracle(store, sample::kKnows),
            (std::vector<std::string>{"{g=<:g1>@1, o=<:bob>, s=<:alice>}", "{g=<:g1>@2, o=<:bob>, s=<:alice>}",
                                      "{g=<:g1>@3, o=<:bob>, s=<:alice>}", "{g=<:g2>@2, o=<:carol>, s=<:bob>}",
                                      "{g=<:g2>@3, o=<:alice>, s=<:carol>}", "{g=<:g2>@3, o=<:carol>, s=<:bob>}"}));
  EXPECT_EQ(oracle(store, sample::kKnowsLikes),
            (std::vector<std::string>{"{g=<:g1>@2, liked=\"pizza\", o=<:bob>, s=<:alice>}",
                                      "{g=<:g1>@3, liked=\"pizza\", o=<:bob>, s=<:alice>}"}));
  EXPECT_EQ(oracle(store, sample::kCountKnown),
            (std::vector<std::string>{"{count=1, o=<:alice>}", "{count=2, o=<:carol>}", "{count=3, o=<:bob>}"}));
}

TEST(FlatOracle, EveryPatternScansEverything) {
  const Store store = sample::load();
  OracleStats stats;
  oracle(store, sample::kKnowsLikes, &stats);
  EXPECT_EQ(stats.rows_scanned, 20u);
  stats = {};
  oracle(store, sample::kKnowsInVersion, &stats);
  EXPECT_EQ(stats.rows_scanned, 10u + store.metadata().size());
}

TEST(FlatOracle, UnknownConstantMatchesNothing) {
  const Store store = sample::load();
  EXPECT_TRUE(oracle(store, "?s <ex:unknown> ?o ?g .").empty());
  EXPECT_EQ(oracle(store, "SELECT (COUNT(*) AS ?n) WHERE { ?s <ex:unknown> ?o ?g }"),
            (std::vector<std::string>{"{n=0}"}));
}

TEST(FlatOracle, BoundGraphMatchesEveryVersion) {
  const Store store = sample::load();
  EXPECT_EQ(oracle(store, "SELECT ?s WHERE { ?s <ex:knows> ?o <:g2> }"),
            (std::vector<std::string>{"{s=<:bob>}", "{s=<:bob>}", "{s=<:carol>}"}));
}

TEST(FlatOracle, CondensingFlatRowsRebuildsStore) {
  std::mt19937 rng(99);
  for (int round = 0; round < 50; ++round) {
    const Store store = workload::random_store(rng);
    std::map<std::tuple<TermId, TermId, TermId, TermId>, Validity> rebuilt;
    for (const auto& r : materialize_flat(store).rows) {
      auto [it, fresh] = rebuilt.try_emplace({r.subject, r.predicate, r.object, r.graph}, store.version_count());
      EXPECT_FALSE(it->second.test(r.version - 1));
      it->second.set(r.version - 1);
    }
    ASSERT_EQ(rebuilt.size(), store.quads().size());
    for (const auto& q : store.quads())
      EXPECT_EQ(rebuilt.at({q.subject, q.predicate, q.object, q.graph}), q.validity);
  }
}
