#include <algorithm>
#include <map>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "condyr/sample.hpp"
#include "condyr/store.hpp"
#include "condyr/workload.hpp"

using namespace condyr;

namespace {

std::map<std::string, std::string> validities(const Store& store) {
  std::map<std::string, std::string> out;
  const auto& d = store.dictionary();
  for (const auto& q : store.quads()) {
    const std::string key = d.resolve(q.subject).lexical + " " + d.resolve(q.predicate).lexical + " " +
                            to_ntriples(d.resolve(q.object)) + " " + d.resolve(q.graph).lexical;
    out[key] = q.validity.to_string();
  }
  return out;
}

TermId id(const Store& s, const Term& t) { return *s.dictionary().lookup(t); }

}  // namespace

TEST(Store, SampleValidities) {
  const Store store = sample::load();
  const std::map<std::string, std::string> want = {
      {":alice ex:knows <:bob> :g1", "111"},   {":bob ex:likes \"pizza\" :g1", "011"},
      {":alice ex:likes \"sushi\" :g1", "101"}, {":carol ex:knows <:alice> :g2", "001"},
      {":bob ex:knows <:carol> :g2", "011"},
  };
  EXPECT_EQ(validities(store), want);
}

TEST(Store, SampleStats) {
  const auto s = sample::load().stats();
  EXPECT_EQ(s.versions, 3u);
  EXPECT_EQ(s.quad_count, 5u);
  EXPECT_EQ(s.vng_count, 5u);
  EXPECT_EQ(s.flat_row_count, 10u);
}

TEST(Store, VersionedNamedGraphRegistry) {
  const Store store = sample::load();
  const TermId g1 = id(store, Term::iri(":g1")), g2 = id(store, Term::iri(":g2"));
  std::vector<std::size_t> versions;
  for (const auto& v : store.vng_for_graph(g1)) versions.push_back(v.version);
  EXPECT_EQ(versions, (std::vector<std::size_t>{1, 2, 3}));
  versions.clear();
  for (const auto& v : store.vng_for_graph(g2)) versions.push_back(v.version);
  EXPECT_EQ(versions, (std::vector<std::size_t>{2, 3}));
  EXPECT_FALSE(store.find_vng(g2, 1).has_value());

  const auto vng = *store.find_vng(g2, 3);
  const auto entry = *store.vng_entry(vng);
  EXPECT_EQ(entry.graph, g2);
  EXPECT_EQ(entry.version, 3u);
}

TEST(Store, MetadataTriplesPerVersionedGraph) {
  const Store store = sample::load();
  ASSERT_EQ(store.metadata().size(), 10u);
  const TermId in_version = *store.in_version_id(), version_of = *store.version_of_id();
  for (const auto& v : store.vngs()) {
    TriplePatternKey k;
    k.bound = {v.vng, in_version, std::nullopt};
    auto rows = store.metadata_matching(k);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(store.dictionary().resolve(rows[0].object), Term::literal(std::to_string(v.version)));
    k.bound = {v.vng, version_of, v.graph};
    EXPECT_EQ(store.metadata_matching(k).size(), 1u);
  }
}

TEST(Store, EmptySnapshotIsRejectedUnlessAllowed) {
  Store store;
  EXPECT_THROW(store.ingest_version({}), EmptySnapshotError);
  EXPECT_EQ(store.version_count(), 0u);
  IngestOptions opts;
  opts.allow_empty = true;
  EXPECT_EQ(store.ingest_version({}, opts), 1u);
  EXPECT_TRUE(store.vngs().empty());
}

TEST(Store, DuplicateQuadsInOneSnapshotCollapse) {
  Store store;
  const TermQuad q{Term::iri(":s"), Term::iri(":p"), Term::iri(":o"), Term::iri(":g")};
  store.ingest_version(std::vector<TermQuad>{q, q});
  EXPECT_EQ(store.quads().size(), 1u);
  EXPECT_EQ(store.stats().flat_row_count, 1u);
}

TEST(Store, ValiditiesKeepUniformLength) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    Store store;
    workload::StoreShape shape;
    shape.versions = 6;
    for (const auto& snap : workload::snapshots(shape, rng)) {
      store.ingest_version(snap);
      for (const auto& q : store.quads()) ASSERT_EQ(q.validity.size(), store.version_count());
    }
  }
}

TEST(Store, EveryBoundCombinationIsAnIndexRangeScan) {
  std::mt19937 rng(23);
  workload::StoreShape shape;
  shape.versions = 4;
  shape.quads_per_version = 40;
  const Store store = workload::build_store(shape, rng);
  const auto all = store.quads();
  ASSERT_GT(all.size(), 20u);

  for (unsigned mask = 0; mask < 16; ++mask) {
    for (int probe = 0; probe < 20; ++probe) {
      const auto& pick = all[rng() % all.size()];
      QuadPatternKey key;
      const QuadIds ids = pick.ids();
      for (std::size_t i = 0; i < 4; ++i)
        if (mask & (1U << i)) key.bound[i] = ids[i];

      ScanStats stats;
      auto got = store.quads_matching(key, &stats);
      std::size_t want = 0;
      for (const auto& q : all) want += key.matches(q.ids()) ? 1 : 0;
      ASSERT_EQ(got.size(), want) << "mask " << mask;
      for (const auto& q : got) ASSERT_TRUE(key.matches(q.ids()));
      ASSERT_LE(stats.entries_touched, want + 1) << "mask " << mask;
    }
  }
}

TEST(Store, UnknownIdsMatchNothing) {
  const Store store = sample::load();
  QuadPatternKey key;
  key.bound[kPredicate] = TermId{9999};
  ScanStats stats;
  EXPECT_TRUE(store.quads_matching(key, &stats).empty());
  EXPECT_LE(stats.entries_touched, 1u);
}

TEST(Store, SaveLoadRoundTrip) {
  const Store store = sample::load();
  const std::string text = store.save_to_string();
  const Store back = Store::load_from_string(text);
  EXPECT_EQ(back.save_to_string(), text);
  EXPECT_EQ(back.stats(), store.stats());
  EXPECT_TRUE(back.dictionary() == store.dictionary());
  EXPECT_EQ(back.version_label(2), "v2.nq");
  QuadPatternKey key;
  key.bound[kPredicate] = id(back, Term::iri("ex:knows"));
  EXPECT_EQ(back.quads_matching(key).size(), 3u);
}

TEST(Store, SavedBytesAreDeterministic) {
  EXPECT_EQ(sample::load().save_to_string(), sample::load().save_to_string());
}

TEST(Store, LoadRejectsMalformedArchives) {
  const std::string good = sample::load().save_to_string();
  EXPECT_THROW(Store::load_from_string(""), FormatError);
  EXPECT_THROW(Store::load_from_string("not-an-archive\t1\n"), FormatError);
  EXPECT_THROW(Store::load_from_string(good.substr(0, good.size() / 2)), FormatError);

  std::string bad_version = good;
  bad_version.replace(bad_version.find("\t1\n"), 3, "\t99\n");
  EXPECT_THROW(Store::load_from_string(bad_version), FormatError);

  std::string bad_bits = good;
  const auto at = bad_bits.find("\t111\n");
  ASSERT_NE(at, std::string::npos);
  bad_bits.replace(at, 5, "\t11\n");
  EXPECT_THROW(Store::load_from_string(bad_bits), FormatError);
}

TEST(Store, IngestAfterLoadContinuesVersioning) {
  Store store = Store::load_from_string(sample::load().save_to_string());
  store.ingest_version(parse_nquads("<:dave> <ex:knows> <:alice> <:g3> .\n"));
  EXPECT_EQ(store.version_count(), 4u);
  for (const auto& q : store.quads()) EXPECT_EQ(q.validity.size(), 4u);
  EXPECT_EQ(store.vngs().size(), 6u);
}
