#include <string>

#include <gtest/gtest.h>

#include "condyr/planner.hpp"
#include "condyr/sample.hpp"
#include "condyr/sparql.hpp"

using namespace condyr;

namespace {

class PlannerTest : public ::testing::Test {
 protected:
  PlanPtr plan(std::string_view q) { return Planner(store).plan(*parse(q)); }
  std::string explained(std::string_view q) { return explain(*plan(q)); }

  Store store = sample::load();
};

const ColumnSpec& column(const PlanNode& n, const std::string& var) {
  const ColumnSpec* c = find_column(n.schema, var);
  EXPECT_NE(c, nullptr) << var;
  return *c;
}

}  // namespace

TEST_F(PlannerTest, SinglePatternKeepsGraphCondensed) {
  EXPECT_EQ(explained(sample::kKnows),
            "Finalize [s, o, g] -> v$s v$o ng$g bs$g\n"
            "  Scan versioned_quad (?s, <ex:knows>#2, ?o, ?g) -> v$s v$o ng$g bs$g\n");
}

TEST_F(PlannerTest, SharedGraphVariableJoinsOnBits) {
  EXPECT_EQ(explained(sample::kKnowsLikes),
            "Finalize [s, o, g, liked] -> v$s v$o ng$g bs$g v$liked\n"
            "  BitJoin ids=[o] graphs=[g] -> v$s v$o ng$g bs$g v$liked\n"
            "    Scan versioned_quad (?s, <ex:knows>#2, ?o, ?g) -> v$s v$o ng$g bs$g\n"
            "    Scan versioned_quad (?o, <ex:likes>#5, ?liked, ?g) -> v$o v$liked ng$g bs$g\n");
}

TEST_F(PlannerTest, MetadataJoinLowersCondensedSide) {
  EXPECT_EQ(explained(sample::kKnowsInVersion),
            "Finalize [s, o, g, v] -> v$s v$o v$g v$v\n"
            "  BitJoin ids=[g] graphs=[] -> v$s v$o v$g v$v\n"
            "    Lower ?g -> v$s v$o v$g\n"
            "      Scan versioned_quad (?s, <ex:knows>#2, ?o, ?g) -> v$s v$o ng$g bs$g\n"
            "    Scan metadata (?g, <v:in-version>#7, ?v) -> v$g v$v\n");
}

TEST_F(PlannerTest, MetadataOnLeftLowersRightSide) {
  auto p = plan("?g <v:in-version> ?v <ng:Metadata> . ?s <ex:knows> ?o ?g .");
  const auto& join = std::get<BitJoinOp>(std::get<FinalizeOp>(p->op).sub->op);
  EXPECT_TRUE(std::holds_alternative<ScanOp>(join.left->op));
  EXPECT_TRUE(std::holds_alternative<LowerOp>(join.right->op));
  EXPECT_EQ(join.id_keys, (std::vector<std::string>{"g"}));
}

TEST_F(PlannerTest, GroupByCountsMultiplicity) {
  EXPECT_EQ(explained(sample::kCountKnown),
            "Finalize [o, count] -> v$o v$count\n"
            "  GroupBy keys=[o] aggregates=[agg0=COUNT(?s)] multiplicity=[g] -> v$o agg0\n"
            "    Scan versioned_quad (?s, <ex:knows>#2, ?o, ?g) -> v$s v$o ng$g bs$g\n");
}

TEST_F(PlannerTest, GroupingOnGraphLowersIt) {
  auto p = plan("SELECT ?g (COUNT(*) AS ?n) WHERE { ?s ?p ?o ?g } GROUP BY ?g");
  const auto& group = std::get<GroupByOp>(std::get<FinalizeOp>(p->op).sub->op);
  EXPECT_TRUE(std::holds_alternative<LowerOp>(group.sub->op));
  EXPECT_TRUE(group.multiplicity.empty());
  EXPECT_EQ(column(*p, "g").repr, Repr::Id);
  EXPECT_EQ(column(*p, "n").kind, ValueKind::Count);
}

TEST_F(PlannerTest, BoundGraphGetsHiddenVariable) {
  auto p = plan("SELECT ?s WHERE { ?s <ex:knows> ?o <:g1> . ?o <ex:likes> ?x <:g1> . }");
  const auto text = explain(*p);
  EXPECT_NE(text.find("<:g1>#4"), std::string::npos);
  EXPECT_NE(text.find("Lower ?$q0"), std::string::npos);
  EXPECT_NE(text.find("Lower ?$q1"), std::string::npos);
  // The two bound graphs never join on their bits.
  EXPECT_NE(text.find("graphs=[]"), std::string::npos);
  EXPECT_EQ(p->schema.size(), 1u);
}

TEST_F(PlannerTest, UnprojectedGraphIsLowered) {
  auto p = plan("SELECT ?s WHERE { ?s <ex:knows> ?o ?g }");
  const auto& fin = std::get<FinalizeOp>(p->op);
  EXPECT_EQ(std::get<LowerOp>(fin.sub->op).var, "g");
  EXPECT_EQ(physical_columns(p->schema), (std::vector<PhysicalColumn>{{"v$s", CellKind::Id, "s"}}));
}

TEST_F(PlannerTest, UnknownTermMakesEmptyScan) {
  auto p = plan("?s <ex:unknown> ?o ?g .");
  const auto& scan = std::get<ScanOp>(std::get<FinalizeOp>(p->op).sub->op);
  EXPECT_TRUE(scan.empty);
  EXPECT_FALSE(scan.bound_ids[1].has_value());
  EXPECT_NE(explain(*p).find("<ex:unknown>#?"), std::string::npos);
}

TEST_F(PlannerTest, UnknownVariablesAreRejected) {
  EXPECT_THROW(plan("SELECT ?nope WHERE { ?s ?p ?o ?g }"), UnknownVariable);
  EXPECT_THROW(plan("SELECT (COUNT(?nope) AS ?n) WHERE { ?s ?p ?o ?g }"), UnknownVariable);
  EXPECT_THROW(plan("SELECT ?nope (COUNT(*) AS ?n) WHERE { ?s ?p ?o ?g } GROUP BY ?nope"), UnknownVariable);
}

TEST_F(PlannerTest, PlanningIsDeterministic) {
  Planner planner(store);
  auto tree = parse("SELECT ?s WHERE { ?s <ex:knows> ?o <:g1> . ?o <ex:likes> ?x <:g1> . }");
  EXPECT_EQ(explain(*planner.plan(*tree)), explain(*planner.plan(*tree)));
}

TEST(PlanSchema, CondensedVariablesUseTwoColumns) {
  Schema s = {{"s", Repr::Id, ValueKind::Term, {}}, {"g", Repr::Condensed, ValueKind::Term, {}},
              {"n", Repr::Id, ValueKind::Count, "agg0"}};
  EXPECT_EQ(physical_columns(s),
            (std::vector<PhysicalColumn>{{"v$s", CellKind::Id, "s"},
                                         {"ng$g", CellKind::Graph, "g"},
                                         {"bs$g", CellKind::Bits, "g"},
                                         {"agg0", CellKind::Count, "n"}}));
  EXPECT_LT(Repr::Id, Repr::Condensed);
}
