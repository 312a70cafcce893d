// Acceptance suite: prints one PASS/FAIL/SKIP line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <sys/wait.h>

#include "condyr/condyr.hpp"

using namespace condyr;
namespace fs = std::filesystem;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Result {
  Verdict verdict = Verdict::Pass;
  std::string summary;
  std::vector<std::string> problems;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      verdict = Verdict::Fail;
      problems.push_back(what);
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

// 1: the sample store and its four queries, checked term for term.
Result golden_sample() {
  Result r;
  const auto start = Clock::now();
  const auto checks = golden_checks();
  const double secs = seconds_since(start);
  for (const auto& c : checks) r.require(c.ok, c.name + "\n" + c.detail);
  r.require(secs < 1.0, "took " + fixed(secs) + " s");
  // The knows/in-version rows for :alice bind ?o to :bob, the object the
  // data actually contains.
  r.summary = std::to_string(checks.size()) + " sample queries in " + fixed(secs) + " s";
  return r;
}

// 2: condensed execution, flattened, equals the flat oracle.
Result oracle_equivalence() {
  Result r;
  const std::size_t rounds = 600;
  const auto start = Clock::now();
  const auto outcome = random_rounds(rounds, 20240601);
  const double secs = seconds_since(start);
  r.require(outcome.rounds >= 500, "only " + std::to_string(outcome.rounds) + " rounds");
  r.require(outcome.ok(), std::to_string(outcome.failures) + " failing rounds\n" + outcome.counterexample);
  r.require(secs < 60.0, "took " + fixed(secs) + " s");
  r.summary = std::to_string(outcome.rounds - outcome.failures) + "/" + std::to_string(outcome.rounds) +
              " rounds agree in " + fixed(secs, 2) + " s";
  return r;
}

// 3: condensed storage is smaller than flat storage once versions overlap.
Result storage_trend() {
  Result r;
  std::mt19937 rng(3);
  std::size_t datasets = 0, condensed = 0, flat = 0;
  for (double overlap : {0.5, 0.65, 0.8, 0.95}) {
    for (std::size_t versions : {3u, 5u, 10u}) {
      workload::StoreShape shape;
      shape.versions = versions;
      shape.quads_per_version = 200;
      shape.subjects = 40;
      shape.predicates = 6;
      shape.graphs = 3;
      shape.overlap = overlap;
      const auto snaps = workload::snapshots(shape, rng);
      Store store;
      std::set<std::tuple<std::string, std::string, std::string, std::string>> distinct;
      for (const auto& snap : snaps) {
        store.ingest_version(snap);
        for (const auto& q : snap)
          distinct.emplace(to_ntriples(q.subject), to_ntriples(q.predicate), to_ntriples(q.object),
                           to_ntriples(q.graph));
      }
      const auto s = store.stats();
      const std::string label = "overlap " + fixed(overlap, 2) + ", V=" + std::to_string(versions);
      r.require(s.quad_count < s.flat_row_count, label + ": quads " + std::to_string(s.quad_count) +
                                                      " not below flat rows " + std::to_string(s.flat_row_count));
      r.require(s.quad_count == distinct.size(), label + ": quads " + std::to_string(s.quad_count) +
                                                      " but distinct " + std::to_string(distinct.size()));
      ++datasets;
      condensed += s.quad_count;
      flat += s.flat_row_count;
    }
  }
  r.summary = std::to_string(datasets) + " datasets, " + std::to_string(condensed) + " condensed quads vs " +
              std::to_string(flat) + " flat rows";
  return r;
}

// 4: bitstring algebra behind joins and lowering.
Result bit_semantics() {
  Result r;
  std::mt19937 rng(4);

  std::size_t pairs = 0;
  for (; pairs < 2000; ++pairs) {
    const std::size_t n = 1 + rng() % 130;
    Validity a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rng() & 1) a.set(i);
      if (rng() & 1) b.set(i);
    }
    const Validity c = a & b;
    bool ok = c.size() == n;
    for (std::size_t i = 0; ok && i < n; ++i) ok = c.test(i) == (a.test(i) && b.test(i));
    if (!ok) {
      r.require(false, "AND mismatch: " + a.to_string() + " & " + b.to_string() + " = " + c.to_string());
      break;
    }
  }

  std::size_t rows = 0, zero_rows = 0, round_trips = 0, ingests = 0;
  for (int round = 0; round < 300; ++round) {
    const auto shape = workload::random_shape(rng);
    Store store;
    for (const auto& snap : workload::snapshots(shape, rng)) {
      store.ingest_version(snap);
      ++ingests;
      for (const auto& q : store.quads())
        if (q.validity.size() != store.version_count()) {
          r.require(false, "validity length " + std::to_string(q.validity.size()) + " after " +
                               std::to_string(store.version_count()) + " versions");
          break;
        }
    }

    const auto p = prepare(store, workload::random_query(rng, shape));
    const auto rt = execute(*p.plan, store);
    for (const auto& row : rt.rows) {
      ++rows;
      for (const auto& cell : row)
        if (auto* bits = std::get_if<Validity>(&cell); bits && bits->none()) ++zero_rows;
    }

    // Lower every quad to (quad, versioned graph) rows and condense back.
    const auto all = prepare(store, "?s ?p ?o ?g .");
    const auto condensed = execute(*all.plan, store);
    std::map<std::tuple<TermId, TermId, TermId, TermId>, Validity> rebuilt;
    for (const auto& fr : flatten(condensed, store)) {
      const auto entry = store.vng_entry(std::get<TermId>(fr.bindings.at("g")));
      auto key = std::make_tuple(std::get<TermId>(fr.bindings.at("s")), std::get<TermId>(fr.bindings.at("p")),
                                 std::get<TermId>(fr.bindings.at("o")), entry->graph);
      rebuilt.try_emplace(key, store.version_count()).first->second.set(entry->version - 1);
    }
    bool same = rebuilt.size() == store.quads().size();
    for (const auto& q : store.quads()) {
      auto it = rebuilt.find({q.subject, q.predicate, q.object, q.graph});
      same = same && it != rebuilt.end() && it->second == q.validity;
    }
    r.require(same, "lower/recondense changed the store in round " + std::to_string(round));
    round_trips += same;
  }
  r.require(zero_rows == 0, std::to_string(zero_rows) + " emitted bitstrings with popcount 0");
  r.summary = std::to_string(pairs) + " AND pairs, " + std::to_string(rows) + " rows without empty bitstrings, " +
              std::to_string(round_trips) + " round trips, " + std::to_string(ingests) + " ingests";
  return r;
}

// 5: SQL markers and deterministic emission.
Result sql_emission() {
  Result r;
  const Store store = sample::load();
  const std::vector<std::pair<std::string_view, std::vector<std::string>>> cases = {
      {sample::kKnows, {"bit_count(t0.validity) <> 0"}},
      {sample::kKnowsLikes, {"(t0.validity & t1.validity)"}},
      {sample::kKnowsInVersion, {"get_bit(", "index_version - 1"}},
      {sample::kCountKnown, {"SUM(bit_count("}},
  };
  std::size_t markers = 0;
  for (const auto& [query, needles] : cases) {
    const auto plan = prepare(store, query).plan;
    const std::string text = emit_sql(*plan).text;
    for (const auto& n : needles) {
      r.require(text.find(n) != std::string::npos, "missing \"" + n + "\" in:\n" + text);
      ++markers;
    }
    for (int i = 0; i < 5; ++i) {
      const Store again = sample::load();
      r.require(emit_sql(*prepare(again, query).plan).text == text, "emission differs between runs");
    }
  }
  r.summary = std::to_string(markers) + " markers found, output byte-identical over 6 runs";
  return r;
}

struct Shell {
  int code = -1;
  std::string out;
};

Shell shell(const std::string& cmd) {
  Shell s;
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) return s;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) s.out.append(buf.data(), n);
  const int status = pclose(pipe);
  s.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return s;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

std::vector<std::string> id_rows(const ResultTable& rt) {
  std::vector<std::string> out;
  for (const auto& row : rt.rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += '\t';
      if (auto* id = std::get_if<TermId>(&row[i])) line += std::to_string(id->value);
      else if (auto* bits = std::get_if<Validity>(&row[i])) line += bits->to_string();
      else line += std::to_string(std::get<std::int64_t>(row[i]));
    }
    out.push_back(line);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// 6: the emitted SQL on a PostgreSQL backend, when one is configured.
Result postgres_integration() {
  Result r;
  const char* url = std::getenv("CONDYR_PG_URL");
  if (!url || !*url) {
    r.verdict = Verdict::Skip;
    r.summary = "CONDYR_PG_URL not set";
    return r;
  }
  const std::string psql = "psql -X -q -v ON_ERROR_STOP=1 " + shell_quote(url);
  const Store store = sample::load();
  const fs::path dir = fs::temp_directory_path() / "condyr_acceptance_pg";
  fs::remove_all(dir);
  fs::create_directories(dir);

  {
    std::ofstream setup(dir / "setup.sql");
    for (auto it = kSqlTables.rbegin(); it != kSqlTables.rend(); ++it) setup << "DROP TABLE IF EXISTS " << *it << ";\n";
    setup << emit_schema_ddl(store.version_count());
    for (const auto& path : export_csv(store, dir))
      setup << "\\copy " << path.stem().string() << " FROM '" << path.string() << "' WITH (FORMAT csv, HEADER true)\n";
  }
  const Shell setup = shell(psql + " -f " + shell_quote((dir / "setup.sql").string()));
  r.require(setup.code == 0, "schema or bulk load failed:\n" + setup.out);

  std::size_t agreeing = 0;
  if (setup.code == 0) {
    for (auto query : {sample::kKnows, sample::kKnowsLikes, sample::kKnowsInVersion, sample::kCountKnown}) {
      const auto p = prepare(store, query);
      const fs::path file = dir / "query.sql";
      std::ofstream(file) << emit_sql(*p.plan).text << ";\n";
      const Shell got = shell(psql + " -A -t -F '\t' -f " + shell_quote(file.string()));
      std::vector<std::string> lines;
      std::istringstream in(got.out);
      for (std::string line; std::getline(in, line);)
        if (!line.empty()) lines.push_back(line);
      std::sort(lines.begin(), lines.end());
      const bool ok = got.code == 0 && lines == id_rows(execute(*p.plan, store));
      r.require(ok, "backend rows differ for:\n" + std::string(query) + got.out);
      agreeing += ok;
    }
  }
  fs::remove_all(dir);
  r.summary = std::to_string(agreeing) + "/4 golden queries agree with the embedded executor";
  return r;
}

// 7: relative scan work on a 10-version dataset with 80% overlap.
Result performance_smoke() {
  Result r;
  std::mt19937 rng(7);
  workload::StoreShape shape;
  shape.versions = 10;
  shape.quads_per_version = 400;
  shape.subjects = 60;
  shape.predicates = 2;
  shape.graphs = 3;
  shape.overlap = 0.8;
  auto snaps = workload::snapshots(shape, rng);
  // Give the two predicates the vocabulary of the golden join query.
  for (auto& snap : snaps)
    for (auto& q : snap) q.predicate = Term::iri(q.predicate == workload::predicate_term(0) ? "ex:knows" : "ex:likes");
  Store store;
  for (const auto& snap : snaps) store.ingest_version(snap);

  const auto p = prepare(store, sample::kKnowsLikes);
  ExecStats exec;
  const auto rt = execute(*p.plan, store, &exec);
  OracleStats oracle;
  const auto want = evaluate(*p.algebra, materialize_flat(store), &oracle);
  r.require(same_bag(flatten(rt, store), want), "join results differ from the oracle");
  r.require(!want.empty(), "join query has no answers");
  r.require(2 * exec.rows_scanned <= oracle.rows_scanned,
            "condensed scanned " + std::to_string(exec.rows_scanned) + " rows, flat " +
                std::to_string(oracle.rows_scanned));

  const std::size_t n = store.quads().size();
  const std::size_t slack = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n)))) + 1;
  std::size_t probes = 0, worst_excess = 0;
  for (std::size_t i = 0; i < n; i += 7) {
    const auto ids = store.quads()[i].ids();
    for (unsigned mask = 1; mask < 16; ++mask) {
      QuadPatternKey key;
      for (std::size_t pos = 0; pos < 4; ++pos)
        if (mask & (1u << pos)) key.bound[pos] = ids[pos];
      ScanStats ss;
      std::size_t seen = 0;
      store.for_each_quad(key, [&](const CondensedQuad&) { ++seen; }, &ss);
      ++probes;
      const std::size_t excess = ss.entries_touched - std::min(ss.entries_touched, seen);
      worst_excess = std::max(worst_excess, excess);
      if (ss.entries_touched > seen + slack) {
        r.require(false, "pattern mask " + std::to_string(mask) + " touched " + std::to_string(ss.entries_touched) +
                             " entries for " + std::to_string(seen) + " matches");
      }
    }
  }
  r.summary = "join scanned " + std::to_string(exec.rows_scanned) + " condensed vs " +
              std::to_string(oracle.rows_scanned) + " flat rows; " + std::to_string(probes) +
              " point patterns touched at most " + std::to_string(worst_excess) + " extra entries (bound " +
              std::to_string(slack) + ", n=" + std::to_string(n) + ")";
  return r;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"golden sample reproduction", golden_sample},
      {"oracle equivalence", oracle_equivalence},
      {"storage trend", storage_trend},
      {"bit semantics", bit_semantics},
      {"SQL emission", sql_emission},
      {"PostgreSQL integration", postgres_integration},
      {"performance smoke", performance_smoke},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r.verdict = Verdict::Fail;
      r.problems.push_back(std::string("exception: ") + e.what());
    }
    const char* tag = r.verdict == Verdict::Pass ? "PASS" : r.verdict == Verdict::Skip ? "SKIP" : "FAIL";
    std::cout << tag << " " << (i + 1) << " " << criteria[i].first;
    if (!r.summary.empty()) std::cout << ": " << r.summary;
    std::cout << '\n';
    for (const auto& p : r.problems) std::cout << "    " << p << '\n';
    failed += r.verdict == Verdict::Fail;
  }
  return failed == 0 ? 0 : 1;
}
