#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "condyr/condyr.hpp"
#include "condyr/format.hpp"

namespace fs = std::filesystem;
using namespace condyr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUser = 1;
constexpr int kExitInternal = 2;

struct Config {
  std::string store_path = "condyr.store";
  std::string metadata_graph = std::string(kDefaultMetadataGraphIri);
  bool inline_ids = false;
  std::string format = "tsv";
  bool sort = false;
};

/// Failure caused by the invocation rather than by the library.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Store open_store(const Config& cfg) {
  if (!fs::exists(cfg.store_path)) throw UsageError("store not found: " + cfg.store_path);
  return Store::load(fs::path(cfg.store_path));
}

OutputFormat output_format(const Config& cfg) { return cfg.format == "json" ? OutputFormat::Json : OutputFormat::Tsv; }

void print_stats(std::ostream& out, const StoreStats& s, OutputFormat format) {
  if (format == OutputFormat::Json) {
    out << nlohmann::json{{"versions", s.versions},
                          {"quads", s.quad_count},
                          {"terms", s.term_count},
                          {"versioned_named_graphs", s.vng_count},
                          {"flat_rows", s.flat_row_count}}
               .dump()
        << '\n';
    return;
  }
  out << "V=" << s.versions << ", quads=" << s.quad_count << ", flat_rows=" << s.flat_row_count << '\n';
  out << "terms=" << s.term_count << ", versioned_named_graphs=" << s.vng_count << '\n';
}

int cmd_load(const Config& cfg, const std::vector<std::string>& files, bool append) {
  if (files.empty()) throw UsageError("load needs at least one N-Quads file");
  Store store = append && fs::exists(cfg.store_path) ? Store::load(fs::path(cfg.store_path)) : Store{};
  NQuadsOptions nq;
  for (const auto& file : files) {
    nq.blank_scope = "v" + std::to_string(store.version_count() + 1) + "_";
    const std::size_t version = ingest_nquads_file(store, file, nq);
    std::size_t count = 0;
    for (const auto& q : store.quads()) count += q.validity.test(version - 1) ? 1 : 0;
    std::cout << "version " << version << " (" << fs::path(file).filename().string() << "): " << count
              << " quads\n";
  }
  store.save(fs::path(cfg.store_path));
  print_stats(std::cout, store.stats(), output_format(cfg));
  return kExitOk;
}

int cmd_query(const Config& cfg, const std::string& mode, std::string text, const std::string& file) {
  if (!file.empty()) text = read_file(file);
  if (text.empty()) throw UsageError("no query given (use --query, --file or a positional argument)");
  const Store store = open_store(cfg);
  ParseOptions po;
  po.metadata_graph_iri = cfg.metadata_graph;
  const Prepared p = prepare(store, text, po);

  if (mode == "explain") {
    std::cout << explain(*p.plan);
  } else if (mode == "sql") {
    SqlOptions so;
    so.inline_ids = cfg.inline_ids;
    std::cout << emit_sql(*p.plan, so).text;
  } else {
    const ResultTable rt = execute(*p.plan, store);
    write_table(std::cout, decode(rt, store.dictionary()), output_format(cfg), cfg.sort);
  }
  return kExitOk;
}

int cmd_stats(const Config& cfg) {
  print_stats(std::cout, open_store(cfg).stats(), output_format(cfg));
  return kExitOk;
}

struct Timing {
  double mean_ms = 0;
  double median_ms = 0;
};

Timing summarize(std::vector<double> ms) {
  Timing t;
  if (ms.empty()) return t;
  t.mean_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
  std::sort(ms.begin(), ms.end());
  const std::size_t n = ms.size();
  t.median_ms = n % 2 ? ms[n / 2] : (ms[n / 2 - 1] + ms[n / 2]) / 2;
  return t;
}

int cmd_bench(const Config& cfg, const std::string& dir, std::size_t reps, std::size_t warmup) {
  if (reps <= warmup) throw UsageError("--reps must exceed --warmup");
  if (!fs::is_directory(dir)) throw UsageError("query directory not found: " + dir);
  const Store store = open_store(cfg);
  const FlatStore flat = materialize_flat(store);
  ParseOptions po;
  po.metadata_graph_iri = cfg.metadata_graph;

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".rq") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  const bool json = output_format(cfg) == OutputFormat::Json;
  if (!json)
    std::cout << "query\trows\tmean_ms\tmedian_ms\tcondensed_rows_scanned\tflat_rows_scanned\tand_ops\n";
  bool any_failed = false;
  for (const auto& f : files) {
    const std::string name = f.filename().string();
    try {
      const Prepared p = prepare(store, read_file(f), po);
      std::vector<double> ms;
      ExecStats stats;
      std::size_t rows = 0;
      for (std::size_t i = 0; i < reps; ++i) {
        ExecStats run_stats;
        const auto start = std::chrono::steady_clock::now();
        const ResultTable rt = execute(*p.plan, store, &run_stats);
        const auto end = std::chrono::steady_clock::now();
        if (i < warmup) continue;
        ms.push_back(std::chrono::duration<double, std::milli>(end - start).count());
        stats = run_stats;
        rows = rt.rows.size();
      }
      OracleStats oracle;
      evaluate(*p.algebra, flat, &oracle);
      const Timing t = summarize(ms);
      if (json) {
        std::cout << nlohmann::json{{"query", name},
                                    {"rows", rows},
                                    {"runs", ms.size()},
                                    {"mean_ms", t.mean_ms},
                                    {"median_ms", t.median_ms},
                                    {"condensed_rows_scanned", stats.rows_scanned},
                                    {"flat_rows_scanned", oracle.rows_scanned},
                                    {"and_ops", stats.and_ops}}
                         .dump()
                  << '\n';
      } else {
        std::cout << name << '\t' << rows << '\t' << std::fixed << std::setprecision(4) << t.mean_ms << '\t'
                  << t.median_ms << '\t' << stats.rows_scanned << '\t' << oracle.rows_scanned << '\t'
                  << stats.and_ops << '\n';
      }
    } catch (const std::exception& e) {
      any_failed = true;
      std::cerr << name << ": " << e.what() << '\n';
    }
  }
  return any_failed ? kExitUser : kExitOk;
}

int cmd_selftest(std::size_t rounds, std::uint32_t seed, bool inject_fault) {
  ExecOptions exec;
  exec.fault_and_as_or = inject_fault;
  bool ok = true;
  for (const auto& c : golden_checks(exec)) {
    std::cout << (c.ok ? "PASS " : "FAIL ") << c.name << '\n';
    if (!c.ok) {
      std::cout << c.detail;
      ok = false;
    }
  }
  const auto start = std::chrono::steady_clock::now();
  const RandomOutcome r = random_rounds(rounds, seed, exec);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << (r.ok() ? "PASS " : "FAIL ") << "oracle equivalence: " << r.rounds - r.failures << "/" << r.rounds
            << " rounds agree (" << std::fixed << std::setprecision(2) << secs << " s)\n";
  if (!r.ok()) {
    std::cout << "counterexample:\n" << r.counterexample;
    ok = false;
  }
  return ok ? kExitOk : kExitInternal;
}

int cmd_ddl(const Config& cfg, std::size_t versions) {
  if (versions == 0) versions = open_store(cfg).version_count();
  std::cout << emit_schema_ddl(versions);
  return kExitOk;
}

int cmd_export(const Config& cfg, const std::string& out_dir) {
  for (const auto& p : export_csv(open_store(cfg), out_dir)) std::cout << p.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Versioned RDF quad store with condensed validity bitstrings and SPARQL-to-SQL translation"};
  app.require_subcommand(1);

  Config cfg;
  app.add_option("--store", cfg.store_path, "Store archive path")->capture_default_str();
  app.add_option("--metadata-graph", cfg.metadata_graph, "IRI of the metadata graph in queries")
      ->capture_default_str();
  app.add_flag("--inline-ids", cfg.inline_ids, "Inline dictionary ids in emitted SQL");
  app.add_option("--format", cfg.format, "Output format")
      ->check(CLI::IsMember({"tsv", "json"}))
      ->capture_default_str();
  app.add_flag("--sort", cfg.sort, "Sort result rows");

  auto* load = app.add_subcommand("load", "Ingest N-Quads files as successive versions");
  std::vector<std::string> files;
  bool append = false;
  load->add_option("files", files, "One N-Quads file per version, in order");
  load->add_flag("--append", append, "Add versions to an existing store instead of starting fresh");

  auto* query = app.add_subcommand("query", "Execute, translate or explain a query");
  std::string mode = "execute", text, query_file;
  query->add_option("--mode", mode, "execute | sql | explain")
      ->check(CLI::IsMember({"execute", "sql", "explain"}))
      ->capture_default_str();
  query->add_option("--query,-q,query", text, "Query text");
  query->add_option("--file,-f", query_file, "Read the query from a file");

  auto* stats = app.add_subcommand("stats", "Print store statistics");

  auto* bench = app.add_subcommand("bench", "Time every .rq query in a directory");
  std::string queries_dir;
  std::size_t reps = 200, warmup = 50;
  bench->add_option("--queries", queries_dir, "Directory of .rq files")->required();
  bench->add_option("--reps", reps, "Executions per query")->capture_default_str();
  bench->add_option("--warmup", warmup, "Leading executions excluded from timing")->capture_default_str();

  auto* selftest = app.add_subcommand("selftest", "Run the sample checks and randomized oracle rounds");
  std::size_t rounds = 100;
  std::uint32_t seed = 20240601;
  bool inject_fault = false;
  selftest->add_option("--rounds", rounds, "Randomized rounds")->capture_default_str();
  selftest->add_option("--seed", seed, "Random seed")->capture_default_str();
  selftest->add_flag("--inject-fault", inject_fault)->group("");

  auto* ddl = app.add_subcommand("ddl", "Print the relational schema");
  std::size_t ddl_versions = 0;
  ddl->add_option("--versions", ddl_versions, "Bitstring width (default: the store's version count)");

  auto* exp = app.add_subcommand("export", "Write one CSV file per relation");
  std::string out_dir;
  exp->add_option("--out", out_dir, "Output directory")->required();

  for (auto* sub : {load, query, stats, bench, selftest, ddl, exp}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUser;
  }

  try {
    if (*load) return cmd_load(cfg, files, append);
    if (*query) return cmd_query(cfg, mode, text, query_file);
    if (*stats) return cmd_stats(cfg);
    if (*bench) return cmd_bench(cfg, queries_dir, reps, warmup);
    if (*selftest) return cmd_selftest(rounds, seed, inject_fault);
    if (*ddl) return cmd_ddl(cfg, ddl_versions);
    if (*exp) return cmd_export(cfg, out_dir);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUser;
}
