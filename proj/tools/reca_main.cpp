#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "reca/classifier.hpp"
#include "reca/profiles.hpp"
#include "reca/simulator.hpp"
#include "reca/synth.hpp"
#include "reca/trace.hpp"

namespace {

using namespace reca;

std::shared_ptr<const CharacteristicsTable> LoadTableOrDefault(const std::string& path) {
  if (!path.empty()) {
    return std::make_shared<const CharacteristicsTable>(LoadTableFile(path));
  }
  if (const char* env = std::getenv("RECA_TABLE"); env && *env) {
    return std::make_shared<const CharacteristicsTable>(LoadTableFile(env));
  }
  return std::make_shared<const CharacteristicsTable>(DefaultTable());
}

RunConfig LoadConfigOrDefault(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return LoadRunConfigFile(path);
}

Trace LoadTraceChecked(const std::string& path) {
  Trace t = ParseTraceFile(path);
  if (t.requests.empty()) throw std::runtime_error("trace is empty: " + path);
  return t;
}

void WriteFileOrThrow(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  fn(out);
}

int CmdSimulate(const std::string& trace_path, const std::string& engine,
                const std::string& table_path, const std::string& config_path,
                const std::string& out_path) {
  Trace trace = LoadTraceChecked(trace_path);
  auto table = LoadTableOrDefault(table_path);
  RunConfig cfg = LoadConfigOrDefault(config_path);

  Metrics m = cfg.per_process && engine == "reca" ? RunPerProcess(trace, cfg, table)
                                                  : RunEngine(engine, trace, cfg, table);

  WriteFileOrThrow(out_path, [&](std::ostream& o) { WriteMetricsCsv(m, o); });
  WriteFileOrThrow(out_path + ".series.csv", [&](std::ostream& o) { WriteSeriesCsv(m, o); });
  WriteFileOrThrow(out_path + ".timeline.csv", [&](std::ostream& o) { WriteTimelineCsv(m, o); });

  std::printf("%s: %llu requests (%llu warmup), avg response %.1f us, hit ratio %.4f\n",
              m.engine.c_str(), static_cast<unsigned long long>(m.requests),
              static_cast<unsigned long long>(m.warmup_requests), m.avg_response_us, m.hit_ratio);
  std::printf("wrote %s, %s.series.csv, %s.timeline.csv\n", out_path.c_str(), out_path.c_str(),
              out_path.c_str());
  return 0;
}

int CmdCharacterize(const std::string& trace_path, const std::string& table_path,
                    uint64_t window) {
  Trace trace = LoadTraceChecked(trace_path);
  auto table = LoadTableOrDefault(table_path);

  HistoryClassifier classifier;
  std::vector<RequestType> all;
  std::vector<bool> meta;
  all.reserve(trace.requests.size());
  for (const IoRequest& io : trace.requests) {
    if (auto c = classifier.Observe(io)) {
      all.push_back(c->type);
      meta.push_back(c->old_io.is_meta);
    }
  }
  if (all.empty()) throw std::runtime_error("trace too short to classify (needs > 64 requests)");

  auto print_fv = [](const FeatureVector& fv) {
    std::printf("seqR %.4f seqW %.4f strR %.4f strW %.4f rndR %.4f rndW %.4f over %.4f",
                fv.f[0], fv.f[1], fv.f[2], fv.f[3], fv.f[4], fv.f[5], fv.f_over);
  };

  std::map<std::string, uint64_t> votes;
  size_t current = 0;
  size_t windows = 0;
  for (size_t start = 0; start < all.size(); start += window) {
    size_t len = std::min<size_t>(window, all.size() - start);
    FeatureVector fv = WindowFeatures(std::span<const RequestType>(all.data() + start, len));
    current = MatchCategory(fv, *table, current);
    const std::string& name = table->at(current).name;
    votes[name] += 1;
    ++windows;
    std::printf("window %zu [%zu-%zu]: ", windows, start + 1, start + len);
    print_fv(fv);
    std::printf(" -> %s\n", name.c_str());
  }

  std::string dominant;
  uint64_t best = 0;
  for (const auto& [name, n] : votes) {
    if (n > best) {
      best = n;
      dominant = name;
    }
  }

  FeatureVector total = WindowFeatures(all);
  std::printf("summary: dominant category %s over %zu window(s); breakdown ", dominant.c_str(),
              windows);
  print_fv(total);
  std::printf("\n");

  bool any_meta = false;
  for (bool b : meta) any_meta |= b;
  if (any_meta) {
    // fraction of each request type that is filesystem metadata
    std::array<uint64_t, 6> type_total{};
    std::array<uint64_t, 6> type_meta{};
    uint64_t over_total = 0, over_meta = 0;
    for (size_t i = 0; i < all.size(); ++i) {
      size_t idx = FeatureIndex(all[i].access, all[i].rw);
      type_total[idx]++;
      if (meta[i]) type_meta[idx]++;
      if (all[i].is_over) {
        over_total++;
        if (meta[i]) over_meta++;
      }
    }
    static const char* kNames[6] = {"seqR", "seqW", "strR", "strW", "rndR", "rndW"};
    std::printf("metadata fraction per request type:");
    for (size_t i = 0; i < 6; ++i) {
      double frac = type_total[i] ? static_cast<double>(type_meta[i]) / type_total[i] : 0;
      std::printf(" %s %.4f", kNames[i], frac);
    }
    double of = over_total ? static_cast<double>(over_meta) / over_total : 0;
    std::printf(" over %.4f\n", of);
  }
  return 0;
}

int CmdGenerate(const std::string& category, const std::string& workload, uint64_t n,
                uint64_t seed, const std::string& out_path, const std::string& table_path) {
  Trace trace;
  if (!workload.empty()) {
    Workload w;
    try {
      w = ParseWorkloadName(workload);
    } catch (const std::invalid_argument& e) {
      std::fprintf(stderr, "%s\n", e.what());
      return 1;
    }
    trace = GenerateInterleavingWorkload(w, seed);
  } else {
    auto table = LoadTableOrDefault(table_path);
    int idx = table->Find(category);
    if (idx < 0) {
      std::ostringstream known;
      for (const CategoryRecord& r : table->records()) known << ' ' << r.name;
      std::fprintf(stderr, "unknown category '%s'; known categories:%s\n", category.c_str(),
                   known.str().c_str());
      return 1;
    }
    trace = GenerateCategoryTrace(ProfileFromRecord(table->at(idx)), n, seed);
  }
  SerializeTraceFile(trace, out_path);
  std::printf("wrote %zu requests (%llu unique pages) to %s\n", trace.requests.size(),
              static_cast<unsigned long long>(trace.unique_pages), out_path.c_str());
  return 0;
}

int CmdCompare(const std::string& trace_path, std::vector<std::string> engines,
               const std::string& table_path, const std::string& config_path,
               const std::string& out_path) {
  // dedupe, keeping first occurrence
  std::vector<std::string> unique;
  for (const std::string& e : engines) {
    if (std::find(unique.begin(), unique.end(), e) == unique.end()) {
      unique.push_back(e);
    } else {
      std::fprintf(stderr, "warning: duplicate engine '%s' ignored\n", e.c_str());
    }
  }
  Trace trace = LoadTraceChecked(trace_path);
  auto table = LoadTableOrDefault(table_path);
  RunConfig cfg = LoadConfigOrDefault(config_path);
  std::vector<Metrics> rows = Compare(trace, unique, cfg, table);
  WriteFileOrThrow(out_path, [&](std::ostream& o) { WriteComparisonCsv(rows, o); });
  for (const Metrics& m : rows) {
    std::printf("%-6s avg %.1f us, hit ratio %.4f, ssd writes %llu bytes\n", m.engine.c_str(),
                m.avg_response_us, m.hit_ratio,
                static_cast<unsigned long long>(m.ssd_writes_bytes));
  }
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}

int CmdReport(const std::string& metrics_path) {
  std::ifstream in(metrics_path);
  if (!in) throw std::runtime_error("cannot open metrics file: " + metrics_path);
  std::string header, row;
  if (!std::getline(in, header) || !std::getline(in, row)) {
    throw std::runtime_error("metrics file has no data row: " + metrics_path);
  }
  std::istringstream hs(header), rs(row);
  std::string h, v;
  std::printf("%s\n", metrics_path.c_str());
  while (std::getline(hs, h, ',') && std::getline(rs, v, ',')) {
    std::printf("  %-24s %s\n", h.c_str(), v.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ReCA reconfigurable SSD-cache simulator"};
  app.require_subcommand(1);

  std::string trace_path, table_path, config_path, out_path, engine, category, workload;
  std::string metrics_path, engines_csv;
  uint64_t n = 100000, seed = 1, window = 100000;

  auto* sim = app.add_subcommand("simulate", "replay a trace through one engine");
  sim->add_option("--trace", trace_path, "trace file (canonical CSV)")->required();
  sim->add_option("--engine", engine, "reca|lru|larc|freq")
      ->required()
      ->check(CLI::IsMember({"reca", "lru", "larc", "freq"}));
  sim->add_option("--table", table_path, "characteristics table (default: $RECA_TABLE)");
  sim->add_option("--config", config_path, "run configuration file");
  sim->add_option("--out", out_path, "metrics CSV path")->required();

  auto* chr = app.add_subcommand("characterize", "classify a trace and match categories");
  chr->add_option("--trace", trace_path, "trace file")->required();
  chr->add_option("--table", table_path, "characteristics table");
  chr->add_option("--window", window, "classification window length")->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("generate", "emit a synthetic trace");
  auto* cat_opt = gen->add_option("--category", category, "category name from the table");
  auto* wl_opt = gen->add_option("--workload", workload, "W1..W8 interleaving workload");
  cat_opt->excludes(wl_opt);
  gen->add_option("--n", n, "request count for category traces");
  gen->add_option("--seed", seed, "RNG seed");
  gen->add_option("--table", table_path, "characteristics table");
  gen->add_option("--out", out_path, "trace output path")->required();

  auto* cmp = app.add_subcommand("compare", "run several engines on one trace");
  cmp->add_option("--trace", trace_path, "trace file")->required();
  cmp->add_option("--engines", engines_csv, "comma-separated engine list")->required();
  cmp->add_option("--table", table_path, "characteristics table");
  cmp->add_option("--config", config_path, "run configuration file");
  cmp->add_option("--out", out_path, "comparison CSV path")->required();

  auto* rep = app.add_subcommand("report", "pretty-print a metrics CSV");
  rep->add_option("--metrics", metrics_path, "metrics CSV from simulate")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return CmdSimulate(trace_path, engine, table_path, config_path, out_path);
    if (chr->parsed()) return CmdCharacterize(trace_path, table_path, window);
    if (gen->parsed()) {
      if (category.empty() && workload.empty()) {
        std::fprintf(stderr, "generate requires --category or --workload\n");
        return 1;
      }
      return CmdGenerate(category, workload, n, seed, out_path, table_path);
    }
    if (cmp->parsed()) {
      std::vector<std::string> engines;
      std::istringstream ss(engines_csv);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        if (item != "reca" && item != "lru" && item != "larc" && item != "freq") {
          std::fprintf(stderr, "unknown engine '%s' (expected reca|lru|larc|freq)\n",
                       item.c_str());
          return 1;
        }
        engines.push_back(item);
      }
      if (engines.empty()) {
        std::fprintf(stderr, "--engines lists no engines\n");
        return 1;
      }
      return CmdCompare(trace_path, engines, table_path, config_path, out_path);
    }
    if (rep->parsed()) return CmdReport(metrics_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
