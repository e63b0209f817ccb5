#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bdsparse/runner.hpp"
#include "bdsparse/trace.hpp"

using namespace bdsparse;

namespace {

std::vector<Json> parse_lines(const std::string& s) {
  std::vector<Json> out;
  std::istringstream in(s);
  std::string line;
  while (std::getline(in, line)) out.push_back(Json::parse(line));
  return out;
}

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("bdsparse_test_" + name)).string();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BDSPARSE_CLI_PATH) + " " + args;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Trace, ParseAndWriteRoundTrip) {
  const std::string text = "N 4\nI 0 1\nI 2 1\nB\nD 0 1\nI 0 3\nB\nD 1 2\nB\n";
  const Trace t = parse_trace(text);
  EXPECT_EQ(t.n, 4u);
  EXPECT_EQ(t.initial, (std::vector<Edge>{{0, 1}, {1, 2}}));
  ASSERT_EQ(t.batches.size(), 2u);
  EXPECT_EQ(t.batches[0].deletes, (std::vector<Edge>{{0, 1}}));
  EXPECT_EQ(t.batches[0].inserts, (std::vector<Edge>{{0, 3}}));
  EXPECT_EQ(parse_trace(trace_to_string(t)).batches[1].deletes, t.batches[1].deletes);
}

TEST(Trace, Errors) {
  EXPECT_THROW(parse_trace("I 0 1\n"), TraceError);
  EXPECT_THROW(parse_trace("N 3\nI 0 3\n"), TraceError);
  EXPECT_THROW(parse_trace("N 3\nI 1 1\n"), TraceError);
  EXPECT_THROW(parse_trace("N 3\nD 0 1\n"), TraceError);
  EXPECT_THROW(parse_trace("N 3\nX\n"), TraceError);
  try {
    parse_trace("N 3\nI 0 1\nQ 1\n");
  } catch (const TraceError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Gen, SmallDeletionTrace) {
  GenParams p;
  p.n = 8;
  p.m = 10;
  p.batches = 2;
  p.batch_size = 3;
  const Trace t = generate_trace(p);
  EXPECT_EQ(t.initial.size(), 10u);
  ASSERT_EQ(t.batches.size(), 2u);
  Graph g(8, t.initial);
  for (const auto& b : t.batches) {
    EXPECT_TRUE(b.inserts.empty());
    EXPECT_EQ(b.deletes.size(), 3u);
    for (const Edge& e : b.deletes) EXPECT_TRUE(g.has_edge(e));
    g.apply_batch(b);
  }
  EXPECT_EQ(trace_to_string(t).find("\nI ", trace_to_string(t).find("B\n")), std::string::npos);
}

TEST(Gen, DeterministicAllModels) {
  for (const char* model : {"uniform", "window", "pa"}) {
    GenParams p;
    p.model = model;
    p.n = 50;
    p.m = 200;
    p.mix = 0.4;
    p.seed = 9;
    EXPECT_EQ(trace_to_string(generate_trace(p)), trace_to_string(generate_trace(p)));
    // Batches never insert a present edge or delete an absent one.
    const Trace t = generate_trace(p);
    Graph g(t.n, t.initial);
    for (const auto& b : t.batches) {
      const auto applied = g.apply_batch(b);
      EXPECT_EQ(applied.inserts.size(), b.inserts.size());
      EXPECT_EQ(applied.deletes.size(), b.deletes.size());
    }
  }
}

TEST(Gen, WindowDeletesOldestFirst) {
  GenParams p;
  p.model = "window";
  p.n = 30;
  p.m = 40;
  p.batches = 4;
  p.batch_size = 5;
  const Trace t = generate_trace(p);
  EXPECT_EQ(t.batches[0].deletes.size(), 5u);
}

TEST(Gen, DenseRequest) {
  GenParams p;
  p.n = 10;
  p.m = 45;
  EXPECT_EQ(generate_trace(p).initial.size(), 45u);
  p.m = 46;
  EXPECT_THROW(generate_trace(p), std::invalid_argument);
}

TEST(Runner, SpannerDeletionTraceVerifies) {
  GenParams p;
  p.n = 60;
  p.m = 240;
  p.batches = 10;
  p.batch_size = 12;
  const Trace t = generate_trace(p);
  RunConfig c;
  c.structure = "spanner";
  c.k = 2;
  c.capacity = 8;
  std::ostringstream stats;
  const auto r = run_trace(t, c, stats);
  EXPECT_EQ(r.exit_code, 0);
  const auto recs = parse_lines(stats.str());
  ASSERT_EQ(recs.size(), t.batches.size() + 2);
  for (std::size_t i = 1; i + 1 < recs.size(); ++i) {
    EXPECT_EQ(recs[i]["type"], "batch");
    EXPECT_TRUE(recs[i]["check"]["stretch"]["ok"].get<bool>());
  }
  EXPECT_EQ(recs.back()["batches"], t.batches.size());
}

TEST(Runner, EsTreeDistChecks) {
  GenParams p;
  p.n = 80;
  p.m = 200;
  p.batches = 10;
  p.batch_size = 15;
  const Trace t = generate_trace(p);
  RunConfig c;
  c.structure = "estree";
  c.depth = 5;
  std::ostringstream stats;
  EXPECT_EQ(run_trace(t, c, stats).exit_code, 0);
  for (const auto& rec : parse_lines(stats.str()))
    if (rec["type"] != "summary") EXPECT_EQ(rec["check"]["dist_mismatches"], 0);
}

TEST(Runner, DecrementalStructureRejectsInserts) {
  GenParams p;
  p.mix = 0.5;
  const Trace t = generate_trace(p);
  RunConfig c;
  c.structure = "bundle";
  std::ostringstream stats;
  EXPECT_THROW(run_trace(t, c, stats), std::invalid_argument);
}

TEST(Runner, StatsDeterministicWithoutTiming) {
  GenParams p;
  p.n = 40;
  p.m = 160;
  p.mix = 0.5;
  const Trace t = generate_trace(p);
  for (const char* s : {"spanner", "sparse", "sparsifier"}) {
    RunConfig c;
    c.structure = s;
    c.capacity = 4;
    c.t = 2;
    std::ostringstream a, b;
    run_trace(t, c, a);
    run_trace(t, c, b);
    EXPECT_EQ(a.str(), b.str()) << s;
    EXPECT_EQ(replay_dump(t, c), replay_dump(t, c)) << s;
  }
}

TEST(Runner, DefaultSeedFromEnvironment) {
  ::setenv(kSeedEnv, "1234", 1);
  EXPECT_EQ(default_seed(), 1234u);
  ::setenv(kSeedEnv, "junk", 1);
  EXPECT_EQ(default_seed(), 1u);
  ::unsetenv(kSeedEnv);
  EXPECT_EQ(default_seed(), 1u);
}

TEST(Cli, GenRunVerify) {
  const std::string trace = tmp_path("trace.txt"), stats = tmp_path("stats.jsonl");
  const std::string ident = tmp_path("ident.txt"), empty = tmp_path("empty.txt"), sp = tmp_path("sp.txt");
  ASSERT_EQ(run_cli("gen --n 10 --m 30 --batches 3 --batch-size 2 --seed 4 -o " + trace), 0);
  ASSERT_EQ(run_cli("run " + trace + " -s spanner -k 2 --stats " + stats), 0);
  EXPECT_EQ(parse_lines(slurp(stats)).size(), 5u);

  const Trace t = parse_trace(slurp(trace));
  Graph g(t.n, t.initial);
  for (const auto& b : t.batches) g.apply_batch(b);
  {
    std::ofstream out(ident);
    write_structure(out, [&] {
      std::vector<WeightedEdge> w;
      for (const Edge& e : g.edges()) w.push_back({e, 1});
      return w;
    }());
    std::ofstream(empty).close();
  }
  EXPECT_EQ(run_cli("verify " + trace + " " + ident + " --stretch 1 > " + stats), 0);
  EXPECT_TRUE(Json::parse(slurp(stats))["pass"].get<bool>());
  EXPECT_EQ(run_cli("verify " + trace + " " + empty + " --stretch 3 > " + stats), 2);
  EXPECT_TRUE(Json::parse(slurp(stats)).contains("witness"));

  ASSERT_EQ(run_cli("run " + trace + " -s sparsifier --stats /dev/null --final " + sp), 0);
  EXPECT_EQ(run_cli("verify " + trace + " " + sp + " --kind sparsifier --eps 0.5 > " + stats), 0);
  const Json cert = Json::parse(slurp(stats));
  EXPECT_TRUE(cert.contains("worst_ratio"));
  EXPECT_TRUE(cert["exhaustive"].get<bool>());

  EXPECT_EQ(run_cli("gen --structure bundle --mix 0.5 -o " + trace + " 2>/dev/null"), 1);
}
