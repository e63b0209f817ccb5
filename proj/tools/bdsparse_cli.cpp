#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "bdsparse/oracle.hpp"
#include "bdsparse/runner.hpp"
#include "bdsparse/trace.hpp"

using namespace bdsparse;

namespace {

Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return parse_trace(in);
  } catch (const TraceError& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

// Final graph of a trace: the initial graph with every batch applied.
Graph final_graph(const Trace& t) {
  Graph g(t.n, t.initial);
  for (const auto& b : t.batches) g.apply_batch(b);
  return g;
}

void add_run_flags(CLI::App* app, RunConfig& c) {
  app->add_option("-s,--structure", c.structure, "estree | spanner | sparse | bundle | sparsifier")
      ->check(CLI::IsMember({"estree", "spanner", "sparse", "bundle", "sparsifier"}));
  app->add_option("-k,--k", c.k, "spanner stretch parameter (stretch 2k-1)");
  app->add_option("-t,--t", c.t, "bundle size (0: structure default)");
  app->add_option("--eps", c.eps, "sparsifier accuracy");
  app->add_option("--c-t", c.c_t, "constant in the bundle size formula");
  app->add_option("--seed", c.seed, std::string("random seed (default $") + kSeedEnv + " or 1)");
  app->add_option("--verify-every", c.verify_every, "oracle check interval in batches (0: never)");
  app->add_option("--rebuild-every", c.rebuild_every, "full rebuild interval in updates (0: n^3)");
  app->add_option("--depth", c.depth, "estree depth bound");
  app->add_option("--capacity", c.capacity, "class-0 capacity of the dynamic wrapper (0: default)");
  app->add_option("--cut-samples", c.cut_samples, "sampled cuts per check above 14 vertices");
  app->add_flag("--timing", c.timing, "add wall-time fields to the stats");
}

std::ostream* open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return &std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot write " + path);
  return &file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch-dynamic spanners and sparsifiers: trace generation, replay and checks"};
  app.require_subcommand(1);

  GenParams gp;
  gp.seed = default_seed();
  std::string gen_out, gen_structure;
  auto* gen = app.add_subcommand("gen", "generate an update trace");
  gen->add_option("--model", gp.model, "uniform | window | pa")
      ->check(CLI::IsMember({"uniform", "window", "pa"}));
  gen->add_option("-n,--n", gp.n, "vertex count");
  gen->add_option("-m,--m", gp.m, "initial edge count");
  gen->add_option("--batches", gp.batches, "number of update batches");
  gen->add_option("--batch-size", gp.batch_size, "updates per batch");
  gen->add_option("--mix", gp.mix, "fraction of insertions in [0, 1]");
  gen->add_option("--seed", gp.seed, "random seed");
  gen->add_option("--structure", gen_structure, "refuse insertions for decremental structures");
  gen->add_option("-o,--out", gen_out, "output path (default stdout)");

  RunConfig rc;
  rc.seed = default_seed();
  std::string run_trace_path, run_stats, run_dump;
  auto* run = app.add_subcommand("run", "replay a trace against a structure");
  run->add_option("trace", run_trace_path, "trace file")->required();
  add_run_flags(run, rc);
  run->add_option("--stats", run_stats, "JSONL stats path (default stdout)");
  run->add_option("--dump", run_dump, "diagnostic dump path on violation (default stderr)");
  std::string run_final;
  run->add_option("--final", run_final, "write the final structure as S records");

  std::string v_graph, v_structure, v_kind = "spanner";
  double v_stretch = 3, v_eps = 0.5;
  std::uint64_t v_seed = default_seed();
  std::size_t v_samples = oracle::kSampledCuts;
  auto* ver = app.add_subcommand("verify", "check a structure file against a graph");
  ver->add_option("graph", v_graph, "graph as a trace file (final state is used)")->required();
  ver->add_option("structure", v_structure, "structure file of S records")->required();
  ver->add_option("--kind", v_kind, "spanner | sparsifier")
      ->check(CLI::IsMember({"spanner", "sparsifier"}));
  ver->add_option("--stretch", v_stretch, "allowed stretch for spanner checks");
  ver->add_option("--eps", v_eps, "allowed cut distortion for sparsifier checks");
  ver->add_option("--seed", v_seed, "seed for sampled cuts");
  ver->add_option("--cut-samples", v_samples, "sampled cuts above 14 vertices");

  RunConfig bc;
  bc.seed = default_seed();
  bc.verify_every = 16;
  bc.timing = true;
  GenParams bg;
  bg.n = 1000;
  bg.m = 8000;
  bg.batches = 32;
  bg.batch_size = 64;
  std::string bench_stats;
  auto* bench = app.add_subcommand("bench", "generate a workload and replay it with timing");
  add_run_flags(bench, bc);
  bench->add_option("--model", bg.model, "uniform | window | pa")
      ->check(CLI::IsMember({"uniform", "window", "pa"}));
  bench->add_option("-n,--n", bg.n, "vertex count");
  bench->add_option("-m,--m", bg.m, "initial edge count");
  bench->add_option("--batches", bg.batches, "number of update batches");
  bench->add_option("--batch-size", bg.batch_size, "updates per batch");
  bench->add_option("--mix", bg.mix, "fraction of insertions");
  bench->add_option("--stats", bench_stats, "JSONL stats path (default: summary only on stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      if (!gen_structure.empty() && is_decremental(gen_structure) && gp.mix > 0.0) {
        std::cerr << "gen: " << gen_structure << " is decremental; --mix must be 0\n";
        return 1;
      }
      const Trace t = generate_trace(gp);
      std::ofstream f;
      write_trace(*open_out(gen_out, f), t);
      return 0;
    }
    if (*run) {
      const Trace t = load_trace(run_trace_path);
      std::ofstream sf, df;
      std::ostream* stats = open_out(run_stats, sf);
      std::ostream* dump = run_dump.empty() ? &std::cerr : open_out(run_dump, df);
      const RunResult r = run_trace(t, rc, *stats, dump);
      if (r.exit_code != 0)
        std::cerr << "violation at batch " << *r.failed_batch << ": " << r.failure << '\n';
      if (!run_final.empty() && r.exit_code == 0) {
        std::ofstream ff(run_final);
        rc.verify_every = 0;
        Graph g(t.n, t.initial);
        auto d = make_driver(t.n, t.initial, rc);
        for (const auto& b : t.batches) d->apply(g.apply_batch(b));
        write_structure(ff, d->structure());
      }
      return r.exit_code;
    }
    if (*ver) {
      const Trace t = load_trace(v_graph);
      const Graph g = final_graph(t);
      std::ifstream sin(v_structure);
      if (!sin) throw std::runtime_error("cannot open " + v_structure);
      const auto h = parse_structure(sin, t.n);
      Json cert;
      cert["kind"] = v_kind;
      cert["n"] = t.n;
      cert["edges"] = g.num_edges();
      cert["structure_edges"] = h.size();
      bool pass = true;
      if (v_kind == "spanner") {
        std::vector<Edge> he;
        for (const auto& we : h) he.push_back(we.edge);
        const auto s = static_cast<std::uint64_t>(v_stretch);
        const auto r = oracle::check_stretch(g, he, s);
        pass = r.ok;
        cert["stretch_bound"] = s;
        cert["worst"] = r.worst;
        cert["checked"] = r.checked;
        if (r.witness) cert["witness"] = {r.witness->u, r.witness->v};
      } else {
        const auto gw = oracle::unit_weights(g.edges());
        const auto r = oracle::enumerate_cuts(t.n, gw, h, v_eps, v_seed, v_samples);
        const auto q = oracle::quadratic_form_check(oracle::laplacian(t.n, gw),
                                                    oracle::laplacian(t.n, h), v_eps, 100, v_seed);
        pass = r.ok;
        cert["eps"] = v_eps;
        cert["cuts"] = r.cuts;
        cert["exhaustive"] = r.exhaustive;
        cert["worst_ratio"] = std::isfinite(r.worst_ratio) ? Json(r.worst_ratio) : Json(nullptr);
        cert["quadratic_form_ok"] = q.ok;
        if (!r.ok) {
          Json side = Json::array();
          for (std::size_t v = 0; v < r.witness.size(); ++v)
            if (r.witness[v]) side.push_back(v);
          cert["witness_side"] = side;
        }
      }
      cert["pass"] = pass;
      std::cout << cert.dump() << '\n';
      return pass ? 0 : 2;
    }
    if (*bench) {
      bg.seed = bc.seed;
      if (is_decremental(bc.structure)) bg.mix = 0.0;
      const Trace t = generate_trace(bg);
      std::ofstream sf;
      std::ostringstream sink;
      std::ostream* stats = bench_stats.empty() ? &sink : open_out(bench_stats, sf);
      const RunResult r = run_trace(t, bc, *stats, &std::cerr);
      std::cout << r.summary.dump() << '\n';
      return r.exit_code;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
