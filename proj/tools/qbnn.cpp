// qbnn: dataset sampling, QUBO construction, solving, embedding, evaluation, benchmarks.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qbnn/bench.hpp"
#include "qbnn/bnn.hpp"
#include "qbnn/builder.hpp"
#include "qbnn/bundle.hpp"
#include "qbnn/dataio.hpp"
#include "qbnn/embedding.hpp"
#include "qbnn/error.hpp"
#include "qbnn/kernels/packed_net.hpp"
#include "qbnn/qubo_io.hpp"
#include "qbnn/solvers.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qbnn;

namespace {

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Usage:
    case ErrorKind::UnsupportedFanIn:
      return 2;
    case ErrorKind::Capacity:
      return 3;
    case ErrorKind::EmbeddingNotFound:
      return 4;
    case ErrorKind::Io:
    case ErrorKind::Parse:
    case ErrorKind::Dimension:
      return 5;
    default:
      return 1;
  }
}

void write_json(const std::string& path, const json& j) { write_text_file(path, j.dump(1) + "\n"); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory '" + dir + "'");
}

SparseBinaryDataset load_source(const std::string& input, std::uint64_t synth_seed) {
  if (input.empty() || input == "synthetic") return synthetic_adult(synth_seed);
  return load_sparse(input);
}

// Accepts an instance bundle, an embedded bundle, canonical QUBO JSON or the text format.
NamedQubo load_qubo(const std::string& path) {
  const std::string text = read_text_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw ParseError(path + ": " + e.what());
    }
    const std::string schema = j.value("schema", "");
    if (schema == "qbnn.instance/1") {
      auto b = instance_from_json(j);
      if (!b.qubo) throw UsageError(path + ": instance has not been built (run 'qbnn build')");
      return *b.qubo;
    }
    if (schema == "qbnn.embedded/1") return qubo_from_json(j.at("qubo"));
    return qubo_from_json(j);
  }
  return parse_qubo_any(text);
}

struct EmbeddedFile {
  NamedQubo logical;
  EmbeddedQubo eq;
};

EmbeddedFile load_embedded(const std::string& path) {
  const json j = read_json_file(path);
  if (j.value("schema", "") != "qbnn.embedded/1") throw ParseError(path + ": not a qbnn.embedded/1 file");
  NamedQubo logical = qubo_from_json(j.at("logical"));
  const HardwareGraph hw = make_topology(j.at("topology").get<std::string>());
  EmbeddedQubo eq = embed_qubo(logical.qubo, embedding_from_json(j.at("embedding")), hw,
                               j.at("chain_strength").get<std::int64_t>());
  return {std::move(logical), std::move(eq)};
}

int run(int argc, char** argv) {
  CLI::App app{"Train binary neural networks as QUBO problems"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Sample training instances from a sparse binary dataset");
  std::string gen_input, gen_out;
  std::size_t gen_attrs = 3, gen_points = 4, gen_count = 20;
  std::uint64_t gen_seed = 0;
  gen->add_option("--input", gen_input, "LIBSVM-style file, or 'synthetic' (default)");
  gen->add_option("--attrs", gen_attrs, "attributes per instance (2^n - 1)")->capture_default_str();
  gen->add_option("--points", gen_points, "data points per instance")->capture_default_str();
  gen->add_option("--count", gen_count, "number of instances")->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--out", gen_out, "output directory")->required();

  // synth-data
  auto* synth = app.add_subcommand("synth-data", "Write the synthetic census-like dataset");
  std::uint64_t synth_seed = 1;
  std::size_t synth_rows = 1605;
  std::string synth_out;
  synth->add_option("--seed", synth_seed)->capture_default_str();
  synth->add_option("--rows", synth_rows)->capture_default_str();
  synth->add_option("--out", synth_out)->required();

  // build
  auto* build = app.add_subcommand("build", "Build the training QUBO for an instance");
  std::string build_instance, build_arch = "3-3-1", build_out, build_text_out;
  std::int64_t build_penalty = 50;
  bool build_fold = false;
  build->add_option("--instance", build_instance)->required();
  build->add_option("--arch", build_arch, "layer sizes, e.g. 3-3-1")->capture_default_str();
  build->add_option("--penalty", build_penalty)->capture_default_str();
  build->add_flag("--fold", build_fold, "fold constant layer-0 inputs into the weights");
  build->add_option("--out", build_out, "built instance bundle")->required();
  build->add_option("--qubo-text", build_text_out, "also write the plain text QUBO format");

  // solve
  auto* solve = app.add_subcommand("solve", "Minimise a QUBO");
  std::string solve_qubo, solve_solver = "sa", solve_out;
  SaSchedule sa;
  std::size_t solve_max_bits = ExhaustiveOptions{}.max_bits;
  solve->add_option("--qubo", solve_qubo, "QUBO, built instance or embedded bundle")->required();
  solve->add_option("--solver", solve_solver, "exhaustive | sa")->capture_default_str();
  solve->add_option("--sweeps", sa.sweeps)->capture_default_str();
  solve->add_option("--restarts", sa.restarts)->capture_default_str();
  solve->add_option("--seed", sa.seed)->capture_default_str();
  solve->add_option("--threads", sa.threads)->capture_default_str();
  solve->add_option("--max-bits", solve_max_bits, "exhaustive capacity")->capture_default_str();
  solve->add_option("--out", solve_out)->required();

  // embed
  auto* embed = app.add_subcommand("embed", "Minor-embed a QUBO into a hardware graph");
  std::string embed_qubo_path, embed_topology = "chimera:16", embed_out;
  std::optional<std::int64_t> embed_strength;
  EmbedOptions embed_opts;
  embed->add_option("--qubo", embed_qubo_path)->required();
  embed->add_option("--topology", embed_topology, "complete:N, grid:WxH, chimera:M[,T] or an edge-list file")
      ->capture_default_str();
  embed->add_option("--chain-strength", embed_strength, "default: 2 * max |coefficient|");
  embed->add_option("--seed", embed_opts.seed)->capture_default_str();
  embed->add_option("--retries", embed_opts.retries)->capture_default_str();
  embed->add_option("--out", embed_out)->required();

  // unembed
  auto* unemb = app.add_subcommand("unembed", "Map physical samples back to logical variables");
  std::string unemb_embedded, unemb_samples, unemb_out;
  unemb->add_option("--embedded", unemb_embedded)->required();
  unemb->add_option("--samples", unemb_samples)->required();
  unemb->add_option("--out", unemb_out)->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Decode the best sample and compare with the weight oracle");
  std::string eval_instance, eval_samples, eval_out;
  eval->add_option("--instance", eval_instance, "built instance bundle")->required();
  eval->add_option("--samples", eval_samples)->required();
  eval->add_option("--out", eval_out, "report JSON");

  // bench
  auto* bench = app.add_subcommand("bench", "Run an experiment suite");
  std::string bench_suite, bench_out, bench_input;
  std::uint64_t bench_seed = 0;
  TypeSuiteOptions type_opts;
  bool bench_no_embed = false;
  std::optional<std::size_t> bench_count;
  bench->add_option("--suite", bench_suite, "typeA | typeB | scaling")
      ->required()
      ->check(CLI::IsMember({"typeA", "typeB", "scaling"}));
  bench->add_option("--seed", bench_seed)->capture_default_str();
  bench->add_option("--out", bench_out, "output directory (bench.csv is appended to)")->required();
  bench->add_option("--input", bench_input, "dataset file (default: synthetic)");
  bench->add_option("--count", bench_count, "instances (default 20)");
  bench->add_option("--sweeps", type_opts.sweeps)->capture_default_str();
  bench->add_option("--restarts", type_opts.restarts)->capture_default_str();
  bench->add_option("--topology", type_opts.topology)->capture_default_str();
  bench->add_option("--threads", type_opts.threads)->capture_default_str();
  bench->add_flag("--no-embed", bench_no_embed, "skip the embedded formulation");

  // export-graph
  auto* graph = app.add_subcommand("export-graph", "Write the QUBO interaction graph");
  std::string graph_qubo, graph_format = "dot", graph_out;
  graph->add_option("--qubo", graph_qubo)->required();
  graph->add_option("--format", graph_format)->check(CLI::IsMember({"dot", "json"}))->capture_default_str();
  graph->add_option("--out", graph_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (*gen) {
    const SparseBinaryDataset src = load_source(gen_input, 1);
    const auto instances = sample_instances(src, gen_attrs, gen_points, gen_count, gen_seed);
    ensure_dir(gen_out);
    for (const auto& inst : instances) {
      InstanceBundle b;
      b.id = inst.id;
      b.data = inst.data;
      b.source = {{"dataset", gen_input.empty() ? "synthetic" : gen_input},
                  {"attributes", inst.attributes},
                  {"rows", inst.rows},
                  {"label_conflicts", inst.conflicts},
                  {"seed", gen_seed}};
      const std::string path = (fs::path(gen_out) / (inst.id + ".json")).string();
      write_json(path, instance_to_json(b));
      std::cout << path << " attributes=" << json(inst.attributes).dump() << " conflicts=" << inst.conflicts << "\n";
    }
    std::cout << instances.size() << " instances written\n";
    return 0;
  }

  if (*synth) {
    write_text_file(synth_out, serialize_sparse(synthetic_adult(synth_seed, synth_rows)));
    return 0;
  }

  if (*build) {
    InstanceBundle b = instance_from_json(read_json_file(build_instance));
    const BnnArchitecture arch = BnnArchitecture::parse(build_arch);
    const BuildOptions opts{build_penalty, build_fold};
    TrainingQubo tq = build_training_qubo(arch, b.data, opts);
    for (const auto& w : tq.warnings) std::cerr << "warning: " << w << "\n";
    b.architecture = arch;
    b.options = opts;
    b.qubo = NamedQubo{tq.qubo, tq.registry.names()};
    write_json(build_out, instance_to_json(b));
    if (!build_text_out.empty()) write_text_file(build_text_out, serialize_qubo_text(tq.qubo));
    std::cout << "architecture " << arch.to_string() << "\npenalty " << build_penalty << "\nvariables "
              << tq.qubo.num_vars() << "\nterms " << tq.qubo.num_terms() << "\n";
    return 0;
  }

  if (*solve) {
    const NamedQubo nq = load_qubo(solve_qubo);
    SampleSet s;
    if (solve_solver == "exhaustive") {
      s = solve_exhaustive(nq.qubo, {solve_max_bits});
    } else if (solve_solver == "sa") {
      s = solve_sa(nq.qubo, sa);
    } else {
      throw UsageError("unknown solver '" + solve_solver + "' (exhaustive | sa)");
    }
    json meta = {{"solver", solve_solver}, {"source", solve_qubo}};
    if (solve_solver == "sa") {
      meta["sweeps"] = sa.sweeps;
      meta["restarts"] = sa.restarts;
      meta["seed"] = sa.seed;
    }
    write_json(solve_out, sample_set_to_json(s, nq.qubo.num_vars(), meta));
    std::cout << "best energy " << s.best().energy << "\nsamples " << s.samples.size() << "\n";
    return 0;
  }

  if (*embed) {
    const NamedQubo nq = load_qubo(embed_qubo_path);
    const HardwareGraph hw = make_topology(embed_topology);
    std::int64_t strength;
    if (embed_strength) {
      strength = *embed_strength;
    } else {
      const ChainStrength cs = default_chain_strength(nq.qubo);
      if (cs.warning) std::cerr << "warning: " << *cs.warning << "\n";
      strength = cs.value;
    }
    const ChainEmbedding emb = find_embedding(interaction_graph(nq.qubo), hw, embed_opts);
    const EmbeddedQubo eq = embed_qubo(nq.qubo, emb, hw, strength);
    std::vector<std::string> names;
    for (std::size_t p = 0; p < eq.nodes.size(); ++p) {
      names.push_back("p" + std::to_string(eq.nodes[p]));
    }
    json nodes = eq.nodes;
    write_json(embed_out, {{"schema", "qbnn.embedded/1"},
                           {"topology", embed_topology},
                           {"chain_strength", strength},
                           {"embedding", embedding_to_json(emb)},
                           {"nodes", nodes},
                           {"logical", qubo_to_json(nq.qubo, nq.var_names)},
                           {"qubo", qubo_to_json(eq.qubo, names)}});
    std::cout << "logical variables " << nq.qubo.num_vars() << "\nphysical qubits " << emb.total_nodes()
              << "\nmax chain length " << emb.max_chain_length() << "\nchain strength " << strength << "\n";
    return 0;
  }

  if (*unemb) {
    const EmbeddedFile f = load_embedded(unemb_embedded);
    const SampleSet phys = sample_set_from_json(read_json_file(unemb_samples), f.eq.qubo.num_vars());
    SampleSet logical;
    logical.wall_time_ms = phys.wall_time_ms;
    json breaks = json::array();
    for (const Sample& s : phys.samples) {
      const Unembedded u = unembed(s.bits, f.eq);
      logical.samples.push_back({u.bits, f.logical.qubo.energy(u.bits), s.restart});
      breaks.push_back(u.chain_break_fraction);
    }
    write_json(unemb_out, sample_set_to_json(logical, f.logical.qubo.num_vars(),
                                             {{"source", unemb_samples}, {"chain_break_fraction", breaks}}));
    double mean = 0;
    for (const auto& b : breaks) mean += b.get<double>();
    if (!breaks.empty()) mean /= static_cast<double>(breaks.size());
    std::cout << "samples " << logical.samples.size() << "\nmean chain break fraction " << mean << "\n";
    return 0;
  }

  if (*eval) {
    const InstanceBundle b = instance_from_json(read_json_file(eval_instance));
    if (!b.qubo || !b.architecture || !b.options) throw UsageError(eval_instance + ": instance has not been built");
    const VarRegistry reg(*b.architecture, b.data.size(), b.options->fold_constant_inputs);
    const SampleSet s = sample_set_from_json(read_json_file(eval_samples), reg.size());
    if (s.samples.empty()) throw UsageError(eval_samples + ": no samples");
    const Sample& best = s.best();
    const AuditReport rep = audit(best.bits, reg, b.data);
    const WeightSet w = decode_weights(best.bits, reg);
    const OracleResult oracle = enumerate_optimal_weights(*b.architecture, b.data);
    const std::size_t dist = distance(w, b.data, oracle.min_loss);
    json report = {{"instance", b.id},
                   {"best_energy", best.energy},
                   {"qubo_energy", b.qubo->qubo.energy(best.bits)},
                   {"oracle_min_loss", oracle.min_loss},
                   {"oracle_num_optima", oracle.num_optima},
                   {"distance", dist},
                   {"weights", pack_bits_hex(weights_to_bits(w))},
                   {"audit", rep.to_json()}};
    if (!eval_out.empty()) write_json(eval_out, report);
    std::cout << "loss " << rep.recomputed_loss_total << "\noracle " << oracle.min_loss << "\ndistance " << dist
              << "\nfeasible " << (rep.feasible() ? "yes" : "no") << "\n";
    return 0;
  }

  if (*bench) {
    ensure_dir(bench_out);
    const SparseBinaryDataset src = load_source(bench_input, 1);
    std::vector<BenchRecord> records;
    if (bench_suite == "scaling") {
      ScalingOptions so;
      so.seed = bench_seed;
      records = run_scaling_suite(src, so);
    } else {
      type_opts.points = bench_suite == "typeA" ? 4 : 8;
      type_opts.seed = bench_seed;
      type_opts.embedded = !bench_no_embed;
      if (bench_count) type_opts.count = *bench_count;
      records = run_type_suite(src, type_opts);
    }
    for (auto& r : records) r.instance_id = bench_suite + ":" + r.instance_id;

    // Append to an existing CSV only when its schema and header match.
    const std::string csv_path = (fs::path(bench_out) / "bench.csv").string();
    std::vector<BenchRecord> all;
    if (fs::exists(csv_path)) {
      const std::string old = read_text_file(csv_path);
      if (old.rfind(std::string(kBenchSchema) + "\n" + bench_csv_header() + "\n", 0) != 0) {
        throw ParseError(csv_path + ": existing file has a different schema");
      }
      all = parse_bench_csv(old);
      std::ofstream out(csv_path, std::ios::app);
      for (const auto& r : records) out << bench_csv_row(r) << "\n";
      if (!out) throw IoError("append to '" + csv_path + "' failed");
    } else {
      write_text_file(csv_path, bench_csv(records));
    }
    all.insert(all.end(), records.begin(), records.end());
    json summary = bench_summary(all);
    summary["kernel"] = kernels::isa_name(kernels::active_isa());
    write_json((fs::path(bench_out) / "summary.json").string(), summary);
    std::cout << records.size() << " records appended to " << csv_path << "\n" << summary.dump(1) << "\n";
    return 0;
  }

  if (*graph) {
    const NamedQubo nq = load_qubo(graph_qubo);
    std::vector<std::string> names = nq.var_names;
    if (names.empty()) {
      for (std::size_t i = 0; i < nq.qubo.num_vars(); ++i) names.push_back("q" + std::to_string(i));
    }
    write_text_file(graph_out, graph_format == "dot" ? interaction_graph_dot(nq.qubo, names)
                                                     : interaction_graph_json(nq.qubo, names).dump(1) + "\n");
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const EmbeddingNotFound& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return 5;
  }
}
