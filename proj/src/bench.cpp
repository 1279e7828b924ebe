#include "qbnn/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

#include "qbnn/builder.hpp"
#include "qbnn/embedding.hpp"
#include "qbnn/error.hpp"
#include "qbnn/rng.hpp"

namespace qbnn {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t) { return std::chrono::duration<double, std::milli>(Clock::now() - t).count(); }

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string bench_csv_header() {
  return "instance_id,formulation,solver,runtime_ms,best_energy,distance,chain_break_fraction,seed,num_vars,"
         "num_weights";
}

std::string bench_csv_row(const BenchRecord& r) {
  for (const std::string* f : {&r.instance_id, &r.formulation, &r.solver}) {
    if (f->find_first_of(",\n\r") != std::string::npos) throw UsageError("bench field '" + *f + "' contains a separator");
  }
  std::ostringstream os;
  os << r.instance_id << ',' << r.formulation << ',' << r.solver << ',' << format_double(r.runtime_ms) << ','
     << r.best_energy << ',' << r.distance << ','
     << (r.chain_break_fraction ? format_double(*r.chain_break_fraction) : std::string()) << ',' << r.seed << ','
     << r.num_vars << ',' << r.num_weights;
  return os.str();
}

std::string bench_csv(std::span<const BenchRecord> records) {
  std::string out = std::string(kBenchSchema) + "\n" + bench_csv_header() + "\n";
  for (const auto& r : records) out += bench_csv_row(r) + "\n";
  return out;
}

namespace {

template <class T>
T field_as(std::string_view s, std::size_t line) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("bad numeric field '" + std::string(s) + "'", line);
  }
  return v;
}

}  // namespace

std::vector<BenchRecord> parse_bench_csv(std::string_view text) {
  std::vector<BenchRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line == bench_csv_header()) {
      header_seen = true;
      continue;
    }
    if (!header_seen) throw ParseError("missing bench CSV header", line_no);
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 10) throw ParseError("expected 10 fields", line_no);
    BenchRecord r;
    r.instance_id = f[0];
    r.formulation = f[1];
    r.solver = f[2];
    r.runtime_ms = field_as<double>(f[3], line_no);
    r.best_energy = field_as<std::int64_t>(f[4], line_no);
    r.distance = field_as<std::size_t>(f[5], line_no);
    if (!f[6].empty()) r.chain_break_fraction = field_as<double>(f[6], line_no);
    r.seed = field_as<std::uint64_t>(f[7], line_no);
    r.num_vars = field_as<std::size_t>(f[8], line_no);
    r.num_weights = field_as<std::size_t>(f[9], line_no);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<BenchRecord> run_type_suite(const SparseBinaryDataset& source, const TypeSuiteOptions& opts) {
  const BnnArchitecture arch = BnnArchitecture::parse(opts.architecture);
  if (arch.input_size() != opts.attributes) throw UsageError("architecture input size must equal --attrs");
  const auto instances = sample_instances(source, opts.attributes, opts.points, opts.count, derive_seed(opts.seed, 1));
  const HardwareGraph hw = opts.embedded ? make_topology(opts.topology) : HardwareGraph{};

  auto run_one = [&](std::size_t n) {
    std::vector<BenchRecord> out;
    const auto& inst = instances[n];
    BenchRecord base;
    base.instance_id = inst.id;
    base.num_weights = arch.num_weights();

    auto t0 = Clock::now();
    const OracleResult oracle = enumerate_optimal_weights(arch, inst.data);
    BenchRecord rec = base;
    rec.formulation = "qubo";
    rec.solver = "oracle";
    rec.runtime_ms = ms_since(t0);
    rec.best_energy = static_cast<std::int64_t>(oracle.min_loss);
    rec.seed = opts.seed;
    const TrainingQubo tq = build_training_qubo(arch, inst.data, {opts.penalty, false});
    rec.num_vars = tq.registry.size();
    out.push_back(rec);

    SaSchedule sa;
    sa.sweeps = opts.sweeps;
    sa.restarts = opts.restarts;
    sa.seed = derive_seed(opts.seed, 1000 + n);
    const SampleSet s = solve_sa(tq.qubo, sa);
    rec = base;
    rec.formulation = "qubo";
    rec.solver = "sa";
    rec.runtime_ms = s.wall_time_ms;
    rec.best_energy = s.best().energy;
    rec.distance = distance(decode_weights(s.best().bits, tq.registry), inst.data, oracle.min_loss);
    rec.seed = sa.seed;
    rec.num_vars = tq.registry.size();
    out.push_back(rec);

    if (!opts.embedded) return out;
    const std::uint64_t eseed = derive_seed(opts.seed, 2000 + n);
    t0 = Clock::now();
    EmbedOptions eo = opts.embed;
    eo.seed = eseed;
    const ChainEmbedding emb = find_embedding(interaction_graph(tq.qubo), hw, eo);
    const EmbeddedQubo eq = embed_qubo(tq.qubo, emb, hw, default_chain_strength(tq.qubo).value);
    if (opts.on_embedded) opts.on_embedded(inst, tq, eq);
    sa.seed = eseed;
    const SampleSet es = solve_sa(eq.qubo, sa);
    const Unembedded un = unembed(es.best().bits, eq);
    rec = base;
    rec.formulation = "equbo";
    rec.solver = "sa";
    rec.runtime_ms = ms_since(t0);
    rec.best_energy = es.best().energy;
    rec.distance = distance(decode_weights(un.bits, tq.registry), inst.data, oracle.min_loss);
    rec.chain_break_fraction = un.chain_break_fraction;
    rec.seed = eseed;
    rec.num_vars = eq.qubo.num_vars();
    out.push_back(rec);
    return out;
  };

  std::vector<std::vector<BenchRecord>> per(instances.size());
  const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(instances.size())));
  if (threads == 1) {
    for (std::size_t n = 0; n < instances.size(); ++n) per[n] = run_one(n);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            for (std::size_t n; (n = next.fetch_add(1)) < instances.size();) per[n] = run_one(n);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::vector<BenchRecord> out;
  for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
  return out;
}

std::vector<BenchRecord> run_scaling_suite(const SparseBinaryDataset& source, const ScalingOptions& opts) {
  std::vector<BenchRecord> out;
  for (std::size_t a = 0; a < opts.architectures.size(); ++a) {
    const BnnArchitecture arch = BnnArchitecture::parse(opts.architectures[a]);
    const std::uint64_t seed = derive_seed(opts.seed, 3000 + a);
    const auto inst = sample_instances(source, arch.input_size(), opts.points, 1, seed).front();

    // Warm-up, then repeat until the measured span is long enough to time reliably.
    OracleResult res = enumerate_optimal_weights(arch, inst.data);
    std::size_t reps = 0;
    const auto t0 = Clock::now();
    double spent = 0.0;
    do {
      res = enumerate_optimal_weights(arch, inst.data);
      ++reps;
      spent = ms_since(t0);
    } while (spent < opts.min_sample_ms);

    BenchRecord r;
    r.instance_id = "scaling-" + arch.to_string();
    r.formulation = "qubo";
    r.solver = "oracle";
    r.runtime_ms = spent / static_cast<double>(reps);
    r.best_energy = static_cast<std::int64_t>(res.min_loss);
    r.seed = seed;
    r.num_vars = VarRegistry(arch, opts.points, false).size();
    r.num_weights = arch.num_weights();
    out.push_back(r);
  }
  return out;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw UsageError("line fit needs at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

nlohmann::json bench_summary(std::span<const BenchRecord> records) {
  using nlohmann::json;
  std::map<std::string, std::vector<const BenchRecord*>> groups;
  for (const auto& r : records) groups[r.formulation + "/" + r.solver].push_back(&r);

  json by_group = json::object();
  for (const auto& [key, rs] : groups) {
    std::vector<double> logt;
    std::map<std::size_t, std::size_t> dist_hist;
    for (const auto* r : rs) {
      logt.push_back(std::log10(std::max(r->runtime_ms, 1e-6)));
      ++dist_hist[r->distance];
    }
    const auto [lo, hi] = std::minmax_element(logt.begin(), logt.end());
    constexpr std::size_t bins = 10;
    const double width = (*hi - *lo) > 0 ? (*hi - *lo) / bins : 1.0;
    std::vector<std::size_t> counts(bins, 0);
    for (const double v : logt) counts[std::min<std::size_t>(bins - 1, static_cast<std::size_t>((v - *lo) / width))]++;
    json dh = json::object();
    for (const auto& [d, c] : dist_hist) dh[std::to_string(d)] = c;
    by_group[key] = {{"records", rs.size()},
                     {"log10_runtime_ms", {{"min", *lo}, {"bin_width", width}, {"counts", counts}}},
                     {"distance_histogram", dh},
                     {"zero_distance", dist_hist.count(0) ? dist_hist.at(0) : 0}};
  }

  json out = {{"schema", "qbnn.bench-summary/1"}, {"groups", by_group}};
  std::vector<double> w, lt;
  for (const auto& r : records) {
    if (r.solver == "oracle" && r.runtime_ms > 0) {
      w.push_back(static_cast<double>(r.num_weights));
      lt.push_back(std::log2(r.runtime_ms));
    }
  }
  std::vector<double> distinct = w;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() >= 2) {
    const LinearFit f = fit_line(w, lt);
    out["oracle_scaling"] = {{"x", "num_weights"}, {"y", "log2(runtime_ms)"}, {"slope", f.slope},
                             {"intercept", f.intercept}, {"r2", f.r2}, {"points", w.size()}};
  }
  return out;
}

}  // namespace qbnn
