#pragma once

// Experiment suites: Type A / Type B training instances solved by the weight
// oracle, SA on the QUBO and SA on the embedded QUBO; oracle runtime scaling.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qbnn/builder.hpp"
#include "qbnn/dataio.hpp"
#include "qbnn/embedding.hpp"
#include "qbnn/solvers.hpp"

namespace qbnn {

struct BenchRecord {
  std::string instance_id;
  std::string formulation;  // qubo | equbo
  std::string solver;       // exhaustive | sa | oracle
  double runtime_ms = 0.0;
  std::int64_t best_energy = 0;
  std::size_t distance = 0;
  std::optional<double> chain_break_fraction;
  std::uint64_t seed = 0;
  std::size_t num_vars = 0;
  std::size_t num_weights = 0;

  friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

inline constexpr std::string_view kBenchSchema = "# qbnn.bench/1";

std::string bench_csv_header();
std::string bench_csv_row(const BenchRecord& r);
/// Schema line + header + rows.
std::string bench_csv(std::span<const BenchRecord> records);
std::vector<BenchRecord> parse_bench_csv(std::string_view text);

struct TypeSuiteOptions {
  std::string architecture = "3-3-1";
  std::size_t attributes = 3;
  std::size_t points = 4;
  std::size_t count = 20;
  std::int64_t penalty = 50;
  std::size_t sweeps = 1000;
  std::size_t restarts = 20;
  bool embedded = true;
  std::string topology = "chimera:16";
  EmbedOptions embed;  // seed is replaced per instance
  std::uint64_t seed = 0;
  unsigned threads = 1;  // instances run in parallel; record order stays fixed
  /// Called once per embedded instance (possibly from worker threads).
  std::function<void(const SampledInstance&, const TrainingQubo&, const EmbeddedQubo&)> on_embedded;
};

/// Seeds: instances from derive_seed(seed, 1); instance n's SA runs use
/// derive_seed(seed, 1000 + n) (QUBO) and derive_seed(seed, 2000 + n) (embedding and eQUBO).
std::vector<BenchRecord> run_type_suite(const SparseBinaryDataset& source, const TypeSuiteOptions& opts);

struct ScalingOptions {
  std::vector<std::string> architectures = {"1-3-1", "3-1-3-1", "3-3-1", "1-3-3-1", "3-1-3-3-1", "3-3-3-1", "7-3-1"};
  std::size_t points = 8;
  double min_sample_ms = 20.0;  // repeat short runs until this much time has been measured
  std::uint64_t seed = 0;
};

std::vector<BenchRecord> run_scaling_suite(const SparseBinaryDataset& source, const ScalingOptions& opts);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Histograms of log10 runtime and distance per (formulation, solver), plus the
/// log2(runtime) vs weight-count fit over oracle records.
nlohmann::json bench_summary(std::span<const BenchRecord> records);

}  // namespace qbnn
