#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pafit/measures.hpp"
#include "pafit/random.hpp"
#include "pafit/weight_index.hpp"

namespace pafit {

/// Fitness values are stored on the grid k / 2^30, k in [1, 2^30], so that
/// attachment weights F_i * Z_n(i) are exact integers in units of 2^-30.
inline constexpr int kFitnessBits = 30;
inline constexpr std::uint64_t kFitnessScale = std::uint64_t{1} << kFitnessBits;

std::uint32_t quantize_fitness(double f);
inline double fitness_value(std::uint32_t units) { return static_cast<double>(units) / kFitnessScale; }

/// Bookkeeping identity or overflow check failed.
class AuditFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Increment {
  std::size_t vertex;
  std::int64_t count;
};

/// Read-only view of the frozen graph G_n handed to attachment kernels.
struct KernelView {
  std::size_t n;
  double lambda;
  double fbar;
  std::span<const std::uint32_t> fitness_units;
  std::span<const std::uint64_t> impact;
  const WeightIndex* weights;

  double fitness(std::size_t i) const { return fitness_value(fitness_units[i]); }
  /// P(i) = F_i Z_n(i) / sum_j F_j Z_n(j); consumes one uniform.
  std::size_t sample_vertex(RandomStream& rng) const {
    return weights->find(target_from_bits(rng.bits53(), weights->total()));
  }
  /// Conditional mean F_i Z_n(i) / (n fbar) prescribed for the increment.
  double expected_increment(std::size_t i) const {
    return lambda * static_cast<double>(weights->weight(i)) / static_cast<double>(weights->total());
  }
};

/// Emits increments Delta Z_n(i) >= 0 for the step n -> n + 1. May emit the
/// same vertex several times; counts are summed.
using KernelFn = std::function<void(const KernelView&, RandomStream&, std::vector<Increment>&)>;

struct M1Poisson {};
struct M2Multinomial {};
struct CustomKernel {
  std::string name;
  KernelFn fn;
};

class AttachmentModel {
 public:
  using Variant = std::variant<M1Poisson, M2Multinomial, CustomKernel>;

  static AttachmentModel m1() { return AttachmentModel(M1Poisson{}); }
  static AttachmentModel m2() { return AttachmentModel(M2Multinomial{}); }
  static AttachmentModel custom(std::string name, KernelFn fn) {
    return AttachmentModel(CustomKernel{std::move(name), std::move(fn)});
  }

  const Variant& variant() const { return v_; }
  std::string name() const;
  /// M2 needs an integer lambda.
  void validate(double lambda) const;

  /// Raw increments for one step drawn from the frozen view.
  void draw(const KernelView& view, RandomStream& rng, std::vector<Increment>& out) const;

 private:
  explicit AttachmentModel(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

struct EdgeRecord {
  std::uint64_t source;  // 0-based index of the new vertex
  std::uint64_t target;
  std::uint64_t multiplicity;
  bool operator==(const EdgeRecord&) const = default;
};

/// Evolving multigraph G_n, kept as fitness and impact arrays plus a weight
/// index over F_i * Z_n(i). Vertex indices are 0-based.
///
/// Per step the stream is consumed in a fixed order: first the attachment
/// draws for the step, then one uniform for the new vertex's fitness.
class GraphState {
 public:
  GraphState(FitnessDistribution dist, double lambda, AttachmentModel model, std::uint64_t seed,
             bool log_edges = false);

  std::size_t n() const { return impact_.size(); }
  double lambda() const { return lambda_; }
  const FitnessDistribution& distribution() const { return dist_; }
  const AttachmentModel& model() const { return model_; }

  std::span<const std::uint32_t> fitness_units() const { return fitness_; }
  double fitness(std::size_t i) const { return fitness_value(fitness_[i]); }
  std::span<const std::uint64_t> impact() const { return impact_; }
  const WeightIndex& weights() const { return index_; }

  std::uint64_t total_weight_units() const { return total_weight_; }
  double total_weight() const { return static_cast<double>(total_weight_) / kFitnessScale; }
  std::uint64_t total_impact() const { return total_impact_; }
  std::uint64_t edges() const { return edges_; }

  /// F-bar_n = (1 / (lambda n)) sum_j F_j Z_n(j).
  double fbar() const { return total_weight() / (lambda_ * static_cast<double>(n())); }

  KernelView view() const;

  /// G_n -> G_{n+1}.
  void step();

  /// Resample the increments of the next step from the frozen state using an
  /// external stream. Output is sorted by vertex with counts merged.
  void draw_increments(RandomStream& rng, std::vector<Increment>& out) const;

  /// Throws AuditFailure unless total_impact = n + edges and the weight index,
  /// the running total and a full re-summation agree exactly.
  void audit() const;

  const std::vector<EdgeRecord>& edge_log() const { return edge_log_; }
  RandomStream& rng() { return rng_; }
  const RandomStream& rng() const { return rng_; }

 private:
  void append_vertex();

  FitnessDistribution dist_;
  double lambda_;
  AttachmentModel model_;
  RandomStream rng_;
  bool log_edges_;

  std::vector<std::uint32_t> fitness_;
  std::vector<std::uint64_t> impact_;
  WeightIndex index_;
  std::uint64_t total_weight_ = 0;
  std::uint64_t total_impact_ = 0;
  std::uint64_t edges_ = 0;
  std::vector<EdgeRecord> edge_log_;
  std::vector<Increment> scratch_;
};

/// Sort by vertex, merge duplicates, reject negative counts and bad indices.
void normalize_increments(std::vector<Increment>& inc, std::size_t n);

inline GraphState new_graph(const FitnessDistribution& dist, double lambda, const AttachmentModel& model,
                            std::uint64_t seed, bool log_edges = false) {
  return GraphState(dist, lambda, model, seed, log_edges);
}

}  // namespace pafit
