#include "pafit/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pafit {

std::uint32_t quantize_fitness(double f) {
  const double scaled = std::nearbyint(f * static_cast<double>(kFitnessScale));
  return static_cast<std::uint32_t>(std::clamp(scaled, 1.0, static_cast<double>(kFitnessScale)));
}

std::string AttachmentModel::name() const {
  return std::visit([](const auto& m) -> std::string {
    using T = std::decay_t<decltype(m)>;
    if constexpr (std::is_same_v<T, M1Poisson>)
      return "M1";
    else if constexpr (std::is_same_v<T, M2Multinomial>)
      return "M2";
    else
      return "custom:" + m.name;
  }, v_);
}

void AttachmentModel::validate(double lambda) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ContractViolation("lambda must be positive and finite");
  if (std::holds_alternative<M2Multinomial>(v_) && lambda != std::floor(lambda))
    throw ContractViolation("model M2 needs an integer lambda");
  if (const auto* c = std::get_if<CustomKernel>(&v_); c && !c->fn)
    throw ContractViolation("custom kernel without a callback");
}

void AttachmentModel::draw(const KernelView& view, RandomStream& rng, std::vector<Increment>& out) const {
  out.clear();
  std::visit([&](const auto& m) {
    using T = std::decay_t<decltype(m)>;
    if constexpr (std::is_same_v<T, M1Poisson>) {
      // Independent Poisson(lambda p_i) counts == Poisson(lambda) total split categorically.
      const std::uint64_t e = rng.poisson(view.lambda);
      for (std::uint64_t j = 0; j < e; ++j) out.push_back({view.sample_vertex(rng), 1});
    } else if constexpr (std::is_same_v<T, M2Multinomial>) {
      const auto e = static_cast<std::uint64_t>(view.lambda);
      for (std::uint64_t j = 0; j < e; ++j) out.push_back({view.sample_vertex(rng), 1});
    } else {
      m.fn(view, rng, out);
    }
  }, v_);
}

void normalize_increments(std::vector<Increment>& inc, std::size_t n) {
  for (const auto& x : inc) {
    if (x.count < 0) throw ContractViolation("attachment kernel emitted a negative increment");
    if (x.vertex >= n) throw ContractViolation("attachment kernel targeted a vertex that does not exist");
  }
  std::sort(inc.begin(), inc.end(), [](const Increment& a, const Increment& b) { return a.vertex < b.vertex; });
  std::size_t w = 0;
  for (std::size_t r = 0; r < inc.size(); ++r) {
    if (inc[r].count == 0) continue;
    if (w > 0 && inc[w - 1].vertex == inc[r].vertex)
      inc[w - 1].count += inc[r].count;
    else
      inc[w++] = inc[r];
  }
  inc.resize(w);
}

GraphState::GraphState(FitnessDistribution dist, double lambda, AttachmentModel model, std::uint64_t seed,
                       bool log_edges)
    : dist_(std::move(dist)), lambda_(lambda), model_(std::move(model)), rng_(seed), log_edges_(log_edges) {
  model_.validate(lambda_);
  append_vertex();
}

KernelView GraphState::view() const { return KernelView{n(), lambda_, fbar(), fitness_, impact_, &index_}; }

void GraphState::append_vertex() {
  const std::uint32_t units = quantize_fitness(dist_.sample(rng_));
  fitness_.push_back(units);
  impact_.push_back(1);
  index_.push_back(units);
  total_weight_ += units;
  total_impact_ += 1;
}

void GraphState::draw_increments(RandomStream& rng, std::vector<Increment>& out) const {
  model_.draw(view(), rng, out);
  normalize_increments(out, n());
}

void GraphState::step() {
  draw_increments(rng_, scratch_);
  const auto source = static_cast<std::uint64_t>(n());
  for (const auto& inc : scratch_) {
    const auto count = static_cast<std::uint64_t>(inc.count);
    const std::uint64_t dw = count * fitness_[inc.vertex];
    if (total_weight_ > std::numeric_limits<std::uint64_t>::max() / 2 - dw)
      throw AuditFailure("attachment weight overflow: run too long for 64-bit weight sums");
    impact_[inc.vertex] += count;
    index_.add(inc.vertex, dw);
    total_weight_ += dw;
    total_impact_ += count;
    edges_ += count;
    if (log_edges_) edge_log_.push_back({source, inc.vertex, count});
  }
  append_vertex();
}

void GraphState::audit() const {
  if (total_impact_ != n() + edges_) throw AuditFailure("total impact != n + number of edges");
  std::uint64_t impact_sum = 0;
  std::uint64_t weight_sum = 0;
  for (std::size_t i = 0; i < n(); ++i) {
    if (impact_[i] < 1) throw AuditFailure("impact below 1");
    impact_sum += impact_[i];
    weight_sum += impact_[i] * fitness_[i];
  }
  if (impact_sum != total_impact_) throw AuditFailure("impact array does not sum to total impact");
  if (weight_sum != total_weight_ || index_.total() != total_weight_ || index_.prefix(n()) != total_weight_)
    throw AuditFailure("weight index out of sync with fitness * impact");
}

}  // namespace pafit
