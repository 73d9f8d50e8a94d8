#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mgtv/graph.hpp"
#include "mgtv/pwfunc.hpp"

namespace mgtv::testing {

/// Maximum of the dual linear program defining TV: interior-breakpoint
/// multipliers z in [-1, 1] and, at each vertex, trace multipliers t with
/// sum t = 0 and |t| <= 1. Every basic solution of each block is enumerated.
double tv_bruteforce_oracle(const MetricGraph &g, const PiecewiseConstant &u);

/// Same program with every trace multiplier fixed at 0.
double du_mass_sup_oracle(const MetricGraph &g, const PiecewiseConstant &u);

struct Instance {
  MetricGraph graph;
  PiecewiseConstant u;
};

class Generator {
public:
  explicit Generator(std::uint64_t seed) : rng_(seed) { }

  /// Random tree with 1..max_edges edges and random orientations.
  MetricGraph tree(std::size_t max_edges = 8);
  /// Path whose edges have random orientations.
  MetricGraph path(std::size_t max_edges = 8);
  /// Random function with 1..max_pieces plateaus per edge; values in
  /// [-range, range], drawn from a coarse grid half of the time so ties occur.
  PiecewiseConstant function(const MetricGraph &g, std::size_t max_pieces = 4,
                             double range = 2.0);
  /// Random field with 2..6 nodes per edge; not Kirchhoff in general.
  PiecewiseLinear field(const MetricGraph &g);

  Instance instance() {
    MetricGraph g = tree();
    PiecewiseConstant u = function(g);
    return {std::move(g), std::move(u)};
  }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }

private:
  std::vector<double> grid(double length, std::size_t cells);

  std::mt19937_64 rng_;
};

}  // namespace mgtv::testing
