#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mgtv::testing {

namespace {

// max sum t_i c_i over {sum t = 0, |t_i| <= 1}: a basic solution has every
// coordinate but one at a bound.
double vertex_block(const std::vector<double> &c) {
  const std::size_t d = c.size();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t free = 0; free < d; ++free) {
    const std::size_t patterns = std::size_t{1} << (d - 1);
    for (std::size_t mask = 0; mask < patterns; ++mask) {
      double sum = 0.0, value = 0.0;
      std::size_t bit = 0;
      for (std::size_t i = 0; i < d; ++i) {
        if (i == free)
          continue;
        const double t = (mask >> bit++) & 1 ? 1.0 : -1.0;
        sum += t;
        value += t * c[i];
      }
      if (std::abs(sum) > 1.0)
        continue;
      best = std::max(best, value - sum * c[free]);
    }
  }
  return best;
}

double interior_blocks(const PiecewiseConstant &u) {
  double total = 0.0;
  for (const EdgePieces &p : u.edges())
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
      const double jump = p.values[k + 1] - p.values[k];
      double best = -std::numeric_limits<double>::infinity();
      for (double z : {-1.0, 1.0})
        best = std::max(best, -jump * z);
      total += best;
    }
  return total;
}

}  // namespace

double tv_bruteforce_oracle(const MetricGraph &g, const PiecewiseConstant &u) {
  double total = interior_blocks(u);
  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    std::vector<double> c;
    for (const Incidence &inc : g.incidence(VertexId{v})) {
      const EdgePieces &p = u.edge(inc.edge);
      c.push_back(inc.arrives ? p.last() : p.first());
    }
    total += vertex_block(c);
  }
  return total;
}

double du_mass_sup_oracle(const MetricGraph &, const PiecewiseConstant &u) {
  return interior_blocks(u);
}

MetricGraph Generator::tree(std::size_t max_edges) {
  const std::size_t m = index(1, max_edges);
  GraphSpec spec;
  spec.vertices.push_back("v0");
  for (std::size_t k = 1; k <= m; ++k) {
    spec.vertices.push_back("v" + std::to_string(k));
    const std::size_t parent = index(0, k - 1);
    std::string a = spec.vertices[parent], b = spec.vertices[k];
    if (index(0, 1))
      std::swap(a, b);
    spec.edges.push_back({k - 1, a, b, uniform(0.5, 2.0)});
  }
  return MetricGraph::build(spec);
}

MetricGraph Generator::path(std::size_t max_edges) {
  const std::size_t m = index(1, max_edges);
  GraphSpec spec;
  for (std::size_t k = 0; k <= m; ++k)
    spec.vertices.push_back("v" + std::to_string(k));
  for (std::size_t k = 0; k < m; ++k) {
    std::string a = spec.vertices[k], b = spec.vertices[k + 1];
    if (index(0, 1))
      std::swap(a, b);
    spec.edges.push_back({k, a, b, uniform(0.5, 2.0)});
  }
  return MetricGraph::build(spec);
}

std::vector<double> Generator::grid(double length, std::size_t cells) {
  std::vector<double> cuts;
  while (cuts.size() + 1 < cells) {
    const double x = uniform(0.05, 0.95) * length;
    if (std::none_of(cuts.begin(), cuts.end(),
                     [&](double y) { return std::abs(x - y) < 1e-3 * length; }))
      cuts.push_back(x);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.insert(cuts.begin(), 0.0);
  cuts.push_back(length);
  return cuts;
}

PiecewiseConstant Generator::function(const MetricGraph &g, std::size_t max_pieces,
                                      double range) {
  const bool coarse = index(0, 1) == 1;
  std::vector<EdgePieces> edges;
  for (const Edge &e : g.edges()) {
    EdgePieces p;
    p.breaks = grid(e.length, index(1, max_pieces));
    for (std::size_t k = 0; k + 1 < p.breaks.size(); ++k)
      p.values.push_back(coarse ? range * (static_cast<double>(index(0, 8)) / 4.0 - 1.0)
                                : uniform(-range, range));
    edges.push_back(std::move(p));
  }
  return PiecewiseConstant(g, std::move(edges));
}

PiecewiseLinear Generator::field(const MetricGraph &g) {
  std::vector<PiecewiseLinear::EdgeNodes> edges;
  for (const Edge &e : g.edges()) {
    PiecewiseLinear::EdgeNodes n;
    n.coords = grid(e.length, index(1, 5));
    for (std::size_t k = 0; k < n.coords.size(); ++k)
      n.values.push_back(uniform(-1.5, 1.5));
    edges.push_back(std::move(n));
  }
  return PiecewiseLinear(g, std::move(edges));
}

}  // namespace mgtv::testing
