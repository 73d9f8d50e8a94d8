#include "mgtv/pwfunc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mgtv/detail/sum.hpp"

namespace mgtv {

using detail::CompensatedSum;

namespace {

constexpr double kSnapTol = 1e-12;

void check_grid(std::vector<double> &coords, double length, std::size_t id,
                const char *what) {
  if (coords.size() < 2)
    throw FunctionError(std::string(what) + " on edge " + std::to_string(id) +
                        " needs at least two coordinates");
  if (std::abs(coords.front()) > kSnapTol * length)
    throw FunctionError(std::string(what) + " on edge " + std::to_string(id) +
                        " does not start at 0");
  if (std::abs(coords.back() - length) > kSnapTol * length)
    throw FunctionError(std::string(what) + " on edge " + std::to_string(id) +
                        " does not end at the edge length");
  coords.front() = 0.0;
  coords.back() = length;
  for (std::size_t k = 1; k < coords.size(); ++k) {
    if (!(coords[k] > coords[k - 1]))
      throw FunctionError(std::string(what) + " on edge " + std::to_string(id) +
                          " are not strictly increasing");
  }
}

// Position of the segment containing x (right-continuous).
std::size_t locate(const std::vector<double> &coords, double x) {
  auto it = std::upper_bound(coords.begin() + 1, coords.end() - 1, x);
  return static_cast<std::size_t>(it - coords.begin()) - 1;
}

}  // namespace

// PiecewiseConstant ---------------------------------------------------------

PiecewiseConstant::PiecewiseConstant(const MetricGraph &g,
                                     std::vector<EdgePieces> edges)
    : edges_(std::move(edges)) {
  if (edges_.size() != g.num_edges())
    throw FunctionError("function has " + std::to_string(edges_.size()) +
                        " edges, graph has " + std::to_string(g.num_edges()));
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge &e = g.edge(EdgeIndex{i});
    EdgePieces &p = edges_[i];
    check_grid(p.breaks, e.length, e.id, "breakpoints");
    if (p.values.size() + 1 != p.breaks.size())
      throw FunctionError("edge " + std::to_string(e.id) +
                          ": value count must be breakpoint count - 1");
    for (double v : p.values) {
      if (!std::isfinite(v))
        throw FunctionError("edge " + std::to_string(e.id) +
                            ": non-finite plateau value");
    }
  }
}

PiecewiseConstant PiecewiseConstant::constant(const MetricGraph &g, double c) {
  std::vector<EdgePieces> edges;
  for (const Edge &e : g.edges())
    edges.push_back(EdgePieces{{0.0, e.length}, {c}});
  return PiecewiseConstant(g, std::move(edges));
}

PiecewiseConstant PiecewiseConstant::normalized() const {
  PiecewiseConstant out;
  out.edges_.reserve(edges_.size());
  for (const EdgePieces &p : edges_) {
    EdgePieces q;
    q.breaks.push_back(p.breaks.front());
    for (std::size_t k = 0; k < p.values.size(); ++k) {
      if (!q.values.empty() && q.values.back() == p.values[k]) {
        q.breaks.back() = p.breaks[k + 1];
        continue;
      }
      q.values.push_back(p.values[k]);
      q.breaks.push_back(p.breaks[k + 1]);
    }
    out.edges_.push_back(std::move(q));
  }
  return out;
}

double PiecewiseConstant::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (const EdgePieces &p : edges_)
    for (double v : p.values)
      m = std::min(m, v);
  return m;
}

double PiecewiseConstant::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const EdgePieces &p : edges_)
    for (double v : p.values)
      m = std::max(m, v);
  return m;
}

double PiecewiseConstant::value_at(EdgeIndex e, double x) const {
  const EdgePieces &p = edge(e);
  return p.values[locate(p.breaks, x)];
}

// PiecewiseLinear -----------------------------------------------------------

PiecewiseLinear::PiecewiseLinear(const MetricGraph &g,
                                 std::vector<EdgeNodes> edges)
    : edges_(std::move(edges)) {
  if (edges_.size() != g.num_edges())
    throw FunctionError("field has " + std::to_string(edges_.size()) +
                        " edges, graph has " + std::to_string(g.num_edges()));
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge &e = g.edge(EdgeIndex{i});
    check_grid(edges_[i].coords, e.length, e.id, "nodes");
    if (edges_[i].values.size() != edges_[i].coords.size())
      throw FunctionError("edge " + std::to_string(e.id) +
                          ": one nodal value per node required");
  }
}

double PiecewiseLinear::value_at(EdgeIndex e, double x) const {
  const EdgeNodes &n = edge(e);
  const std::size_t k = locate(n.coords, x);
  const double x0 = n.coords[k], x1 = n.coords[k + 1];
  const double s = (x - x0) / (x1 - x0);
  return n.values[k] + s * (n.values[k + 1] - n.values[k]);
}

double PiecewiseLinear::sup_norm() const {
  double m = 0.0;
  for (const EdgeNodes &n : edges_)
    for (double v : n.values)
      m = std::max(m, std::abs(v));
  return m;
}

double PiecewiseLinear::trace(const MetricGraph &g, EdgeIndex e,
                              VertexId v) const {
  const EdgeNodes &n = edge(e);
  return g.trace_sign(e, v) > 0 ? n.values.back() : -n.values.front();
}

// Functionals ---------------------------------------------------------------

double trace(const MetricGraph &g, const PiecewiseConstant &u, EdgeIndex e,
             VertexId v) {
  const EdgePieces &p = u.edge(e);
  return g.trace_sign(e, v) > 0 ? p.last() : p.first();
}

VertexTraceVector vertex_traces(const MetricGraph &g,
                                const PiecewiseConstant &u, VertexId v) {
  VertexTraceVector out{v, {}};
  for (const Incidence &inc : g.incidence(v)) {
    const EdgePieces &p = u.edge(inc.edge);
    out.values.push_back(inc.arrives ? p.last() : p.first());
  }
  return out;
}

double du_mass(const PiecewiseConstant &u) {
  CompensatedSum sum;
  for (const EdgePieces &p : u.edges())
    for (std::size_t k = 1; k < p.values.size(); ++k)
      sum += std::abs(p.values[k] - p.values[k - 1]);
  return sum.value();
}

double jv(const MetricGraph &g, const PiecewiseConstant &u) {
  CompensatedSum sum;
  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    const VertexId vid{v};
    if (g.is_boundary(vid))
      continue;
    const auto traces = vertex_traces(g, u, vid).values;
    double pairs = 0.0;
    for (double a : traces)
      for (double b : traces)
        pairs += std::abs(a - b);
    sum += pairs / static_cast<double>(traces.size());
  }
  return sum.value();
}

double trace_median(std::span<const double> traces) {
  if (traces.empty())
    throw FunctionError("median of an empty trace vector");
  std::vector<double> sorted(traces.begin(), traces.end());
  const std::size_t mid = (sorted.size() - 1) / 2;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(mid),
                   sorted.end());
  return sorted[mid];
}

double vertex_variation(std::span<const double> traces) {
  const double m = trace_median(traces);
  double sum = 0.0;
  for (double c : traces)
    sum += std::abs(c - m);
  return sum;
}

double vertex_variation(const VertexTraceVector &traces) {
  return vertex_variation(std::span<const double>(traces.values));
}

double tv(const MetricGraph &g, const PiecewiseConstant &u) {
  CompensatedSum sum;
  sum += du_mass(u);
  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    const VertexId vid{v};
    if (g.is_boundary(vid))
      continue;
    sum += vertex_variation(vertex_traces(g, u, vid));
  }
  return sum.value();
}

double perimeter(const MetricGraph &g, const PiecewiseConstant &indicator) {
  for (const EdgePieces &p : indicator.edges())
    for (double v : p.values)
      if (v != 0.0 && v != 1.0)
        throw FunctionError("perimeter needs an indicator (values in {0,1})");
  return tv(g, indicator);
}

PiecewiseConstant superlevel(const PiecewiseConstant &u, double t) {
  return u.transformed([t](double v) { return v > t ? 1.0 : 0.0; });
}

double coarea_sum(const MetricGraph &g, const PiecewiseConstant &u) {
  std::vector<double> levels;
  for (const EdgePieces &p : u.edges())
    levels.insert(levels.end(), p.values.begin(), p.values.end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  // Per(E_s) is constant for s strictly between consecutive levels.
  CompensatedSum sum;
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    const double s = 0.5 * (levels[k] + levels[k + 1]);
    sum += (levels[k + 1] - levels[k]) * perimeter(g, superlevel(u, s));
  }
  return sum.value();
}

double kirchhoff_defect(const MetricGraph &g, const PiecewiseLinear &z,
                        VertexId v) {
  double sum = 0.0;
  for (const Incidence &inc : g.incidence(v))
    sum += z.trace(g, inc.edge, v);
  return sum;
}

namespace {

struct GreenTerms {
  CompensatedSum jumps;
  CompensatedSum bulk;
  CompensatedSum vertex;
  CompensatedSum scale;
};

GreenTerms green_terms(const MetricGraph &g, const PiecewiseLinear &z,
                       const PiecewiseConstant &u) {
  GreenTerms t;
  for (std::size_t i = 0; i < g.num_edges(); ++i) {
    const EdgeIndex e{i};
    const EdgePieces &p = u.edge(e);
    const auto &nodes = z.edge(e);

    for (std::size_t k = 1; k < p.values.size(); ++k) {
      const double term =
          z.value_at(e, p.breaks[k]) * (p.values[k] - p.values[k - 1]);
      t.jumps += term;
      t.scale += std::abs(term);
    }

    // Exact ∫ u z' on the merged grid.
    std::vector<double> grid = p.breaks;
    grid.insert(grid.end(), nodes.coords.begin(), nodes.coords.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      const double mid = 0.5 * (grid[k] + grid[k + 1]);
      const double term = u.value_at(e, mid) *
                          (z.value_at(e, grid[k + 1]) - z.value_at(e, grid[k]));
      t.bulk += term;
      t.scale += std::abs(term);
    }

    const double head = nodes.values.back() * p.last();
    const double tail = -nodes.values.front() * p.first();
    t.vertex += head;
    t.vertex += tail;
    t.scale += std::abs(head) + std::abs(tail);
  }
  return t;
}

}  // namespace

double green_residual(const MetricGraph &g, const PiecewiseLinear &z,
                      const PiecewiseConstant &u) {
  GreenTerms t = green_terms(g, z, u);
  CompensatedSum r;
  r += t.jumps.value();
  r += t.bulk.value();
  r += -t.vertex.value();
  return r.value();
}

double green_scale(const MetricGraph &g, const PiecewiseLinear &z,
                   const PiecewiseConstant &u) {
  return green_terms(g, z, u).scale.value();
}

double integral(const PiecewiseConstant &u) {
  CompensatedSum sum;
  for (const EdgePieces &p : u.edges())
    for (std::size_t k = 0; k < p.values.size(); ++k)
      sum += (p.breaks[k + 1] - p.breaks[k]) * p.values[k];
  return sum.value();
}

double l2_norm(const PiecewiseConstant &u) {
  CompensatedSum sum;
  for (const EdgePieces &p : u.edges())
    for (std::size_t k = 0; k < p.values.size(); ++k)
      sum += (p.breaks[k + 1] - p.breaks[k]) * p.values[k] * p.values[k];
  return std::sqrt(sum.value());
}

}  // namespace mgtv
