#include <algorithm>
#include <cmath>

#include "mgtv/detail/sum.hpp"
#include "mgtv/discrete.hpp"

namespace mgtv {

using detail::CompensatedSum;

Mesh Mesh::build(const MetricGraph &g, const PiecewiseConstant &u0,
                 double h_max) {
  if (!(h_max > 0.0))
    throw std::invalid_argument("h_max must be positive");
  if (u0.num_edges() != g.num_edges())
    throw DimensionError("datum does not match the graph");

  std::vector<std::vector<double>> bounds(g.num_edges());
  for (std::size_t i = 0; i < g.num_edges(); ++i) {
    const auto &breaks = u0.edge(EdgeIndex{i}).breaks;
    auto &b = bounds[i];
    b.push_back(breaks.front());
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
      const double lo = breaks[k], hi = breaks[k + 1];
      // The small slack keeps exact multiples of h_max from gaining a cell.
      const auto n = static_cast<std::size_t>(
          std::max(1.0, std::ceil((hi - lo) / h_max - 1e-9)));
      for (std::size_t j = 1; j < n; ++j)
        b.push_back(lo + (hi - lo) * static_cast<double>(j) /
                             static_cast<double>(n));
      b.push_back(hi);
    }
  }
  return from_bounds(g, std::move(bounds));
}

Mesh Mesh::from_bounds(const MetricGraph &g,
                       std::vector<std::vector<double>> bounds) {
  if (bounds.size() != g.num_edges())
    throw DimensionError("mesh has " + std::to_string(bounds.size()) +
                         " edges, graph has " +
                         std::to_string(g.num_edges()));
  Mesh m;
  m.bounds_ = std::move(bounds);
  for (std::size_t i = 0; i < m.bounds_.size(); ++i) {
    auto &b = m.bounds_[i];
    const double length = g.edge(EdgeIndex{i}).length;
    if (b.size() < 2 || std::abs(b.front()) > 1e-12 * length ||
        std::abs(b.back() - length) > 1e-9 * length)
      throw DimensionError("mesh bounds of edge " +
                           std::to_string(g.edge(EdgeIndex{i}).id) +
                           " do not tile [0, length]");
    b.front() = 0.0;
    b.back() = length;
    m.offsets_.push_back(m.widths_.size());
    for (std::size_t k = 0; k + 1 < b.size(); ++k) {
      const double w = b[k + 1] - b[k];
      if (!(w > 0.0))
        throw DimensionError("mesh cells must have positive width");
      m.widths_.push_back(w);
    }
  }
  return m;
}

double Mesh::max_width() const noexcept {
  return widths_.empty() ? 0.0 : *std::max_element(widths_.begin(), widths_.end());
}

double Mesh::min_width() const noexcept {
  return widths_.empty() ? 0.0 : *std::min_element(widths_.begin(), widths_.end());
}

std::size_t Mesh::adjacent_cell(const MetricGraph &g, EdgeIndex e,
                                VertexId v) const {
  return g.trace_sign(e, v) > 0 ? last_cell(e) : first_cell(e);
}

DiscreteState sample(const Mesh &mesh, const PiecewiseConstant &u) {
  if (u.num_edges() != mesh.num_edges())
    throw DimensionError("function does not match the mesh");
  DiscreteState s;
  s.values.reserve(mesh.num_cells());
  for (std::size_t i = 0; i < mesh.num_edges(); ++i) {
    const auto b = mesh.bounds(EdgeIndex{i});
    for (std::size_t k = 0; k + 1 < b.size(); ++k)
      s.values.push_back(u.value_at(EdgeIndex{i}, 0.5 * (b[k] + b[k + 1])));
  }
  return s;
}

PiecewiseConstant to_piecewise(const MetricGraph &g, const Mesh &mesh,
                               const DiscreteState &u) {
  if (u.size() != mesh.num_cells())
    throw DimensionError("state does not match the mesh");
  std::vector<EdgePieces> edges(mesh.num_edges());
  for (std::size_t i = 0; i < mesh.num_edges(); ++i) {
    const EdgeIndex e{i};
    const auto b = mesh.bounds(e);
    edges[i].breaks.assign(b.begin(), b.end());
    const auto first = u.values.begin() + static_cast<long>(mesh.offset(e));
    edges[i].values.assign(first, first + static_cast<long>(mesh.cell_count(e)));
  }
  return PiecewiseConstant(g, std::move(edges));
}

double discrete_mass(const Mesh &mesh, const DiscreteState &u) {
  if (u.size() != mesh.num_cells())
    throw DimensionError("state does not match the mesh");
  CompensatedSum sum;
  const auto w = mesh.widths();
  for (std::size_t c = 0; c < w.size(); ++c)
    sum += w[c] * u.values[c];
  return sum.value();
}

double discrete_mean(const MetricGraph &g, const Mesh &mesh,
                     const DiscreteState &u) {
  return discrete_mass(mesh, u) / g.total_length();
}

double discrete_l2(const Mesh &mesh, const DiscreteState &u, double offset) {
  if (u.size() != mesh.num_cells())
    throw DimensionError("state does not match the mesh");
  CompensatedSum sum;
  const auto w = mesh.widths();
  for (std::size_t c = 0; c < w.size(); ++c) {
    const double d = u.values[c] - offset;
    sum += w[c] * d * d;
  }
  return std::sqrt(sum.value());
}

double discrete_tv(const MetricGraph &g, const Mesh &mesh,
                   const DiscreteState &u) {
  if (u.size() != mesh.num_cells() || mesh.num_edges() != g.num_edges())
    throw DimensionError("state does not match the mesh");
  CompensatedSum sum;
  for (std::size_t i = 0; i < mesh.num_edges(); ++i) {
    const EdgeIndex e{i};
    for (std::size_t c = mesh.first_cell(e); c < mesh.last_cell(e); ++c)
      sum += std::abs(u.values[c + 1] - u.values[c]);
  }
  std::vector<double> traces;
  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    const VertexId vid{v};
    if (g.is_boundary(vid))
      continue;
    traces.clear();
    for (const Incidence &inc : g.incidence(vid))
      traces.push_back(u.values[inc.arrives ? mesh.last_cell(inc.edge)
                                            : mesh.first_cell(inc.edge)]);
    sum += vertex_variation(traces);
  }
  return sum.value();
}

std::vector<double> project_vertex_dual(std::span<const double> c) {
  std::vector<double> t(c.size());
  if (c.empty())
    return t;

  auto fill = [&](double mu) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      t[i] = std::clamp(c[i] - mu, -1.0, 1.0);
      s += t[i];
    }
    return s;
  };

  // sum_i clip(c_i - mu) is nonincreasing in mu: +d at lo, -d at hi.
  double lo = *std::min_element(c.begin(), c.end()) - 1.0;
  double hi = *std::max_element(c.begin(), c.end()) + 1.0;
  double s = fill(0.5 * (lo + hi));
  for (int it = 0; it < 200 && std::abs(s) > 1e-12; ++it) {
    const double mu = 0.5 * (lo + hi);
    if (s > 0.0)
      lo = mu;
    else
      hi = mu;
    s = fill(0.5 * (lo + hi));
  }

  // Resolve the shift exactly on the final active set.
  const double mu = 0.5 * (lo + hi);
  double free_sum = 0.0, clipped = 0.0;
  std::size_t free_count = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double r = c[i] - mu;
    if (r >= 1.0)
      clipped += 1.0;
    else if (r <= -1.0)
      clipped -= 1.0;
    else {
      free_sum += c[i];
      ++free_count;
    }
  }
  if (free_count > 0) {
    const double exact = (free_sum + clipped) / static_cast<double>(free_count);
    std::vector<double> saved = t;
    const double s_exact = fill(exact);
    if (std::abs(s_exact) > std::abs(s))
      t = std::move(saved);
  }
  return t;
}

}  // namespace mgtv
