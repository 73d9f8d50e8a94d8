#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "mgtv/graph.hpp"
#include "mgtv/pwfunc.hpp"

namespace mgtv {

class DimensionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Cell decomposition of every edge. Cells are stored edge by edge in
/// EdgeIndex order, left to right in edge coordinates.
class Mesh {
public:
  Mesh() = default;

  /// Every breakpoint of u0 is a cell boundary; each plateau is split
  /// uniformly into ceil(width / h_max) cells.
  static Mesh build(const MetricGraph &g, const PiecewiseConstant &u0,
                    double h_max);

  /// Mesh with explicit cell boundaries per edge (0 ... length).
  static Mesh from_bounds(const MetricGraph &g,
                          std::vector<std::vector<double>> bounds);

  std::size_t num_cells() const noexcept { return widths_.size(); }
  std::size_t num_edges() const noexcept { return bounds_.size(); }

  std::span<const double> bounds(EdgeIndex e) const { return bounds_.at(e.index); }
  std::size_t offset(EdgeIndex e) const { return offsets_.at(e.index); }
  std::size_t cell_count(EdgeIndex e) const {
    return bounds_.at(e.index).size() - 1;
  }
  std::size_t first_cell(EdgeIndex e) const { return offset(e); }
  std::size_t last_cell(EdgeIndex e) const {
    return offset(e) + cell_count(e) - 1;
  }

  std::span<const double> widths() const noexcept { return widths_; }
  double max_width() const noexcept;
  double min_width() const noexcept;

  /// Cell adjacent to vertex v along edge e.
  std::size_t adjacent_cell(const MetricGraph &g, EdgeIndex e, VertexId v) const;

private:
  std::vector<std::vector<double>> bounds_;
  std::vector<std::size_t> offsets_;
  std::vector<double> widths_;
};

/// Cell values of the flow unknown, laid out as in Mesh.
struct DiscreteState {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
};

/// Cell-midpoint sampling; lossless when the mesh is aligned with u.
DiscreteState sample(const Mesh &mesh, const PiecewiseConstant &u);

PiecewiseConstant to_piecewise(const MetricGraph &g, const Mesh &mesh,
                               const DiscreteState &u);

double discrete_mass(const Mesh &mesh, const DiscreteState &u);
double discrete_mean(const MetricGraph &g, const Mesh &mesh,
                     const DiscreteState &u);
/// L2(Γ) norm of u - offset.
double discrete_l2(const Mesh &mesh, const DiscreteState &u,
                   double offset = 0.0);

/// Interior-face jumps plus the median vertex term, with adjacent cells as
/// vertex traces.
double discrete_tv(const MetricGraph &g, const Mesh &mesh,
                   const DiscreteState &u);

/// Euclidean projection onto {t : sum t = 0, |t_i| <= 1} by bisection on the
/// shift mu in t_i = clip(c_i - mu, -1, 1).
std::vector<double> project_vertex_dual(std::span<const double> c);

}  // namespace mgtv
