#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgtv/graph.hpp"

namespace mgtv {

class FunctionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// One edge of a piecewise-constant function: breaks[0] = 0 < ... <
// breaks[n] = length, values[k] on (breaks[k], breaks[k+1]).
struct EdgePieces {
  std::vector<double> breaks;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double first() const { return values.front(); }
  double last() const { return values.back(); }
};

/// BV function on a metric graph, constant on finitely many subintervals of
/// each edge. Values at breakpoints are never stored; traces are one-sided
/// limits, i.e. the adjacent plateau values.
class PiecewiseConstant {
public:
  PiecewiseConstant() = default;

  /// Validates against `g`: one entry per edge (in EdgeIndex order), strictly
  /// increasing breaks tiling [0, length]. Endpoints within 1e-12 relative of
  /// the edge length are snapped.
  PiecewiseConstant(const MetricGraph &g, std::vector<EdgePieces> edges);

  static PiecewiseConstant constant(const MetricGraph &g, double c);

  std::size_t num_edges() const noexcept { return edges_.size(); }
  const EdgePieces &edge(EdgeIndex e) const { return edges_.at(e.index); }
  std::span<const EdgePieces> edges() const noexcept { return edges_; }

  /// Merges equal neighbouring plateaus. Idempotent.
  PiecewiseConstant normalized() const;

  /// Same skeleton, every plateau value replaced by f(value).
  template <class F>
  PiecewiseConstant transformed(F &&f) const {
    PiecewiseConstant out = *this;
    for (EdgePieces &p : out.edges_)
      for (double &v : p.values)
        v = f(v);
    return out;
  }

  PiecewiseConstant scaled(double factor) const {
    return transformed([factor](double v) { return factor * v; });
  }
  PiecewiseConstant shifted(double offset) const {
    return transformed([offset](double v) { return v + offset; });
  }

  double min_value() const;
  double max_value() const;

  /// Value on the plateau containing coordinate x of edge e (right-continuous,
  /// last plateau at x = length).
  double value_at(EdgeIndex e, double x) const;

private:
  std::vector<EdgePieces> edges_;
};

/// Kirchhoff dual field candidate: continuous and piecewise linear on each
/// edge, with its own node grid.
class PiecewiseLinear {
public:
  struct EdgeNodes {
    std::vector<double> coords;
    std::vector<double> values;
  };

  PiecewiseLinear() = default;
  PiecewiseLinear(const MetricGraph &g, std::vector<EdgeNodes> edges);

  const EdgeNodes &edge(EdgeIndex e) const { return edges_.at(e.index); }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  double value_at(EdgeIndex e, double x) const;
  double sup_norm() const;

  /// Signed trace [z]_e(v): z(length) at the terminal vertex, -z(0) at the
  /// initial vertex.
  double trace(const MetricGraph &g, EdgeIndex e, VertexId v) const;

private:
  std::vector<EdgeNodes> edges_;
};

struct VertexTraceVector {
  VertexId vertex;
  std::vector<double> values;  // one per entry of g.incidence(vertex)
};

/// [u]_e(v): first plateau at the initial vertex, last plateau at the
/// terminal vertex.
double trace(const MetricGraph &g, const PiecewiseConstant &u, EdgeIndex e,
             VertexId v);

VertexTraceVector vertex_traces(const MetricGraph &g,
                                const PiecewiseConstant &u, VertexId v);

/// |Du|(Γ): sum of interior jumps on every edge.
double du_mass(const PiecewiseConstant &u);

/// Weighted vertex-jump functional. The double sum runs over ordered pairs.
double jv(const MetricGraph &g, const PiecewiseConstant &u);

/// Lower median of the trace multiset.
double trace_median(std::span<const double> traces);

/// min over m of sum |c_e - m|, equal to the vertex contribution to TV.
double vertex_variation(std::span<const double> traces);
double vertex_variation(const VertexTraceVector &traces);

double tv(const MetricGraph &g, const PiecewiseConstant &u);

/// Total variation of an indicator. Throws FunctionError if a value is not 0
/// or 1.
double perimeter(const MetricGraph &g, const PiecewiseConstant &indicator);

/// Indicator of {u > t} on the skeleton of u.
PiecewiseConstant superlevel(const PiecewiseConstant &u, double t);

/// Level-set integral of the perimeter, exact for piecewise-constant u.
double coarea_sum(const MetricGraph &g, const PiecewiseConstant &u);

double kirchhoff_defect(const MetricGraph &g, const PiecewiseLinear &z,
                        VertexId v);

/// Interior-jump term + ∫ u z' - vertex-trace term; zero up to rounding.
double green_residual(const MetricGraph &g, const PiecewiseLinear &z,
                      const PiecewiseConstant &u);

/// Scale for green_residual: sum of absolute values of all terms.
double green_scale(const MetricGraph &g, const PiecewiseLinear &z,
                   const PiecewiseConstant &u);

double integral(const PiecewiseConstant &u);
double l2_norm(const PiecewiseConstant &u);

}  // namespace mgtv
