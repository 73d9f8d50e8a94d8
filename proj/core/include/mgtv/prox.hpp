#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgtv/discrete.hpp"
#include "mgtv/graph.hpp"

namespace mgtv {

enum class Coupling {
  kCoupled,    // vertex trace duals active (TV on the metric graph)
  kDecoupled,  // vertex duals frozen at zero (independent Neumann problems)
};

enum class ProxMethod {
  kAuto,        // exact when the cell graph is a forest, primal-dual otherwise
  kExactTree,   // derivative message passing; requires a forest
  kPrimalDual,  // Chambolle-Pock
};

struct ProxOptions {
  ProxMethod method = ProxMethod::kAuto;
  double tol = 1e-8;
  std::size_t max_iter = 200000;
  std::size_t check_every = 10;
  bool accelerate = true;
};

/// Dual certificate of one prox step.
struct DualState {
  // one per interior face, edge by edge (n_e - 1 per edge)
  std::vector<double> faces;
  // per interior vertex (in vertex order), one entry per incidence;
  // empty when decoupled
  std::vector<std::vector<double>> vertex_traces;
  // median of the adjacent-cell values at each interior vertex
  std::vector<double> levels;
};

struct ProxReport {
  double gap = 0.0;
  double energy = 0.0;
  std::size_t iterations = 0;
};

struct ProxResult {
  DiscreteState u;
  DualState dual;
  ProxReport report;
};

class ProxNotConverged : public std::runtime_error {
public:
  ProxNotConverged(double gap, std::size_t iterations)
      : std::runtime_error("prox did not converge in " +
                           std::to_string(iterations) +
                           " iterations (last gap " + std::to_string(gap) + ")"),
        gap_(gap), iterations_(iterations) { }

  double gap() const noexcept { return gap_; }
  std::size_t iterations() const noexcept { return iterations_; }

private:
  double gap_;
  std::size_t iterations_;
};

/// Resolvent of the discrete total variation:
///
///   argmin_u  sum_c h_c (u_c - w_c)^2 / (2 tau) + discrete_tv(u)
///
/// in terms of y = (face duals, vertex trace duals). On forests the optimal y
/// is computed exactly by passing clamped derivative messages to a root;
/// otherwise (or on request) a Chambolle-Pock iteration is used.
/// The returned primal is u(y) = w - (tau / h) K^T y, so the flux identity
/// (u - w) / tau = z' and mass conservation hold for every iterate; the
/// reported gap is TV(u(y)) - <K u(y), y>.
class ProxSolver {
public:
  ProxSolver(const MetricGraph &g, const Mesh &mesh,
             Coupling coupling = Coupling::kCoupled);

  ProxResult solve(const DiscreteState &w, double tau, const ProxOptions &opts,
                   const DualState *warm = nullptr) const;

  /// y = K u (faces then vertex entries).
  void apply(const std::vector<double> &u, std::vector<double> &y) const;
  /// u = K^T y.
  void apply_adjoint(const std::vector<double> &y, std::vector<double> &u) const;

  std::size_t num_cells() const noexcept { return num_cells_; }
  std::size_t num_faces() const noexcept { return face_left_.size(); }
  std::size_t num_dual() const noexcept {
    return face_left_.size() + vertex_cells_.size();
  }
  Coupling coupling() const noexcept { return coupling_; }
  /// Cells plus one auxiliary node per coupled vertex, linked by faces and
  /// vertex entries, form a forest (always true when decoupled).
  bool is_forest() const noexcept { return forest_; }

  /// Upper bound on the norm of the fidelity-scaled operator.
  double operator_norm_bound(double tau) const;

  DualState unpack(const std::vector<double> &y,
                   const std::vector<double> &u) const;
  std::vector<double> pack(const DualState &dual) const;

private:
  void build_forest();
  void project(std::vector<double> &y) const;
  double tv_of(const std::vector<double> &ku) const;
  std::vector<double> solve_forest(const DiscreteState &w, double tau) const;

  MetricGraph graph_;
  Mesh mesh_;
  Coupling coupling_;
  std::size_t num_cells_ = 0;
  std::vector<std::size_t> face_left_;      // left cell of each face
  std::vector<std::size_t> vertex_cells_;   // adjacent cell per vertex entry
  std::vector<std::size_t> vertex_offsets_; // block starts, size = blocks + 1

  // Rooted forest over cells and auxiliary vertex nodes (when acyclic).
  struct TreeLink {
    std::size_t parent;
    std::size_t dual;   // index into y
    double sign;        // y = sign * sign(x_node - x_parent)
  };
  bool forest_ = false;
  std::vector<std::size_t> order_;        // parents before children
  std::vector<TreeLink> link_;            // per node; parent == node for roots
};

}  // namespace mgtv
