#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mgtv/discrete.hpp"
#include "mgtv/graph.hpp"
#include "mgtv/prox.hpp"

namespace mgtv {

/// Residuals of the discrete subdifferential certificate of one prox step.
/// z is rebuilt from the duals: z = p on interior faces and [z]_e(v) = -t_{e,v}
/// at vertices (zero at boundary vertices).
struct CertificateReport {
  double supnorm_excess = 0.0;     // max |z| - 1
  double kirchhoff_defect = 0.0;   // max_v |sum_e [z]_e(v)|
  double divergence_mismatch = 0.0;// || (u_next - u_prev)/tau - z' ||_L2
  double energy_gap = 0.0;         // |<u_next, -z'> - TV(u_next)|

  bool passes(double tol, double tv_scale) const noexcept {
    return supnorm_excess <= tol && kirchhoff_defect <= tol &&
           divergence_mismatch <= tol && energy_gap <= tol * (1.0 + tv_scale);
  }
};

CertificateReport certificate_check(const MetricGraph &g, const Mesh &mesh,
                                    const DiscreteState &u_prev,
                                    const DiscreteState &u_next,
                                    const DualState &dual, double tau);

struct StepDiagnostics {
  double t = 0.0;
  double mass = 0.0;
  double tv = 0.0;
  double l2 = 0.0;  // ||u(t) - mean(u0)||_L2
  double gap = 0.0;
  std::size_t iterations = 0;
  CertificateReport certificate;
};

struct Trajectory {
  Mesh mesh;
  double mean0 = 0.0;
  std::vector<double> times;
  std::vector<DiscreteState> snapshots;
  std::vector<StepDiagnostics> diagnostics;  // one per step, including t = 0
};

struct FlowOptions {
  ProxOptions prox;
  double extinction_tol = 1e-6;
  std::size_t snapshot_every = 1;
  bool stop_at_extinction = true;
  // Stop once a step changes no cell by more than extinction_tol.
  bool stop_when_stationary = false;
};

/// Implicit Euler chain u^{k+1} = prox(u^k, tau) at t_k = k tau until
/// t_k >= t_end or extinction. The initial and final states are always
/// snapshots. Non-converged prox steps propagate ProxNotConverged.
Trajectory run_flow(const MetricGraph &g, const Mesh &mesh,
                    const DiscreteState &u0, double tau, double t_end,
                    const FlowOptions &opts = {},
                    Coupling coupling = Coupling::kCoupled);

/// Same chain with every vertex dual frozen at zero.
Trajectory run_decoupled_flow(const MetricGraph &g, const Mesh &mesh,
                              const DiscreteState &u0, double tau,
                              double t_end, const FlowOptions &opts = {});

/// First snapshot time with max_c |u_c - mean(u0)| <= tol (1 + |mean(u0)|).
std::optional<double> detect_extinction(const Trajectory &traj, double tol);

/// Times at which the number of distinct plateau levels (values closer than
/// tol merged along the graph) decreases.
std::vector<double> merge_times(const MetricGraph &g, const Trajectory &traj,
                                double tol);

/// Integral of u over each edge.
std::vector<double> edge_masses(const Mesh &mesh, const DiscreteState &u);

}  // namespace mgtv
