#include "mgtv/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mgtv/detail/sum.hpp"

namespace mgtv {

using detail::CompensatedSum;

namespace {

bool is_extinct(const DiscreteState &u, double mean, double tol) {
  const double bound = tol * (1.0 + std::abs(mean));
  return std::all_of(u.values.begin(), u.values.end(),
                     [&](double v) { return std::abs(v - mean) <= bound; });
}

double max_change(const DiscreteState &a, const DiscreteState &b) {
  double m = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c)
    m = std::max(m, std::abs(a.values[c] - b.values[c]));
  return m;
}

}  // namespace

CertificateReport certificate_check(const MetricGraph &g, const Mesh &mesh,
                                    const DiscreteState &u_prev,
                                    const DiscreteState &u_next,
                                    const DualState &dual, double tau) {
  if (u_prev.size() != mesh.num_cells() || u_next.size() != mesh.num_cells())
    throw DimensionError("state does not match the mesh");
  std::size_t faces = 0;
  for (std::size_t i = 0; i < mesh.num_edges(); ++i)
    faces += mesh.cell_count(EdgeIndex{i}) - 1;
  if (dual.faces.size() != faces)
    throw DimensionError("dual does not match the mesh");

  // Vertex duals t_{e,v}, zero where absent (boundary or decoupled).
  std::vector<double> t_init(g.num_edges(), 0.0), t_term(g.num_edges(), 0.0);
  CertificateReport r;
  std::size_t block = 0;
  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    const VertexId vid{v};
    if (g.is_boundary(vid))
      continue;
    const auto inc = g.incidence(vid);
    if (block < dual.vertex_traces.size()) {
      const auto &t = dual.vertex_traces[block];
      if (t.size() != inc.size())
        throw DimensionError("vertex dual does not match the vertex degree");
      double sum = 0.0;
      for (std::size_t k = 0; k < inc.size(); ++k) {
        (inc[k].arrives ? t_term : t_init)[inc[k].edge.index] = t[k];
        sum += -t[k];  // [z]_e(v) = -t_{e,v}
      }
      r.kirchhoff_defect = std::max(r.kirchhoff_defect, std::abs(sum));
    }
    ++block;
  }

  double zmax = 0.0;
  CompensatedSum div, energy;
  std::size_t f = 0;
  const auto h = mesh.widths();
  for (std::size_t i = 0; i < mesh.num_edges(); ++i) {
    const EdgeIndex e{i};
    const std::size_t n = mesh.cell_count(e);
    const std::size_t off = mesh.offset(e);
    double z_left = t_init[i];
    for (std::size_t k = 0; k < n; ++k) {
      const double z_right = k + 1 < n ? dual.faces[f++] : -t_term[i];
      zmax = std::max({zmax, std::abs(z_left), std::abs(z_right)});
      const std::size_t c = off + k;
      const double dz = (z_right - z_left) / h[c];
      const double d = (u_next.values[c] - u_prev.values[c]) / tau - dz;
      div += h[c] * d * d;
      energy += -h[c] * u_next.values[c] * dz;
      z_left = z_right;
    }
  }
  r.supnorm_excess = zmax - 1.0;
  r.divergence_mismatch = std::sqrt(div.value());
  r.energy_gap = std::abs(energy.value() - discrete_tv(g, mesh, u_next));
  return r;
}

Trajectory run_flow(const MetricGraph &g, const Mesh &mesh,
                    const DiscreteState &u0, double tau, double t_end,
                    const FlowOptions &opts, Coupling coupling) {
  if (!(tau > 0.0))
    throw std::invalid_argument("time step must be positive");
  if (!(t_end >= 0.0))
    throw std::invalid_argument("end time must be nonnegative");
  if (u0.size() != mesh.num_cells())
    throw DimensionError("initial state does not match the mesh");

  const ProxSolver solver(g, mesh, coupling);
  Trajectory traj;
  traj.mesh = mesh;
  traj.mean0 = discrete_mean(g, mesh, u0);

  auto diagnose = [&](double t, const DiscreteState &u) {
    StepDiagnostics d;
    d.t = t;
    d.mass = discrete_mass(mesh, u);
    d.tv = discrete_tv(g, mesh, u);
    d.l2 = discrete_l2(mesh, u, traj.mean0);
    return d;
  };

  traj.diagnostics.push_back(diagnose(0.0, u0));
  traj.times.push_back(0.0);
  traj.snapshots.push_back(u0);
  if (opts.stop_at_extinction && is_extinct(u0, traj.mean0, opts.extinction_tol))
    return traj;

  const auto steps = t_end > 0.0
                         ? static_cast<std::size_t>(std::ceil(t_end / tau - 1e-9))
                         : std::size_t{0};
  const std::size_t every = std::max<std::size_t>(1, opts.snapshot_every);

  DiscreteState u = u0;
  DualState dual;
  bool have_dual = false;
  for (std::size_t k = 1; k <= steps; ++k) {
    ProxResult step = solver.solve(u, tau, opts.prox, have_dual ? &dual : nullptr);
    const double t = static_cast<double>(k) * tau;

    StepDiagnostics d = diagnose(t, step.u);
    d.gap = step.report.gap;
    d.iterations = step.report.iterations;
    d.certificate = certificate_check(g, mesh, u, step.u, step.dual, tau);
    traj.diagnostics.push_back(d);

    const bool stationary =
        opts.stop_when_stationary && max_change(u, step.u) <= opts.extinction_tol;
    u = std::move(step.u);
    dual = std::move(step.dual);
    have_dual = true;

    const bool extinct = opts.stop_at_extinction &&
                         is_extinct(u, traj.mean0, opts.extinction_tol);
    if (k % every == 0 || k == steps || extinct || stationary) {
      traj.times.push_back(t);
      traj.snapshots.push_back(u);
    }
    if (extinct || stationary)
      break;
  }
  return traj;
}

Trajectory run_decoupled_flow(const MetricGraph &g, const Mesh &mesh,
                              const DiscreteState &u0, double tau,
                              double t_end, const FlowOptions &opts) {
  return run_flow(g, mesh, u0, tau, t_end, opts, Coupling::kDecoupled);
}

std::optional<double> detect_extinction(const Trajectory &traj, double tol) {
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    if (is_extinct(traj.snapshots[k], traj.mean0, tol))
      return traj.times[k];
  }
  return std::nullopt;
}

namespace {

std::size_t plateau_count(const MetricGraph &g, const Mesh &mesh,
                          const DiscreteState &u, double tol) {
  std::vector<std::size_t> parent(u.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  auto join = [&](std::size_t a, std::size_t b) {
    if (std::abs(u.values[a] - u.values[b]) <= tol)
      parent[find(a)] = find(b);
  };
  for (std::size_t i = 0; i < mesh.num_edges(); ++i) {
    const EdgeIndex e{i};
    for (std::size_t c = mesh.first_cell(e); c < mesh.last_cell(e); ++c)
      join(c, c + 1);
  }
  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    const auto inc = g.incidence(VertexId{v});
    for (std::size_t a = 0; a < inc.size(); ++a)
      for (std::size_t b = a + 1; b < inc.size(); ++b)
        join(mesh.adjacent_cell(g, inc[a].edge, VertexId{v}),
             mesh.adjacent_cell(g, inc[b].edge, VertexId{v}));
  }
  std::size_t count = 0;
  for (std::size_t c = 0; c < parent.size(); ++c)
    count += find(c) == c ? 1 : 0;
  return count;
}

}  // namespace

std::vector<double> merge_times(const MetricGraph &g, const Trajectory &traj,
                                double tol) {
  std::vector<double> out;
  std::size_t prev = 0;
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const std::size_t count = plateau_count(g, traj.mesh, traj.snapshots[k], tol);
    if (k > 0 && count < prev)
      out.push_back(traj.times[k]);
    prev = count;
  }
  return out;
}

std::vector<double> edge_masses(const Mesh &mesh, const DiscreteState &u) {
  std::vector<double> out(mesh.num_edges(), 0.0);
  const auto h = mesh.widths();
  for (std::size_t i = 0; i < mesh.num_edges(); ++i) {
    const EdgeIndex e{i};
    CompensatedSum sum;
    for (std::size_t c = mesh.first_cell(e); c <= mesh.last_cell(e); ++c)
      sum += h[c] * u.values[c];
    out[i] = sum.value();
  }
  return out;
}

}  // namespace mgtv
