#include "mgtv/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <queue>

#include "mgtv/detail/sum.hpp"

namespace mgtv {

using detail::CompensatedSum;

double mean(const MetricGraph &g, const PiecewiseConstant &u) {
  return integral(u) / g.total_length();
}

namespace {

double abs_integral(const PiecewiseConstant &u) {
  CompensatedSum s;
  for (const EdgePieces &p : u.edges())
    for (std::size_t k = 0; k < p.size(); ++k)
      s += (p.breaks[k + 1] - p.breaks[k]) * std::abs(p.values[k]);
  return s.value();
}

void require_mean_zero(const PiecewiseConstant &u, const char *what) {
  if (std::abs(integral(u)) > 1e-9 * (1.0 + abs_integral(u)))
    throw AnalysisError(std::string(what) + ": not in G_m (nonzero mean)");
}

}  // namespace

double rayleigh(const MetricGraph &g, const PiecewiseConstant &u) {
  require_mean_zero(u, "rayleigh");
  const double norm = l2_norm(u);
  if (!(norm > 0.0))
    throw AnalysisError("rayleigh: constant input");
  return tv(g, u) / norm;
}

double rayleigh(const MetricGraph &g, const Mesh &mesh, const DiscreteState &u) {
  const double norm = discrete_l2(mesh, u, discrete_mean(g, mesh, u));
  if (!(norm > 0.0))
    throw AnalysisError("rayleigh: constant input");
  return discrete_tv(g, mesh, u) / norm;
}

namespace {

struct Components {
  std::vector<std::size_t> parent;
  explicit Components(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x)
      x = parent[x] = parent[parent[x]];
    return x;
  }
  void join(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// A cut S, described by the cells it contains.
struct Cut {
  double quotient = std::numeric_limits<double>::infinity();
  double measure = 0.0;
  std::vector<std::size_t> edges_in;  // whole edges inside S
  std::size_t edge = 0;               // partially covered edge
  double from = 0.0, to = 0.0;        // covered part of `edge`
};

}  // namespace

LambdaEstimate estimate_lambda(const MetricGraph &g, const Mesh &mesh) {
  if (mesh.num_edges() != g.num_edges())
    throw DimensionError("mesh does not match the graph");
  const double total = g.total_length();
  auto quotient = [&](double per, double s) {
    if (!(s > 0.0) || !(s < total))
      return std::numeric_limits<double>::infinity();
    return per * std::sqrt(total / (s * (total - s)));
  };

  Cut best;
  bool has_bridge = false;
  for (std::size_t i = 0; i < g.num_edges(); ++i) {
    const EdgeIndex e{i};
    Components comp(g.num_vertices());
    for (std::size_t j = 0; j < g.num_edges(); ++j)
      if (j != i)
        comp.join(g.edge(EdgeIndex{j}).init.index, g.edge(EdgeIndex{j}).term.index);
    const std::size_t a = comp.find(g.edge(e).init.index);
    if (a == comp.find(g.edge(e).term.index))
      continue;
    has_bridge = true;
    double side = 0.0;
    std::vector<std::size_t> side_edges;
    for (std::size_t j = 0; j < g.num_edges(); ++j)
      if (j != i && comp.find(g.edge(EdgeIndex{j}).init.index) == a) {
        side += g.edge(EdgeIndex{j}).length;
        side_edges.push_back(j);
      }
    for (double b : mesh.bounds(e)) {
      const double q = quotient(1.0, side + b);
      if (q < best.quotient)
        best = Cut{q, side + b, side_edges, i, 0.0, b};
    }
  }

  // Intervals inside one edge; each end costs 1 unless it is a leaf vertex.
  for (std::size_t i = 0; i < g.num_edges(); ++i) {
    const EdgeIndex e{i};
    const auto b = mesh.bounds(e);
    const double head = g.is_boundary(g.edge(e).init) ? 0.0 : 1.0;
    const double tail = g.is_boundary(g.edge(e).term) ? 0.0 : 1.0;
    for (std::size_t j = 0; j + 1 < b.size(); ++j) {
      const auto it = std::lower_bound(b.begin() + static_cast<long>(j) + 1,
                                       b.end(), b[j] + 0.5 * total);
      for (auto k = it - 1; k <= it && k < b.end(); ++k) {
        if (k <= b.begin() + static_cast<long>(j))
          continue;
        const double per = (j == 0 ? head : 1.0) + (k == b.end() - 1 ? tail : 1.0);
        const double q = quotient(per, *k - b[j]);
        if (q < best.quotient)
          best = Cut{q, *k - b[j], {}, i, b[j], *k};
      }
    }
  }
  if (!std::isfinite(best.quotient))
    throw AnalysisError("estimate_lambda: mesh admits no two-level witness");

  const double s = best.measure;
  const double alpha = std::sqrt((total - s) / (s * total));
  const double beta = std::sqrt(s / ((total - s) * total));
  LambdaEstimate est;
  est.witness.values.assign(mesh.num_cells(), -beta);
  for (std::size_t j : best.edges_in) {
    const EdgeIndex e{j};
    for (std::size_t c = mesh.first_cell(e); c <= mesh.last_cell(e); ++c)
      est.witness.values[c] = alpha;
  }
  {
    const EdgeIndex e{best.edge};
    const auto b = mesh.bounds(e);
    for (std::size_t k = 0; k + 1 < b.size(); ++k)
      if (b[k] >= best.from && b[k + 1] <= best.to)
        est.witness.values[mesh.offset(e) + k] = alpha;
  }
  est.upper = discrete_tv(g, mesh, est.witness);
  est.lower = std::min((has_bridge ? 2.0 : 4.0) / std::sqrt(total), est.upper);
  return est;
}

namespace {

// Dinic max flow with real capacities.
class MaxFlow {
public:
  explicit MaxFlow(std::size_t n) : adj_(n), level_(n), next_(n) { }

  void add(std::size_t from, std::size_t to, double cap) {
    adj_[from].push_back(arcs_.size());
    arcs_.push_back({to, cap});
    adj_[to].push_back(arcs_.size());
    arcs_.push_back({from, 0.0});
  }

  double run(std::size_t s, std::size_t t) {
    double flow = 0.0;
    while (bfs(s, t)) {
      std::fill(next_.begin(), next_.end(), 0);
      for (double f; (f = dfs(s, t, std::numeric_limits<double>::infinity())) > 0.0;)
        flow += f;
    }
    return flow;
  }

private:
  struct Arc {
    std::size_t to;
    double cap;
  };
  static constexpr double kEps = 1e-15;

  bool bfs(std::size_t s, std::size_t t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<std::size_t> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop();
      for (std::size_t a : adj_[v])
        if (arcs_[a].cap > kEps && level_[arcs_[a].to] < 0) {
          level_[arcs_[a].to] = level_[v] + 1;
          q.push(arcs_[a].to);
        }
    }
    return level_[t] >= 0;
  }

  double dfs(std::size_t v, std::size_t t, double limit) {
    if (v == t)
      return limit;
    for (std::size_t &i = next_[v]; i < adj_[v].size(); ++i) {
      Arc &arc = arcs_[adj_[v][i]];
      if (arc.cap <= kEps || level_[arc.to] != level_[v] + 1)
        continue;
      const double f = dfs(arc.to, t, std::min(limit, arc.cap));
      if (f > 0.0) {
        arc.cap -= f;
        arcs_[adj_[v][i] ^ 1].cap += f;
        return f;
      }
    }
    return 0.0;
  }

  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
};

struct EdgePrimitive {
  double min = 0.0, max = 0.0, end = 0.0;  // of G(x) = int_0^x v
};

}  // namespace

double mstar_norm(const MetricGraph &g, const PiecewiseConstant &v,
                  MstarMethod method) {
  if (v.num_edges() != g.num_edges())
    throw DimensionError("function does not match the graph");
  require_mean_zero(v, "mstar_norm");

  // z_e(x) = z0_e - G_e(x); sup |z_e| <= M iff z0_e in [max - M, min + M].
  std::vector<EdgePrimitive> prim(g.num_edges());
  for (std::size_t i = 0; i < g.num_edges(); ++i) {
    const EdgePieces &p = v.edge(EdgeIndex{i});
    CompensatedSum acc;
    for (std::size_t k = 0; k < p.size(); ++k) {
      acc += (p.breaks[k + 1] - p.breaks[k]) * p.values[k];
      prim[i].min = std::min(prim[i].min, acc.value());
      prim[i].max = std::max(prim[i].max, acc.value());
    }
    prim[i].end = acc.value();
  }
  auto norm_for = [&](const std::vector<double> &z0) {
    double m = 0.0;
    for (std::size_t i = 0; i < prim.size(); ++i)
      m = std::max({m, z0[i] - prim[i].min, prim[i].max - z0[i]});
    return m;
  };

  const bool tree = method == MstarMethod::kTree ||
                    (method == MstarMethod::kAuto && g.is_tree());
  if (tree) {
    if (!g.is_tree())
      throw AnalysisError("mstar_norm: tree method on a graph with cycles");
    // Kirchhoff at v: sum_{f_e = v} (z0_e - G_e(l_e)) - sum_{i_e = v} z0_e = 0.
    std::vector<double> z0(g.num_edges(), 0.0);
    std::vector<bool> known(g.num_edges(), false);
    std::vector<std::size_t> unknown(g.num_vertices());
    std::deque<std::size_t> ready;
    for (std::size_t u = 0; u < g.num_vertices(); ++u) {
      unknown[u] = g.degree(VertexId{u});
      if (unknown[u] == 1)
        ready.push_back(u);
    }
    while (!ready.empty()) {
      const std::size_t u = ready.front();
      ready.pop_front();
      if (unknown[u] != 1)
        continue;
      double rest = 0.0;
      std::size_t target = 0;
      bool arrives = false;
      for (const Incidence &inc : g.incidence(VertexId{u})) {
        const std::size_t i = inc.edge.index;
        if (!known[i]) {
          target = i;
          arrives = inc.arrives;
        } else {
          rest += inc.arrives ? z0[i] - prim[i].end : -z0[i];
        }
      }
      z0[target] = arrives ? prim[target].end - rest : rest;
      known[target] = true;
      unknown[u] = 0;
      const Edge &e = g.edge(EdgeIndex{target});
      const std::size_t other = e.init.index == u ? e.term.index : e.init.index;
      if (--unknown[other] == 1)
        ready.push_back(other);
    }
    return norm_for(z0);
  }

  const std::size_t nv = g.num_vertices();
  double scale = 1.0;
  for (const auto &p : prim)
    scale += std::abs(p.min) + std::abs(p.max);
  auto feasible = [&](double m) {
    MaxFlow flow(nv + 2);
    const std::size_t source = nv, sink = nv + 1;
    std::vector<double> demand(nv, 0.0);
    for (std::size_t i = 0; i < g.num_edges(); ++i) {
      const Edge &e = g.edge(EdgeIndex{i});
      const double lo = prim[i].max - m, hi = prim[i].min + m;
      if (hi < lo)
        return false;
      flow.add(e.init.index, e.term.index, hi - lo);
      demand[e.term.index] += prim[i].end - lo;
      demand[e.init.index] += lo;
    }
    double need = 0.0;
    for (std::size_t u = 0; u < nv; ++u) {
      if (demand[u] > 0.0) {
        flow.add(u, sink, demand[u]);
        need += demand[u];
      } else if (demand[u] < 0.0) {
        flow.add(source, u, -demand[u]);
      }
    }
    return flow.run(source, sink) >= need - 1e-12 * scale;
  };

  double lo = 0.0;
  for (const auto &p : prim)
    lo = std::max(lo, 0.5 * (p.max - p.min));
  if (feasible(lo))
    return lo;
  double hi = std::max(1.0, 2.0 * lo);
  for (int k = 0; k < 200 && !feasible(hi); ++k)
    hi *= 2.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

double ExtinctionReport::min_lower_slack() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto &r : rows)
    m = std::min(m, r.lower_slack());
  return m;
}

double ExtinctionReport::min_upper_slack() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto &r : rows)
    m = std::min(m, r.upper_slack());
  return m;
}

double ExtinctionReport::min_decay_slack() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto &r : rows)
    m = std::min(m, r.decay_slack());
  return m;
}

ExtinctionReport extinction_report(const MetricGraph &g, const Trajectory &traj,
                                   const LambdaEstimate &lambda, double tol) {
  if (traj.snapshots.empty())
    throw AnalysisError("extinction_report: empty trajectory");
  const auto reached = detect_extinction(traj, tol);
  if (!reached)
    throw ExtinctionNotReached("trajectory did not reach the mean");

  const Mesh &mesh = traj.mesh;
  const DiscreteState &u0 = traj.snapshots.front();
  const double m0 = traj.mean0;
  const double n0 = discrete_l2(mesh, u0, m0);

  ExtinctionReport r;
  r.measured = *reached;
  r.lambda_lower = lambda.lower;
  r.lambda_upper = lambda.upper;
  r.upper_bound = n0 > 0.0 ? n0 / lambda.lower : 0.0;
  r.lower_bound = n0 > 0.0 ? mstar_norm(g, to_piecewise(g, mesh, u0).shifted(-m0))
                           : 0.0;
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const double t = traj.times[k];
    if (t >= r.measured)
      break;
    SandwichRow row;
    row.t = t;
    row.norm = discrete_l2(mesh, traj.snapshots[k], m0);
    row.quotient = row.norm > 0.0
                       ? discrete_tv(g, mesh, traj.snapshots[k]) / row.norm
                       : 0.0;
    row.lower_side = lambda.lower * (r.measured - t);
    row.upper_side = row.quotient * (r.measured - t);
    row.decay_bound = n0 - lambda.lower * t;
    r.rows.push_back(row);
  }
  return r;
}

}  // namespace mgtv
