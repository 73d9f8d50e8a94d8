#include "mgtv/prox.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>

#include "mgtv/detail/sum.hpp"

namespace mgtv {

using detail::CompensatedSum;

ProxSolver::ProxSolver(const MetricGraph &g, const Mesh &mesh,
                       Coupling coupling)
    : graph_(g), mesh_(mesh), coupling_(coupling),
      num_cells_(mesh.num_cells()) {
  if (mesh.num_edges() != g.num_edges())
    throw DimensionError("mesh does not match the graph");
  for (std::size_t i = 0; i < mesh.num_edges(); ++i) {
    const EdgeIndex e{i};
    for (std::size_t c = mesh.first_cell(e); c < mesh.last_cell(e); ++c)
      face_left_.push_back(c);
  }
  vertex_offsets_.push_back(0);
  if (coupling_ == Coupling::kCoupled) {
    for (std::size_t v = 0; v < g.num_vertices(); ++v) {
      const VertexId vid{v};
      if (g.is_boundary(vid))
        continue;
      for (const Incidence &inc : g.incidence(vid))
        vertex_cells_.push_back(inc.arrives ? mesh.last_cell(inc.edge)
                                            : mesh.first_cell(inc.edge));
      vertex_offsets_.push_back(vertex_cells_.size());
    }
  }
  build_forest();
}

void ProxSolver::build_forest() {
  // Node ids: cells, then one auxiliary node per vertex block. Each dual entry
  // j joins nodes (a, b) with y_j = sign(x_b - x_a) at the optimum.
  const std::size_t nf = face_left_.size();
  const std::size_t blocks = vertex_offsets_.size() - 1;
  const std::size_t nodes = num_cells_ + blocks;
  std::vector<std::size_t> ea(num_dual()), eb(num_dual());
  for (std::size_t f = 0; f < nf; ++f) {
    ea[f] = face_left_[f];
    eb[f] = face_left_[f] + 1;
  }
  for (std::size_t b = 0; b < blocks; ++b)
    for (std::size_t k = vertex_offsets_[b]; k < vertex_offsets_[b + 1]; ++k) {
      ea[nf + k] = num_cells_ + b;
      eb[nf + k] = vertex_cells_[k];
    }

  std::vector<std::size_t> root(nodes);
  for (std::size_t i = 0; i < nodes; ++i)
    root[i] = i;
  auto find = [&](std::size_t x) {
    while (root[x] != x)
      x = root[x] = root[root[x]];
    return x;
  };
  std::vector<std::vector<std::size_t>> adj(nodes);
  for (std::size_t j = 0; j < ea.size(); ++j) {
    const std::size_t ra = find(ea[j]), rb = find(eb[j]);
    if (ra == rb)
      return;  // cycle
    root[ra] = rb;
    adj[ea[j]].push_back(j);
    adj[eb[j]].push_back(j);
  }

  link_.assign(nodes, TreeLink{0, 0, 0.0});
  std::vector<bool> seen(nodes, false);
  order_.reserve(nodes);
  for (std::size_t r = 0; r < nodes; ++r) {
    if (seen[r])
      continue;
    seen[r] = true;
    link_[r] = TreeLink{r, 0, 0.0};
    std::size_t head = order_.size();
    order_.push_back(r);
    while (head < order_.size()) {
      const std::size_t p = order_[head++];
      for (std::size_t j : adj[p]) {
        const bool is_b = ea[j] == p;
        const std::size_t c = is_b ? eb[j] : ea[j];
        if (seen[c])
          continue;
        seen[c] = true;
        link_[c] = TreeLink{p, j, is_b ? 1.0 : -1.0};
        order_.push_back(c);
      }
    }
  }
  forest_ = true;
}

namespace {

// Nondecreasing, piecewise linear, constant outside [x.front(), x.back()].
// Empty means identically zero.
struct Bounded {
  std::vector<double> x, v;

  double operator()(double t) const {
    if (x.empty())
      return 0.0;
    if (t <= x.front())
      return v.front();
    if (t >= x.back())
      return v.back();
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - x.begin());
    const double s = (t - x[i - 1]) / (x[i] - x[i - 1]);
    return v[i - 1] + s * (v[i] - v[i - 1]);
  }
};

Bounded add(const Bounded &a, const Bounded &b) {
  if (a.x.empty())
    return b;
  if (b.x.empty())
    return a;
  Bounded r;
  r.x.reserve(a.x.size() + b.x.size());
  std::merge(a.x.begin(), a.x.end(), b.x.begin(), b.x.end(),
             std::back_inserter(r.x));
  r.x.erase(std::unique(r.x.begin(), r.x.end()), r.x.end());
  r.v.reserve(r.x.size());
  for (double t : r.x)
    r.v.push_back(a(t) + b(t));
  return r;
}

// D(x) = alpha (x - w) + B(x), alpha >= 0.
struct Derivative {
  double alpha;
  double w;
  const Bounded &b;

  double operator()(double t) const { return alpha * (t - w) + b(t); }

  // Some x with D(x) = level; +-inf if D never reaches it.
  double solve(double level) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (b.x.empty()) {
      if (alpha > 0.0)
        return w + level / alpha;
      return level > 0.0 ? inf : (level < 0.0 ? -inf : 0.0);
    }
    const double d0 = (*this)(b.x.front());
    if (level <= d0) {
      if (alpha > 0.0)
        return b.x.front() + (level - d0) / alpha;
      return level == d0 ? b.x.front() : -inf;
    }
    const double dn = (*this)(b.x.back());
    if (level >= dn) {
      if (alpha > 0.0)
        return b.x.back() + (level - dn) / alpha;
      return level == dn ? b.x.back() : inf;
    }
    std::size_t lo = 0, hi = b.x.size() - 1;  // D(x_lo) < level <= D(x_hi)
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if ((*this)(b.x[mid]) < level)
        lo = mid;
      else
        hi = mid;
    }
    const double dl = (*this)(b.x[lo]), dh = (*this)(b.x[hi]);
    return b.x[lo] + (level - dl) * (b.x[hi] - b.x[lo]) / (dh - dl);
  }
};

}  // namespace

std::vector<double> ProxSolver::solve_forest(const DiscreteState &w,
                                             double tau) const {
  const std::size_t nodes = link_.size();
  const auto h = mesh_.widths();
  auto alpha = [&](std::size_t i) { return i < num_cells_ ? h[i] / tau : 0.0; };
  auto target = [&](std::size_t i) { return i < num_cells_ ? w.values[i] : 0.0; };

  // Leaves to roots: sum of children messages, then clamp to [-1, 1].
  std::vector<Bounded> sum(nodes), message(nodes);
  std::vector<double> lo(nodes), hi(nodes);
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    const std::size_t i = *it;
    if (link_[i].parent == i)
      continue;
    const Derivative d{alpha(i), target(i), sum[i]};
    lo[i] = d.solve(-1.0);
    hi[i] = d.solve(1.0);
    Bounded &m = message[i];
    if (std::isfinite(lo[i])) {
      m.x.push_back(lo[i]);
      m.v.push_back(-1.0);
    }
    for (double t : sum[i].x) {
      if (t > lo[i] && t < hi[i] && (m.x.empty() || t > m.x.back())) {
        m.x.push_back(t);
        m.v.push_back(std::clamp(d(t), -1.0, 1.0));
      }
    }
    if (std::isfinite(hi[i]) && (m.x.empty() || hi[i] > m.x.back())) {
      m.x.push_back(hi[i]);
      m.v.push_back(1.0);
    }
    sum[i] = Bounded{};
    const std::size_t p = link_[i].parent;
    sum[p] = add(sum[p], m);
  }

  // Roots to leaves.
  std::vector<double> x(nodes), y(num_dual(), 0.0);
  for (std::size_t i : order_) {
    const TreeLink &l = link_[i];
    if (l.parent == i) {
      x[i] = Derivative{alpha(i), target(i), sum[i]}.solve(0.0);
      continue;
    }
    const double xp = x[l.parent];
    const double g = message[i](xp);  // clamped derivative of the subtree
    y[l.dual] = -l.sign * g;
    if (g >= 1.0 && std::isfinite(hi[i]))
      x[i] = hi[i];
    else if (g <= -1.0 && std::isfinite(lo[i]))
      x[i] = lo[i];
    else
      x[i] = xp;
  }
  return y;
}

void ProxSolver::apply(const std::vector<double> &u,
                       std::vector<double> &y) const {
  const std::size_t nf = face_left_.size();
  y.resize(num_dual());
  for (std::size_t f = 0; f < nf; ++f) {
    const std::size_t l = face_left_[f];
    y[f] = u[l + 1] - u[l];
  }
  for (std::size_t k = 0; k < vertex_cells_.size(); ++k)
    y[nf + k] = u[vertex_cells_[k]];
}

void ProxSolver::apply_adjoint(const std::vector<double> &y,
                               std::vector<double> &u) const {
  const std::size_t nf = face_left_.size();
  u.assign(num_cells_, 0.0);
  for (std::size_t f = 0; f < nf; ++f) {
    const std::size_t l = face_left_[f];
    u[l + 1] += y[f];
    u[l] -= y[f];
  }
  for (std::size_t k = 0; k < vertex_cells_.size(); ++k)
    u[vertex_cells_[k]] += y[nf + k];
}

void ProxSolver::project(std::vector<double> &y) const {
  const std::size_t nf = face_left_.size();
  for (std::size_t f = 0; f < nf; ++f)
    y[f] = std::clamp(y[f], -1.0, 1.0);
  for (std::size_t b = 0; b + 1 < vertex_offsets_.size(); ++b) {
    const auto first = y.begin() + static_cast<long>(nf + vertex_offsets_[b]);
    const auto last = y.begin() + static_cast<long>(nf + vertex_offsets_[b + 1]);
    const std::vector<double> block(first, last);
    const auto t = project_vertex_dual(block);
    std::copy(t.begin(), t.end(), first);
  }
}

double ProxSolver::tv_of(const std::vector<double> &ku) const {
  const std::size_t nf = face_left_.size();
  CompensatedSum sum;
  for (std::size_t f = 0; f < nf; ++f)
    sum += std::abs(ku[f]);
  for (std::size_t b = 0; b + 1 < vertex_offsets_.size(); ++b) {
    const std::span<const double> block(ku.data() + nf + vertex_offsets_[b],
                                        vertex_offsets_[b + 1] -
                                            vertex_offsets_[b]);
    sum += vertex_variation(block);
  }
  return sum.value();
}

double ProxSolver::operator_norm_bound(double tau) const {
  // Schur test on K diag(sqrt(tau / h)).
  const auto h = mesh_.widths();
  std::vector<double> scale(num_cells_);
  for (std::size_t c = 0; c < num_cells_; ++c)
    scale[c] = std::sqrt(tau / h[c]);

  std::vector<double> col(num_cells_, 0.0);
  double max_row = 0.0;
  for (std::size_t l : face_left_) {
    max_row = std::max(max_row, scale[l] + scale[l + 1]);
    col[l] += scale[l];
    col[l + 1] += scale[l + 1];
  }
  for (std::size_t c : vertex_cells_) {
    max_row = std::max(max_row, scale[c]);
    col[c] += scale[c];
  }
  const double max_col = *std::max_element(col.begin(), col.end());
  return std::sqrt(max_row * max_col);
}

std::vector<double> ProxSolver::pack(const DualState &dual) const {
  std::vector<double> y(num_dual(), 0.0);
  if (dual.faces.size() == face_left_.size())
    std::copy(dual.faces.begin(), dual.faces.end(), y.begin());
  const std::size_t blocks = vertex_offsets_.size() - 1;
  if (dual.vertex_traces.size() == blocks) {
    for (std::size_t b = 0; b < blocks; ++b) {
      const auto &t = dual.vertex_traces[b];
      if (t.size() != vertex_offsets_[b + 1] - vertex_offsets_[b])
        continue;
      std::copy(t.begin(), t.end(),
                y.begin() + static_cast<long>(face_left_.size() +
                                              vertex_offsets_[b]));
    }
  }
  return y;
}

DualState ProxSolver::unpack(const std::vector<double> &y,
                             const std::vector<double> &u) const {
  const std::size_t nf = face_left_.size();
  DualState d;
  d.faces.assign(y.begin(), y.begin() + static_cast<long>(nf));
  for (std::size_t b = 0; b + 1 < vertex_offsets_.size(); ++b) {
    d.vertex_traces.emplace_back(
        y.begin() + static_cast<long>(nf + vertex_offsets_[b]),
        y.begin() + static_cast<long>(nf + vertex_offsets_[b + 1]));
    std::vector<double> adj;
    for (std::size_t k = vertex_offsets_[b]; k < vertex_offsets_[b + 1]; ++k)
      adj.push_back(u[vertex_cells_[k]]);
    d.levels.push_back(trace_median(adj));
  }
  return d;
}

ProxResult ProxSolver::solve(const DiscreteState &w, double tau,
                             const ProxOptions &opts,
                             const DualState *warm) const {
  if (!(tau > 0.0))
    throw std::invalid_argument("prox step must be positive");
  if (w.size() != num_cells_)
    throw DimensionError("state does not match the mesh");

  const auto h = mesh_.widths();
  const std::size_t n = num_cells_;
  std::vector<double> s2(n);
  for (std::size_t c = 0; c < n; ++c)
    s2[c] = tau / h[c];

  const bool exact = opts.method == ProxMethod::kExactTree ||
                     (opts.method == ProxMethod::kAuto && forest_);
  if (exact && !forest_)
    throw std::invalid_argument("exact prox requires an acyclic cell graph");
  std::vector<double> y;
  if (exact) {
    y = solve_forest(w, tau);
  } else {
    y = warm ? pack(*warm) : std::vector<double>(num_dual(), 0.0);
    project(y);
  }

  std::vector<double> kty, ku, uy(n);
  auto dual_primal = [&] {
    apply_adjoint(y, kty);
    for (std::size_t c = 0; c < n; ++c)
      uy[c] = w.values[c] - s2[c] * kty[c];
  };

  ProxReport report;
  auto converged = [&] {
    dual_primal();
    apply(uy, ku);
    const double tv = tv_of(ku);
    CompensatedSum inner, fid;
    for (std::size_t j = 0; j < ku.size(); ++j)
      inner += ku[j] * y[j];
    for (std::size_t c = 0; c < n; ++c) {
      const double d = uy[c] - w.values[c];
      fid += 0.5 * h[c] * d * d / tau;
    }
    report.gap = tv - inner.value();
    report.energy = fid.value() + tv;
    return report.gap <= opts.tol * (1.0 + std::abs(report.energy));
  };

  auto finish = [&] {
    ProxResult r;
    r.u.values = uy;
    r.dual = unpack(y, uy);
    r.report = report;
    return r;
  };

  if (converged())
    return finish();

  const double norm = operator_norm_bound(tau);
  double step_p = 0.99 / norm;
  double step_d = 0.99 / norm;

  std::vector<double> u = uy, u_old(n), ubar = uy;
  const std::size_t every = std::max<std::size_t>(1, opts.check_every);
  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    apply(ubar, ku);
    for (std::size_t j = 0; j < y.size(); ++j)
      y[j] += step_d * ku[j];
    project(y);

    apply_adjoint(y, kty);
    u_old = u;
    for (std::size_t c = 0; c < n; ++c)
      u[c] = (u[c] + step_p * (w.values[c] - s2[c] * kty[c])) / (1.0 + step_p);

    double theta = 1.0;
    if (opts.accelerate) {
      theta = 1.0 / std::sqrt(1.0 + 2.0 * step_p);
      step_p *= theta;
      step_d /= theta;
    }
    for (std::size_t c = 0; c < n; ++c)
      ubar[c] = u[c] + theta * (u[c] - u_old[c]);

    report.iterations = it;
    if (it % every == 0 && converged())
      return finish();
  }
  converged();
  throw ProxNotConverged(report.gap, report.iterations);
}

}  // namespace mgtv
