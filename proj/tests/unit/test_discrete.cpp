#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mgtv/discrete.hpp"
#include "mgtv/flow.hpp"
#include "mgtv/oracle.hpp"
#include "mgtv/prox.hpp"
#include "mgtv/pwfunc.hpp"
#include "support.hpp"

using namespace mgtv;
using doctest::Approx;

namespace {

MetricGraph interval(double L = 1.0) {
  return MetricGraph::build({{"v1", "v2"}, {{0, "v1", "v2", L}}});
}

MetricGraph star() {
  return MetricGraph::build(
      {{"v1", "v2", "v3", "v4"},
       {{0, "v1", "v2", 2.0}, {1, "v2", "v3", 1.0}, {2, "v2", "v4", 1.0}}});
}

MetricGraph triangle() {
  return MetricGraph::build(
      {{"a", "b", "c"}, {{0, "a", "b", 1.0}, {1, "b", "c", 1.0}, {2, "c", "a", 1.0}}});
}

double max_diff(const DiscreteState &a, const DiscreteState &b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace

TEST_CASE("mesh alignment and refinement") {
  const auto g = interval();
  const PiecewiseConstant u(g, {{{0, 0.3, 1}, {1, 0}}});
  const Mesh m = Mesh::build(g, u, 0.5);
  const auto b = m.bounds(EdgeIndex{0});
  CHECK(std::find(b.begin(), b.end(), 0.3) != b.end());
  CHECK(m.max_width() <= 0.5);
  CHECK(m.num_cells() == 3);

  CHECK(Mesh::build(g, PiecewiseConstant::constant(g, 1), 2.0).num_cells() == 1);

  const auto s = star();
  const PiecewiseConstant step(s, {{{0, 0.5, 2}, {0, 1}}, {{0, 1}, {0}}, {{0, 1}, {0}}});
  CHECK(Mesh::build(s, step, 1e-3).num_cells() == 4000);
  CHECK_THROWS(Mesh::build(g, u, 0.0));
}

TEST_CASE("discrete tv on aligned meshes") {
  testing::Generator gen(3);
  for (int i = 0; i < 30; ++i) {
    const auto [g, u] = gen.instance();
    const Mesh m = Mesh::build(g, u, 0.2);
    const DiscreteState s = sample(m, u);
    CHECK(discrete_tv(g, m, s) == Approx(tv(g, u)).epsilon(1e-12));
    CHECK(discrete_mass(m, s) == Approx(integral(u)).epsilon(1e-12).scale(1.0));
    const auto back = to_piecewise(g, m, s).normalized();
    CHECK(tv(g, back) == Approx(tv(g, u)).epsilon(1e-12));
  }
  const auto s = star();
  const PiecewiseConstant ex2(s, {{{0, 2}, {1}}, {{0, 1}, {-1}}, {{0, 1}, {0}}});
  const Mesh m = Mesh::build(s, ex2, 0.25);
  CHECK(discrete_tv(s, m, sample(m, ex2)) == Approx(2.0));
  CHECK(discrete_tv(s, m, sample(m, PiecewiseConstant::constant(s, 3))) == 0.0);
  CHECK_THROWS_AS(discrete_tv(s, m, DiscreteState{{1.0}}), DimensionError);
}

TEST_CASE("vertex dual projection") {
  auto close = [](const std::vector<double> &a, const std::vector<double> &b) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::abs(a[i] - b[i]) > 1e-10)
        return false;
    return true;
  };
  CHECK(close(project_vertex_dual(std::vector<double>{2, 0, 0}), {1, -0.5, -0.5}));
  CHECK(close(project_vertex_dual(std::vector<double>{1, -1}), {1, -1}));
  CHECK(close(project_vertex_dual(std::vector<double>{0, 0, 0}), {0, 0, 0}));
  CHECK(close(project_vertex_dual(std::vector<double>{5}), {0}));

  // grid search over the feasible set for (2, 0, 0)
  const std::vector<double> c{2, 0, 0};
  const auto p = project_vertex_dual(c);
  auto dist = [&](double a, double b) {
    const double t3 = -a - b;
    return (a - c[0]) * (a - c[0]) + (b - c[1]) * (b - c[1]) + (t3 - c[2]) * (t3 - c[2]);
  };
  const double best = dist(p[0], p[1]);
  for (int i = 0; i <= 200; ++i)
    for (int j = 0; j <= 200; ++j) {
      const double a = -1 + i / 100.0, b = -1 + j / 100.0;
      if (std::abs(a + b) <= 1.0)
        CHECK(dist(a, b) >= best - 1e-12);
    }
}

TEST_CASE("operator adjointness") {
  testing::Generator gen(9);
  for (const auto coupling : {Coupling::kCoupled, Coupling::kDecoupled}) {
    const auto [g, u] = gen.instance();
    const Mesh m = Mesh::build(g, u, 0.3);
    const ProxSolver solver(g, m, coupling);
    std::vector<double> x(m.num_cells()), y(solver.num_dual()), kx, kty;
    for (double &v : x)
      v = gen.uniform(-1, 1);
    for (double &v : y)
      v = gen.uniform(-1, 1);
    solver.apply(x, kx);
    solver.apply_adjoint(y, kty);
    const double lhs = std::inner_product(kx.begin(), kx.end(), y.begin(), 0.0);
    const double rhs = std::inner_product(x.begin(), x.end(), kty.begin(), 0.0);
    CHECK(lhs == Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("prox of a constant is the constant") {
  const auto g = star();
  const auto c = PiecewiseConstant::constant(g, 0.7);
  const Mesh m = Mesh::build(g, c, 0.1);
  const DiscreteState w = sample(m, c);
  for (const auto method : {ProxMethod::kAuto, ProxMethod::kPrimalDual}) {
    ProxOptions o;
    o.method = method;
    const auto r = ProxSolver(g, m).solve(w, 0.5, o);
    CHECK(max_diff(r.u, w) <= 1e-14);
  }
}

TEST_CASE("prox with a large step returns the mean") {
  const auto g = interval();
  const PiecewiseConstant u(g, {{{0, 0.3, 1}, {1, 0}}});
  const Mesh m = Mesh::build(g, u, 0.05);
  const auto r = ProxSolver(g, m).solve(sample(m, u), 10.0, {});
  for (double v : r.u.values)
    CHECK(v == Approx(0.3).epsilon(1e-12));
}

TEST_CASE("exact and primal-dual prox agree") {
  testing::Generator gen(21);
  for (int i = 0; i < 5; ++i) {
    const auto [g, u] = gen.instance();
    const Mesh m = Mesh::build(g, u, 0.25);
    const DiscreteState w = sample(m, u);
    const ProxSolver solver(g, m);
    REQUIRE(solver.is_forest());
    ProxOptions exact, pd;
    exact.method = ProxMethod::kExactTree;
    pd.method = ProxMethod::kPrimalDual;
    pd.tol = 1e-10;
    pd.max_iter = 1000000;
    const auto a = solver.solve(w, 0.1, exact);
    const auto b = solver.solve(w, 0.1, pd);
    CHECK(max_diff(a.u, b.u) <= 1e-4);
    CHECK(a.report.gap <= 1e-8 * (1 + std::abs(a.report.energy)));
  }
}

TEST_CASE("exact prox rejects cycles; primal-dual converges on a triangle") {
  const auto g = triangle();
  const PiecewiseConstant u(g, {{{0, 1}, {1}}, {{0, 1}, {0}}, {{0, 1}, {0}}});
  const Mesh m = Mesh::build(g, u, 0.1);
  const ProxSolver solver(g, m);
  CHECK_FALSE(solver.is_forest());
  ProxOptions o;
  o.method = ProxMethod::kExactTree;
  CHECK_THROWS_AS(solver.solve(sample(m, u), 0.05, o), std::invalid_argument);

  const auto r = solver.solve(sample(m, u), 0.05, {});
  CHECK(discrete_mass(m, r.u) == Approx(1.0).epsilon(1e-12));
  const auto cert = certificate_check(g, m, sample(m, u), r.u, r.dual, 0.05);
  CHECK(cert.passes(1e-6, discrete_tv(g, m, r.u)));
  // a decoupled triangle is a forest
  CHECK(ProxSolver(g, m, Coupling::kDecoupled).is_forest());
}

TEST_CASE("prox non-convergence is reported") {
  const auto g = triangle();
  const PiecewiseConstant u(g, {{{0, 1}, {1}}, {{0, 1}, {0}}, {{0, 1}, {0}}});
  const Mesh m = Mesh::build(g, u, 0.1);
  ProxOptions o;
  o.max_iter = 5;
  o.check_every = 1;
  try {
    ProxSolver(g, m).solve(sample(m, u), 0.05, o);
    FAIL("expected ProxNotConverged");
  } catch (const ProxNotConverged &e) {
    CHECK(e.iterations() == 5);
    CHECK(e.gap() > 0.0);
  }
}

TEST_CASE("certificate detects corrupted duals") {
  const auto g = star();
  const PiecewiseConstant u(g, {{{0, 0.5, 2}, {0, 1}}, {{0, 1}, {0}}, {{0, 1}, {0}}});
  const Mesh m = Mesh::build(g, u, 0.05);
  const DiscreteState w = sample(m, u);
  const auto r = ProxSolver(g, m).solve(w, 0.01, {});
  const double scale = discrete_tv(g, m, r.u);
  CHECK(certificate_check(g, m, w, r.u, r.dual, 0.01).passes(1e-6, scale));

  DualState bad = r.dual;
  bad.faces[3] = 1.5;
  CHECK(certificate_check(g, m, w, r.u, bad, 0.01).supnorm_excess > 1e-6);
  bad = r.dual;
  bad.vertex_traces[0][0] += 0.1;
  CHECK(certificate_check(g, m, w, r.u, bad, 0.01).kirchhoff_defect > 1e-6);

  const DiscreteState c = sample(m, PiecewiseConstant::constant(g, 2));
  const auto rc = ProxSolver(g, m).solve(c, 0.01, {});
  CHECK(certificate_check(g, m, c, rc.u, rc.dual, 0.01).passes(1e-12, 0.0));
}

TEST_CASE("flow: constant datum stays constant") {
  const auto g = star();
  const auto c = PiecewiseConstant::constant(g, -1.25);
  const Mesh m = Mesh::build(g, c, 0.1);
  const auto traj = run_flow(g, m, sample(m, c), 0.1, 1.0);
  for (const auto &s : traj.snapshots)
    for (double v : s.values)
      CHECK(v == -1.25);
  CHECK(detect_extinction(traj, 1e-6) == 0.0);
}

TEST_CASE("flow: neumann case 1") {
  const auto g = interval();
  const PiecewiseConstant u(g, {{{0, 0.3, 1}, {1, 0}}});
  const Mesh m = Mesh::build(g, u, 1e-2);
  const auto traj = run_flow(g, m, sample(m, u), 1e-2, 1.0);
  const auto t = detect_extinction(traj, 1e-6);
  REQUIRE(t);
  CHECK(*t == Approx(0.21).epsilon(0.02));
  for (double v : traj.snapshots.back().values)
    CHECK(v == Approx(0.3).epsilon(1e-6));
  // early slopes: -1/a on (0, a), 1/(L - a) on (a, L)
  CHECK(traj.snapshots[1].values.front() == Approx(1.0 - 1e-2 / 0.3));
  CHECK(traj.snapshots[1].values.back() == Approx(1e-2 / 0.7));

  const auto short_run = run_flow(g, m, sample(m, u), 1e-2, 0.1);
  CHECK_FALSE(detect_extinction(short_run, 1e-6));
}

TEST_CASE("flow: energy decay and contraction") {
  testing::Generator gen(17);
  const auto [g, u] = gen.instance();
  const auto v = gen.function(g);
  std::vector<EdgePieces> both;
  for (std::size_t i = 0; i < g.num_edges(); ++i) {
    const EdgePieces &a = u.edge(EdgeIndex{i}), &b = v.edge(EdgeIndex{i});
    EdgePieces p{{0.0}, {}};
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
      const double r = std::min(a.breaks[ia + 1], b.breaks[ib + 1]);
      p.breaks.push_back(r);
      p.values.push_back(0.0);
      if (a.breaks[ia + 1] <= r)
        ++ia;
      if (b.breaks[ib + 1] <= r)
        ++ib;
    }
    both.push_back(std::move(p));
  }
  const Mesh m = Mesh::build(g, PiecewiseConstant(g, both), 0.05);
  FlowOptions o;
  o.stop_at_extinction = false;
  const auto tu = run_flow(g, m, sample(m, u), 0.02, 0.5, o);
  const auto tv_ = run_flow(g, m, sample(m, v), 0.02, 0.5, o);
  REQUIRE(tu.snapshots.size() == tv_.snapshots.size());
  double prev = 1e300;
  for (std::size_t k = 0; k < tu.snapshots.size(); ++k) {
    DiscreteState d = tu.snapshots[k];
    for (std::size_t c = 0; c < d.size(); ++c)
      d.values[c] -= tv_.snapshots[k].values[c];
    const double n = discrete_l2(m, d);
    CHECK(n <= prev + 1e-9);
    prev = n;
  }
  for (std::size_t k = 1; k < tu.diagnostics.size(); ++k) {
    CHECK(tu.diagnostics[k].tv <= tu.diagnostics[k - 1].tv + 1e-9);
    CHECK(tu.diagnostics[k].l2 <= tu.diagnostics[k - 1].l2 + 1e-9);
  }
}

TEST_CASE("decoupled flow") {
  const auto g = MetricGraph::build(
      {{"v1", "v2", "v3"}, {{0, "v1", "v2", 2.0}, {1, "v2", "v3", 1.0}}});
  const PiecewiseConstant u(g, {{{0, 2}, {0}}, {{0, 0.5, 1}, {1, 0}}});
  const Mesh m = Mesh::build(g, u, 0.05);
  const auto dec = run_decoupled_flow(g, m, sample(m, u), 0.01, 0.5);
  const auto cpl = run_flow(g, m, sample(m, u), 0.01, 0.5);
  const auto m0 = edge_masses(m, dec.snapshots.front());
  const auto md = edge_masses(m, dec.snapshots.back());
  const auto mc = edge_masses(m, cpl.snapshots.back());
  CHECK(md[0] == Approx(m0[0]).scale(1.0).epsilon(1e-12));
  CHECK(md[1] == Approx(m0[1]).epsilon(1e-12));
  CHECK(mc[0] > m0[0] + 0.1);

  // no interior vertex: both modes agree
  const auto h = interval();
  const PiecewiseConstant w(h, {{{0, 0.3, 1}, {1, 0}}});
  const Mesh mh = Mesh::build(h, w, 0.05);
  const auto a = run_flow(h, mh, sample(mh, w), 0.01, 0.3);
  const auto b = run_decoupled_flow(h, mh, sample(mh, w), 0.01, 0.3);
  CHECK(max_diff(a.snapshots.back(), b.snapshots.back()) <= 1e-12);
}

TEST_CASE("flow input validation") {
  const auto g = interval();
  const auto c = PiecewiseConstant::constant(g, 1);
  const Mesh m = Mesh::build(g, c, 0.5);
  CHECK_THROWS(run_flow(g, m, sample(m, c), 0.0, 1.0));
  CHECK_THROWS(run_flow(g, m, sample(m, c), 0.1, -1.0));
  CHECK_THROWS_AS(run_flow(g, m, DiscreteState{{1, 2, 3}}, 0.1, 1.0), DimensionError);
  const auto t0 = run_flow(g, m, sample(m, c), 0.1, 0.0);
  CHECK(t0.snapshots.size() == 1);
}

TEST_CASE("merge times on the star") {
  const auto g = star();
  const PiecewiseConstant u(g, {{{0, 0.5, 2}, {0, 1}}, {{0, 1}, {0}}, {{0, 1}, {0}}});
  const Mesh m = Mesh::build(g, u, 0.01);
  const auto traj = run_flow(g, m, sample(m, u), 0.01, 1.0);
  const auto merges = merge_times(g, traj, 1e-9);
  REQUIRE(merges.size() == 2);
  CHECK(merges[0] == Approx(0.3).epsilon(0.02));
  CHECK(merges[1] == Approx(0.75).epsilon(0.02));
}
