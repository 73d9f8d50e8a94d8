#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mgtv/analysis.hpp"
#include "mgtv/discrete.hpp"
#include "mgtv/flow.hpp"
#include "mgtv/graph.hpp"
#include "mgtv/io.hpp"
#include "mgtv/oracle.hpp"
#include "mgtv/prox.hpp"
#include "mgtv/pwfunc.hpp"

namespace mgtv::cli {
namespace {

using json = nlohmann::ordered_json;

// Thrown for bad flag combinations detected after parsing.
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

std::string num(double x) { return format_number(x); }

MetricGraph load_graph(const std::string &path) {
  return MetricGraph::build(parse_graph_json(read_file(path)));
}

PiecewiseConstant load_function(const MetricGraph &g, const std::string &path) {
  return parse_function_json(g, read_file(path));
}

TrajectoryTable load_trajectory(const MetricGraph &g, const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open " + path);
  return read_trajectory_csv(in, g);
}

void write_text(const std::string &path, const std::function<void(std::ostream &)> &body) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot write " + path);
  body(out);
  if (!out)
    throw IoError("write failed: " + path);
}

// Exact decimal ("0.3", "-1.5e-2") or fraction ("3/10").
Rational parse_rational(const std::string &text) {
  using boost::multiprecision::cpp_int;
  auto bad = [&]() -> Rational {
    throw UsageError("not a rational number: '" + text + "'");
  };
  auto is_int = [](std::string_view s) {
    if (!s.empty() && (s[0] == '-' || s[0] == '+'))
      s.remove_prefix(1);
    return !s.empty() &&
           std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  auto integer = [](std::string s) {
    if (!s.empty() && s[0] == '+')
      s.erase(0, 1);
    return cpp_int(s);
  };
  if (const auto slash = text.find('/'); slash != std::string::npos) {
    const std::string p = text.substr(0, slash), q = text.substr(slash + 1);
    if (!is_int(p) || !is_int(q) || integer(q) == 0)
      return bad();
    return Rational(integer(p), integer(q));
  }
  std::string mant = text;
  long exponent = 0;
  if (const auto e = text.find_first_of("eE"); e != std::string::npos) {
    const std::string ex = text.substr(e + 1);
    if (!is_int(ex) || ex.size() > 6)
      return bad();
    exponent = std::stol(ex);
    mant = text.substr(0, e);
  }
  std::string digits = mant;
  if (const auto dot = mant.find('.'); dot != std::string::npos) {
    digits = mant.substr(0, dot) + mant.substr(dot + 1);
    exponent -= static_cast<long>(mant.size() - dot - 1);
    if (mant.find('.', dot + 1) != std::string::npos)
      return bad();
  }
  if (!is_int(digits))
    return bad();
  Rational r(integer(digits));
  const cpp_int scale = boost::multiprecision::pow(cpp_int(10),
                                                   static_cast<unsigned>(std::abs(exponent)));
  return exponent >= 0 ? Rational(r * scale) : Rational(r / scale);
}

std::string exact(const Rational &r) { return r.str(); }

// ---------------------------------------------------------------- validate

int cmd_validate(const std::string &graph_path, std::ostream &out) {
  const MetricGraph g = load_graph(graph_path);
  const auto [boundary, interior] = g.boundary_interior();
  out << "vertices: " << g.num_vertices() << '\n';
  out << "edges: " << g.num_edges() << '\n';
  out << "total_length: " << num(g.total_length()) << '\n';
  out << "tree: " << (g.is_tree() ? "yes" : "no") << '\n';
  out << "boundary:";
  for (VertexId v : boundary)
    out << ' ' << g.vertex_name(v);
  out << '\n' << "interior: ";
  if (interior.empty())
    out << "none";
  for (std::size_t i = 0; i < interior.size(); ++i)
    out << (i ? ", " : "") << g.vertex_name(interior[i]) << " (degree "
        << g.degree(interior[i]) << ')';
  out << '\n';
  return kOk;
}

// ---------------------------------------------------------------- tv

int cmd_tv(const std::string &graph_path, const std::string &datum_path,
           std::ostream &out) {
  const MetricGraph g = load_graph(graph_path);
  const PiecewiseConstant u = load_function(g, datum_path);
  const double du = du_mass(u), j = jv(g, u), t = tv(g, u);
  out << "du_mass: " << num(du) << '\n';
  out << "jv: " << num(j) << '\n';
  out << "tv: " << num(t) << '\n';
  for (VertexId v : g.boundary_interior().second) {
    const VertexTraceVector tr = vertex_traces(g, u, v);
    out << "vertex " << g.vertex_name(v) << " (degree " << g.degree(v)
        << "): traces";
    for (double c : tr.values)
      out << ' ' << num(c);
    out << ", median " << num(trace_median(tr.values)) << ", variation "
        << num(vertex_variation(tr)) << '\n';
  }
  if (g.is_linear()) {
    const bool equal = std::abs(t - (du + j)) <= 1e-12 * std::max(1.0, t);
    out << "linear: tv == du_mass + jv: " << (equal ? "true" : "false") << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------- flow

struct FlowArgs {
  std::string graph, datum, out_dir;
  std::optional<double> h_max, tau, t_end;
  bool until_extinction = false;
  double tol = 1e-8;
  std::size_t max_iter = 200000;
  double extinction_tol = 1e-6;
  std::size_t snapshot_every = 1;
  std::string mode = "coupled";
  std::string method = "auto";
};

int cmd_flow(const FlowArgs &a, std::ostream &out) {
  if (a.t_end.has_value() == a.until_extinction)
    throw UsageError("flow: give exactly one of --t-end and --until-extinction");
  const MetricGraph g = load_graph(a.graph);
  const PiecewiseConstant u0 = load_function(g, a.datum);
  const double ell = g.total_length();
  const double h_max = a.h_max.value_or(ell / 1000.0);
  const Mesh mesh = Mesh::build(g, u0, h_max);
  const DiscreteState s0 = sample(mesh, u0);
  const double m0 = discrete_mean(g, mesh, s0);
  const double spread = discrete_l2(mesh, s0, m0);

  double tau = 1e-3;
  if (a.tau)
    tau = *a.tau;
  else if (spread * ell > 0.0)
    tau = spread * ell / 1000.0;

  double t_end = 0.0;
  if (a.t_end) {
    t_end = *a.t_end;
  } else if (spread > 0.0) {
    const LambdaEstimate lambda = estimate_lambda(g, mesh);
    t_end = 2.0 * spread / lambda.lower + tau;
  }

  FlowOptions opts;
  opts.prox.tol = a.tol;
  opts.prox.max_iter = a.max_iter;
  opts.prox.method = a.method == "exact"          ? ProxMethod::kExactTree
                     : a.method == "primal-dual" ? ProxMethod::kPrimalDual
                                                 : ProxMethod::kAuto;
  opts.extinction_tol = a.extinction_tol;
  opts.snapshot_every = a.snapshot_every;
  const Coupling coupling =
      a.mode == "decoupled" ? Coupling::kDecoupled : Coupling::kCoupled;
  if (opts.prox.method == ProxMethod::kExactTree &&
      !ProxSolver(g, mesh, coupling).is_forest())
    throw UsageError("flow: --method exact needs a tree graph or --mode decoupled");

  const Trajectory traj = run_flow(g, mesh, s0, tau, t_end, opts, coupling);
  const auto ext = detect_extinction(traj, a.extinction_tol);

  Metadata meta{{"source", "flow"},
                {"mode", a.mode},
                {"method", a.method},
                {"cells", std::to_string(mesh.num_cells())},
                {"h_max", num(h_max)},
                {"tau", num(tau)},
                {"t_end", num(t_end)},
                {"mean", num(m0)},
                {"extinction_tol", num(a.extinction_tol)},
                {"T_ex", ext ? num(*ext) : "none"}};

  std::filesystem::create_directories(a.out_dir);
  const std::filesystem::path dir(a.out_dir);
  write_text((dir / "trajectory.csv").string(), [&](std::ostream &os) {
    write_trajectory_csv(os, g, to_table(g, traj, meta));
  });
  write_text((dir / "diagnostics.csv").string(),
             [&](std::ostream &os) { write_diagnostics_csv(os, traj, meta); });

  const StepDiagnostics &last = traj.diagnostics.back();
  out << "cells: " << mesh.num_cells() << '\n';
  out << "tau: " << num(tau) << '\n';
  out << "steps: " << traj.diagnostics.size() - 1 << '\n';
  out << "t_final: " << num(last.t) << '\n';
  out << "mass_drift: "
      << num(std::abs(last.mass - traj.diagnostics.front().mass)) << '\n';
  if (ext)
    out << "extinction_time: " << num(*ext) << '\n';
  else
    out << "extinction_time: not reached\n";
  const auto merges = merge_times(g, traj, 1e3 * a.extinction_tol);
  out << "merge_times:";
  for (double t : merges)
    out << ' ' << num(t);
  out << '\n';
  return kOk;
}

// ---------------------------------------------------------------- oracle

struct OracleArgs {
  std::string which;
  std::map<std::string, std::string> params;
  std::vector<double> times;
  std::optional<std::size_t> samples;
  std::optional<double> t_max;
  std::string times_from, out, graph_out, datum_out;
};

ExplicitSolution<Rational> make_oracle(const OracleArgs &a) {
  auto p = [&](const char *key) { return parse_rational(a.params.at(key)); };
  const std::string &w = a.which;
  if (w == "neumann1")
    return neumann_case1<Rational>(p("L"), p("a"), p("k"));
  if (w == "neumann2")
    return neumann_case2<Rational>(p("L"), p("b"), p("k"));
  if (w == "neumann3")
    return neumann_case3<Rational>(p("L"), p("c"), p("k1"), p("k2"));
  if (w == "neumann4")
    return neumann_case4<Rational>(p("L"), p("a"), p("b"), p("k"));
  if (w == "path3")
    return path3_example<Rational>(p("l1"), p("l2"), p("a"), p("k"));
  if (w == "star")
    return star_example<Rational>(p("l1"), p("l"), p("a"), p("k"));
  throw UsageError("oracle: unknown case '" + w + "'");
}

int cmd_oracle(const OracleArgs &a, std::ostream &out) {
  const ExplicitSolution<Rational> sol = make_oracle(a);
  const MetricGraph g = MetricGraph::build(sol.graph_spec());
  const double t_ex = to_double(sol.extinction_time);

  std::vector<double> times = a.times;
  if (!a.times_from.empty()) {
    for (const Frame &f : load_trajectory(g, a.times_from).frames)
      times.push_back(f.t);
  }
  if (times.empty()) {
    const std::size_t n = a.samples.value_or(11);
    if (n < 2)
      throw UsageError("oracle: --samples needs at least 2 points");
    const double t_max = a.t_max.value_or(t_ex > 0.0 ? 1.25 * t_ex : 1.0);
    for (std::size_t i = 0; i < n; ++i)
      times.push_back(t_max * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  if (times.front() < 0.0)
    throw UsageError("oracle: sample times must be nonnegative");

  const auto ends = phase_ends(sol);
  std::string ends_text, ends_exact;
  for (std::size_t i = 0; i < ends.size(); ++i) {
    ends_text += (i ? ";" : "") + num(to_double(ends[i]));
    ends_exact += (i ? ";" : "") + exact(ends[i]);
  }
  TrajectoryTable table;
  table.meta = {{"source", "oracle"}, {"case", sol.name}};
  for (const auto &[k, v] : a.params)
    table.meta.emplace_back(k, exact(parse_rational(v)));
  table.meta.emplace_back("phase_ends", ends_text);
  table.meta.emplace_back("phase_ends_exact", ends_exact);
  table.meta.emplace_back("T_ex", num(t_ex));
  table.meta.emplace_back("T_ex_exact", exact(sol.extinction_time));
  table.meta.emplace_back("final", num(to_double(sol.final_value)));
  table.meta.emplace_back("final_exact", exact(sol.final_value));
  table.meta.emplace_back("mean", num(to_double(sol.mean)));
  for (double t : times) {
    const PiecewiseConstant u = eval(g, sol, t);
    table.frames.push_back(Frame{t, {u.edges().begin(), u.edges().end()}});
  }

  if (!a.graph_out.empty())
    write_file(a.graph_out, graph_to_json(sol.graph_spec()));
  if (!a.datum_out.empty())
    write_file(a.datum_out, function_to_json(g, sol.initial(g)));
  if (a.out.empty())
    write_trajectory_csv(out, g, table);
  else
    write_text(a.out, [&](std::ostream &os) { write_trajectory_csv(os, g, table); });
  return kOk;
}

// ---------------------------------------------------------------- compare

// Calls f(width, a, b) on the common refinement of two tilings of one edge.
template <class F>
void overlay(const EdgePieces &a, const EdgePieces &b, F &&f) {
  std::size_t i = 0, j = 0;
  double x = 0.0;
  while (i < a.size() && j < b.size()) {
    const double right = std::min(a.breaks[i + 1], b.breaks[j + 1]);
    if (right > x)
      f(right - x, a.values[i], b.values[j]);
    x = right;
    if (a.breaks[i + 1] <= right)
      ++i;
    if (b.breaks[j + 1] <= right)
      ++j;
  }
}

EdgePieces blend(const EdgePieces &a, const EdgePieces &b, double theta) {
  EdgePieces out{{0.0}, {}};
  double x = 0.0;
  overlay(a, b, [&](double w, double va, double vb) {
    x += w;
    out.breaks.push_back(x);
    out.values.push_back((1.0 - theta) * va + theta * vb);
  });
  out.breaks.back() = std::max(a.breaks.back(), b.breaks.back());
  return out;
}

std::optional<std::vector<EdgePieces>> oracle_at(const TrajectoryTable &oracle,
                                                 double t) {
  const auto &fr = oracle.frames;
  auto same = [](double x, double y) {
    return std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(x));
  };
  for (const Frame &f : fr)
    if (same(f.t, t))
      return f.edges;
  if (fr.empty() || t < fr.front().t || t > fr.back().t)
    return std::nullopt;
  const auto hi = std::upper_bound(fr.begin(), fr.end(), t,
                                   [](double x, const Frame &f) { return x < f.t; });
  const Frame &f1 = *hi, &f0 = *(hi - 1);
  const double theta = (t - f0.t) / (f1.t - f0.t);
  std::vector<EdgePieces> out;
  for (std::size_t e = 0; e < f0.edges.size(); ++e)
    out.push_back(blend(f0.edges[e], f1.edges[e], theta));
  return out;
}

struct CompareArgs {
  std::string solver, oracle, graph;
  double tol = 5e-2;
};

int cmd_compare(const CompareArgs &a, std::ostream &out) {
  const MetricGraph g = load_graph(a.graph);
  const TrajectoryTable solver = load_trajectory(g, a.solver);
  const TrajectoryTable oracle = load_trajectory(g, a.oracle);

  double max_linf = 0.0, max_l2 = 0.0;
  std::size_t compared = 0, skipped = 0;
  out << "t,linf,l2\n";
  for (const Frame &f : solver.frames) {
    const auto ref = oracle_at(oracle, f.t);
    if (!ref) {
      ++skipped;
      continue;
    }
    double linf = 0.0, sq = 0.0;
    for (std::size_t e = 0; e < g.num_edges(); ++e)
      overlay(f.edges[e], (*ref)[e], [&](double w, double x, double y) {
        linf = std::max(linf, std::abs(x - y));
        sq += w * (x - y) * (x - y);
      });
    const double l2 = std::sqrt(sq);
    out << num(f.t) << ',' << num(linf) << ',' << num(l2) << '\n';
    max_linf = std::max(max_linf, linf);
    max_l2 = std::max(max_l2, l2);
    ++compared;
  }
  if (compared == 0)
    throw UsageError("compare: no solver snapshot lies within the oracle time range");
  out << "compared: " << compared << '\n';
  out << "skipped: " << skipped << '\n';
  out << "max_linf: " << num(max_linf) << '\n';
  out << "max_l2: " << num(max_l2) << '\n';
  const bool ok = max_linf <= a.tol;
  out << "within_tol: " << (ok ? "yes" : "no") << " (tol " << num(a.tol) << ")\n";
  return ok ? kOk : kToleranceExceeded;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string graph, datum, trajectory;
  bool as_json = false;
  double extinction_tol = 1e-6;
};

int cmd_analyze(const AnalyzeArgs &a, std::ostream &out) {
  const MetricGraph g = load_graph(a.graph);
  const PiecewiseConstant u0 = load_function(g, a.datum);
  const Trajectory traj = from_table(g, load_trajectory(g, a.trajectory));
  const DiscreteState s0 = sample(traj.mesh, u0);
  double scale = 1.0, diff = 0.0;
  for (std::size_t c = 0; c < s0.size(); ++c) {
    scale = std::max(scale, std::abs(s0.values[c]));
    diff = std::max(diff, std::abs(s0.values[c] - traj.snapshots.front().values[c]));
  }
  if (traj.times.front() != 0.0 || diff > 1e-9 * scale)
    throw UsageError("analyze: trajectory does not start from the datum at t = 0");

  const LambdaEstimate lambda = estimate_lambda(g, traj.mesh);
  const ExtinctionReport r = extinction_report(g, traj, lambda, a.extinction_tol);
  const bool bracket = r.lower_bound <= r.measured && r.measured <= r.upper_bound;

  if (a.as_json) {
    json j;
    j["mean"] = traj.mean0;
    j["measured_extinction"] = r.measured;
    j["lower_bound"] = r.lower_bound;
    j["upper_bound"] = r.upper_bound;
    j["bounds_hold"] = bracket;
    j["lambda_lower"] = r.lambda_lower;
    j["lambda_upper"] = r.lambda_upper;
    j["lambda_lower_kind"] = "mesh-certified";
    j["min_lower_slack"] = r.rows.empty() ? 0.0 : r.min_lower_slack();
    j["min_upper_slack"] = r.rows.empty() ? 0.0 : r.min_upper_slack();
    j["min_decay_slack"] = r.rows.empty() ? 0.0 : r.min_decay_slack();
    j["rows"] = json::array();
    for (const SandwichRow &row : r.rows)
      j["rows"].push_back({{"t", row.t},
                           {"norm", row.norm},
                           {"quotient", row.quotient},
                           {"lower_side", row.lower_side},
                           {"upper_side", row.upper_side},
                           {"decay_bound", row.decay_bound}});
    out << j.dump(2) << '\n';
    return kOk;
  }

  out << "mean: " << num(traj.mean0) << '\n';
  out << "measured_extinction: " << num(r.measured) << '\n';
  out << "lower_bound: " << num(r.lower_bound) << '\n';
  out << "upper_bound: " << num(r.upper_bound) << '\n';
  out << "bounds_hold: " << (bracket ? "yes" : "no") << '\n';
  out << "lambda_lower: " << num(r.lambda_lower) << " (mesh-certified)\n";
  out << "lambda_upper: " << num(r.lambda_upper) << '\n';
  if (!r.rows.empty()) {
    out << "min_lower_slack: " << num(r.min_lower_slack()) << '\n';
    out << "min_upper_slack: " << num(r.min_upper_slack()) << '\n';
    out << "min_decay_slack: " << num(r.min_decay_slack()) << '\n';
  }
  out << "t,norm,quotient,lower_side,upper_side,decay_bound\n";
  for (const SandwichRow &row : r.rows)
    out << num(row.t) << ',' << num(row.norm) << ',' << num(row.quotient) << ','
        << num(row.lower_side) << ',' << num(row.upper_side) << ','
        << num(row.decay_bound) << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Total variation flow on metric graphs"};
  app.name("mgtv");
  app.require_subcommand(1);
  std::function<int()> action;

  std::string graph_path, datum_path;

  auto *validate = app.add_subcommand("validate", "Check a graph file and summarize it");
  validate->add_option("--graph", graph_path, "Graph JSON")->required();
  validate->callback([&] { action = [&] { return cmd_validate(graph_path, out); }; });

  auto *tvc = app.add_subcommand("tv", "Total variation of a datum");
  tvc->add_option("--graph", graph_path, "Graph JSON")->required();
  tvc->add_option("--datum", datum_path, "Function JSON")->required();
  tvc->callback([&] { action = [&] { return cmd_tv(graph_path, datum_path, out); }; });

  FlowArgs fa;
  auto *flow = app.add_subcommand("flow", "Run the implicit Euler flow");
  flow->add_option("--graph", fa.graph, "Graph JSON")->required();
  flow->add_option("--datum", fa.datum, "Initial datum JSON")->required();
  flow->add_option("--out", fa.out_dir, "Output directory")->required();
  flow->add_option("--h-max", fa.h_max, "Maximum cell width (default length/1000)")
      ->check(CLI::PositiveNumber);
  flow->add_option("--tau", fa.tau, "Time step")->check(CLI::PositiveNumber);
  flow->add_option("--t-end", fa.t_end, "Final time")->check(CLI::NonNegativeNumber);
  flow->add_flag("--until-extinction", fa.until_extinction,
                 "Run until the state reaches its mean");
  flow->add_option("--tol", fa.tol, "Prox tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  flow->add_option("--max-iter", fa.max_iter, "Prox iteration limit")->capture_default_str()
      ->check(CLI::PositiveNumber);
  flow->add_option("--extinction-tol", fa.extinction_tol, "Extinction tolerance")->capture_default_str()
      ->check(CLI::PositiveNumber);
  flow->add_option("--snapshot-every", fa.snapshot_every, "Snapshot cadence in steps")->capture_default_str()
      ->check(CLI::PositiveNumber);
  flow->add_option("--mode", fa.mode, "coupled or decoupled")->capture_default_str()
      ->check(CLI::IsMember({"coupled", "decoupled"}));
  flow->add_option("--method", fa.method, "auto, exact or primal-dual")->capture_default_str()
      ->check(CLI::IsMember({"auto", "exact", "primal-dual"}));
  flow->callback([&] { action = [&] { return cmd_flow(fa, out); }; });

  OracleArgs oa;
  auto *oracle = app.add_subcommand("oracle", "Closed-form trajectories");
  oracle->require_subcommand(1);
  struct Case {
    const char *name, *help;
    std::vector<const char *> params;
  };
  const std::vector<Case> cases{
      {"neumann1", "k on (0, a) of [0, L]", {"L", "a", "k"}},
      {"neumann2", "k on (b, L) of [0, L]", {"L", "b", "k"}},
      {"neumann3", "k1 on (0, c), k2 on (c, L)", {"L", "c", "k1", "k2"}},
      {"neumann4", "k on (a, b), L < a + b", {"L", "a", "b", "k"}},
      {"path3", "two-edge path, k on (0, a) of e2", {"l1", "l2", "a", "k"}},
      {"star", "three-edge star, k on (a, l1) of e1", {"l1", "l", "a", "k"}},
  };
  std::map<std::string, std::map<std::string, std::string>> values;
  for (const Case &c : cases) {
    auto *sub = oracle->add_subcommand(c.name, c.help);
    auto &vals = values[c.name];
    for (const char *p : c.params) {
      auto *opt = sub->add_option(std::string("--") + p, vals[p],
                                  "Exact value (decimal or p/q)");
      if (std::string(p) == "k")
        vals[p] = "1";
      else
        opt->required();
    }
    sub->add_option("--times", oa.times, "Sample times")->delimiter(',');
    sub->add_option("--samples", oa.samples, "Uniform samples on [0, t-max]");
    sub->add_option("--t-max", oa.t_max, "Last uniform sample (default 1.25 T_ex)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--times-from", oa.times_from, "Use the times of a trajectory CSV");
    sub->add_option("--out", oa.out, "Trajectory CSV (default stdout)");
    sub->add_option("--graph-out", oa.graph_out, "Write the graph JSON");
    sub->add_option("--datum-out", oa.datum_out, "Write the initial datum JSON");
    const std::string name = c.name;
    sub->callback([&, name] {
      oa.which = name;
      oa.params = values[name];
      action = [&] { return cmd_oracle(oa, out); };
    });
  }

  CompareArgs ca;
  auto *compare = app.add_subcommand("compare", "Distance between two trajectories");
  compare->add_option("--solver", ca.solver, "Solver trajectory CSV")->required();
  compare->add_option("--oracle", ca.oracle, "Reference trajectory CSV")->required();
  compare->add_option("--graph", ca.graph, "Graph JSON")->required();
  compare->add_option("--tol", ca.tol, "Pass threshold on max L-infinity error")->capture_default_str()
      ->check(CLI::PositiveNumber);
  compare->callback([&] { action = [&] { return cmd_compare(ca, out); }; });

  AnalyzeArgs aa;
  auto *analyze = app.add_subcommand("analyze", "Extinction-time bounds of a trajectory");
  analyze->add_option("--graph", aa.graph, "Graph JSON")->required();
  analyze->add_option("--datum", aa.datum, "Initial datum JSON")->required();
  analyze->add_option("--trajectory", aa.trajectory, "Trajectory CSV")->required();
  analyze->add_flag("--json", aa.as_json, "Emit JSON");
  analyze->add_option("--extinction-tol", aa.extinction_tol, "Extinction tolerance")->capture_default_str()
      ->check(CLI::PositiveNumber);
  analyze->callback([&] { action = [&] { return cmd_analyze(aa, out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    return action();
  } catch (const ProxNotConverged &e) {
    err << "error: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const ExtinctionNotReached &e) {
    err << "error: " << e.what() << '\n';
    return kNotExtinct;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace mgtv::cli
