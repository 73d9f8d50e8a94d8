#include "mgtv/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace mgtv {

using nlohmann::json;

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text))
    throw IoError("cannot write " + path);
}

namespace {

json parse_json(const std::string &text, const char *what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    throw IoError(std::string(what) + ": " + e.what());
  }
}

const json &member(const json &obj, const char *key, const char *what) {
  if (!obj.is_object() || !obj.contains(key))
    throw IoError(std::string(what) + ": missing \"" + key + "\"");
  return obj.at(key);
}

double number(const json &j, const char *key, const char *what) {
  const json &v = member(j, key, what);
  if (!v.is_number())
    throw IoError(std::string(what) + ": \"" + key + "\" must be a number");
  return v.get<double>();
}

std::size_t index(const json &j, const char *key, const char *what) {
  const json &v = member(j, key, what);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw IoError(std::string(what) + ": \"" + key +
                  "\" must be a nonnegative integer");
  return v.get<std::size_t>();
}

std::string name(const json &v, const char *what) {
  if (v.is_string())
    return v.get<std::string>();
  if (v.is_number_integer())
    return std::to_string(v.get<long long>());
  throw IoError(std::string(what) + ": vertex names must be strings");
}

}  // namespace

GraphSpec parse_graph_json(const std::string &text) {
  const char *what = "graph";
  const json doc = parse_json(text, what);
  GraphSpec spec;
  const json &vs = member(doc, "vertices", what);
  if (!vs.is_array())
    throw IoError("graph: \"vertices\" must be an array");
  for (const json &v : vs)
    spec.vertices.push_back(name(v, what));
  const json &es = member(doc, "edges", what);
  if (!es.is_array())
    throw IoError("graph: \"edges\" must be an array");
  for (const json &e : es)
    spec.edges.push_back(GraphSpec::EdgeSpec{
        index(e, "id", what), name(member(e, "from", what), what),
        name(member(e, "to", what), what), number(e, "length", what)});
  return spec;
}

std::string graph_to_json(const GraphSpec &spec) {
  json doc;
  doc["vertices"] = spec.vertices;
  doc["edges"] = json::array();
  for (const auto &e : spec.edges)
    doc["edges"].push_back(
        {{"id", e.id}, {"from", e.from}, {"to", e.to}, {"length", e.length}});
  return doc.dump(2) + "\n";
}

PiecewiseConstant parse_function_json(const MetricGraph &g,
                                      const std::string &text) {
  const char *what = "function";
  const json doc = parse_json(text, what);
  const json &es = member(doc, "edges", what);
  if (!es.is_array())
    throw IoError("function: \"edges\" must be an array");
  std::vector<EdgePieces> edges(g.num_edges());
  std::vector<bool> seen(g.num_edges(), false);
  for (const json &e : es) {
    const std::size_t id = index(e, "edge", what);
    const auto ei = g.find_edge_by_id(id);
    if (!ei)
      throw IoError("function: unknown edge " + std::to_string(id));
    if (seen[ei->index])
      throw IoError("function: edge " + std::to_string(id) + " listed twice");
    seen[ei->index] = true;
    const double length = g.edge(*ei).length;
    const double tol = 1e-12 * length;
    EdgePieces &p = edges[ei->index];
    const json &pieces = member(e, "pieces", what);
    if (!pieces.is_array() || pieces.empty())
      throw IoError("function: edge " + std::to_string(id) + " has no pieces");
    for (const json &piece : pieces) {
      const double from = number(piece, "from", what);
      const double to = number(piece, "to", what);
      const double value = number(piece, "value", what);
      const double expect = p.breaks.empty() ? 0.0 : p.breaks.back();
      if (std::abs(from - expect) > tol)
        throw IoError("function: edge " + std::to_string(id) +
                      (from > expect ? " has a gap at " : " has an overlap at ") +
                      format_number(expect));
      if (!(to > from))
        throw IoError("function: edge " + std::to_string(id) +
                      " has an empty or reversed piece at " + format_number(from));
      if (p.breaks.empty())
        p.breaks.push_back(0.0);
      p.breaks.push_back(to);
      p.values.push_back(value);
    }
    if (std::abs(p.breaks.back() - length) > tol)
      throw IoError("function: pieces of edge " + std::to_string(id) +
                    " end at " + format_number(p.breaks.back()) +
                    ", edge length is " + format_number(length));
    p.breaks.back() = length;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i])
      throw IoError("function: edge " + std::to_string(g.edge(EdgeIndex{i}).id) +
                    " missing");
  try {
    return PiecewiseConstant(g, std::move(edges));
  } catch (const FunctionError &e) {
    throw IoError(std::string("function: ") + e.what());
  }
}

std::string function_to_json(const MetricGraph &g, const PiecewiseConstant &u) {
  json doc;
  doc["edges"] = json::array();
  for (std::size_t i = 0; i < g.num_edges(); ++i) {
    const EdgePieces &p = u.edge(EdgeIndex{i});
    json pieces = json::array();
    for (std::size_t k = 0; k < p.size(); ++k)
      pieces.push_back(
          {{"from", p.breaks[k]}, {"to", p.breaks[k + 1]}, {"value", p.values[k]}});
    doc["edges"].push_back({{"edge", g.edge(EdgeIndex{i}).id}, {"pieces", pieces}});
  }
  return doc.dump(2) + "\n";
}

std::string format_number(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

double parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (!s.empty() && s.front() == '+')
    s.remove_prefix(1);
  double x = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw IoError("not a number: '" + std::string(s) + "'");
  return x;
}

const std::string *TrajectoryTable::find(const std::string &key) const {
  for (const auto &[k, v] : meta)
    if (k == key)
      return &v;
  return nullptr;
}

namespace {

void write_meta(std::ostream &out, const Metadata &meta) {
  for (const auto &[k, v] : meta)
    out << "# " << k << '=' << v << '\n';
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto pos = line.find(sep);
    out.push_back(line.substr(0, pos));
    if (pos == std::string_view::npos)
      return out;
    line.remove_prefix(pos + 1);
  }
}

}  // namespace

void write_trajectory_csv(std::ostream &out, const MetricGraph &g,
                          const TrajectoryTable &table) {
  write_meta(out, table.meta);
  out << kTrajectoryHeader << '\n';
  for (const Frame &f : table.frames) {
    const std::string t = format_number(f.t);
    for (std::size_t i = 0; i < f.edges.size(); ++i) {
      const EdgePieces &p = f.edges[i];
      const std::string id = std::to_string(g.edge(EdgeIndex{i}).id);
      for (std::size_t k = 0; k < p.size(); ++k)
        out << t << ',' << id << ',' << format_number(p.breaks[k]) << ','
            << format_number(p.breaks[k + 1]) << ',' << format_number(p.values[k])
            << '\n';
    }
  }
}

TrajectoryTable read_trajectory_csv(std::istream &in, const MetricGraph &g) {
  TrajectoryTable table;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  auto fail = [&](const std::string &msg) {
    throw IoError("trajectory line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    if (line[0] == '#') {
      std::string_view body(line);
      body.remove_prefix(1);
      while (!body.empty() && body.front() == ' ')
        body.remove_prefix(1);
      const auto eq = body.find('=');
      if (eq != std::string_view::npos)
        table.meta.emplace_back(std::string(body.substr(0, eq)),
                                std::string(body.substr(eq + 1)));
      continue;
    }
    if (!header) {
      if (line != kTrajectoryHeader)
        fail("expected header '" + std::string(kTrajectoryHeader) + "'");
      header = true;
      continue;
    }
    const auto cols = split(line, ',');
    if (cols.size() != 5)
      fail("expected 5 columns");
    double t = 0.0, idd = 0.0, left = 0.0, right = 0.0, value = 0.0;
    try {
      t = parse_number(cols[0]);
      idd = parse_number(cols[1]);
      left = parse_number(cols[2]);
      right = parse_number(cols[3]);
      value = parse_number(cols[4]);
    } catch (const IoError &e) {
      fail(e.what());
    }
    if (idd < 0 || idd != static_cast<double>(static_cast<std::size_t>(idd)))
      fail("edge must be a nonnegative integer");
    const auto id = static_cast<std::size_t>(idd);
    const auto ei = g.find_edge_by_id(id);
    if (!ei)
      fail("unknown edge " + std::to_string(id));
    if (table.frames.empty() || t != table.frames.back().t) {
      if (!table.frames.empty() && !(t > table.frames.back().t))
        fail("times must increase");
      table.frames.push_back(Frame{t, std::vector<EdgePieces>(g.num_edges())});
    }
    EdgePieces &p = table.frames.back().edges[ei->index];
    const double expect = p.breaks.empty() ? 0.0 : p.breaks.back();
    if (left != expect || !(right > left))
      fail("cells of edge " + std::to_string(id) + " do not tile the edge");
    if (p.breaks.empty())
      p.breaks.push_back(0.0);
    p.breaks.push_back(right);
    p.values.push_back(value);
  }
  if (!header)
    throw IoError("trajectory: missing header");
  for (const Frame &f : table.frames)
    for (std::size_t i = 0; i < f.edges.size(); ++i) {
      const double length = g.edge(EdgeIndex{i}).length;
      if (f.edges[i].breaks.empty() ||
          std::abs(f.edges[i].breaks.back() - length) > 1e-9 * length)
        throw IoError("trajectory: frame t=" + format_number(f.t) +
                      " does not cover edge " +
                      std::to_string(g.edge(EdgeIndex{i}).id));
    }
  return table;
}

TrajectoryTable to_table(const MetricGraph &g, const Trajectory &traj,
                         Metadata meta) {
  TrajectoryTable table;
  table.meta = std::move(meta);
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const auto u = to_piecewise(g, traj.mesh, traj.snapshots[k]);
    table.frames.push_back(
        Frame{traj.times[k], std::vector<EdgePieces>(u.edges().begin(), u.edges().end())});
  }
  return table;
}

Trajectory from_table(const MetricGraph &g, const TrajectoryTable &table) {
  if (table.frames.empty())
    throw IoError("trajectory: no frames");
  std::vector<std::vector<double>> bounds;
  for (const EdgePieces &p : table.frames.front().edges)
    bounds.push_back(p.breaks);
  Trajectory traj;
  try {
    traj.mesh = Mesh::from_bounds(g, bounds);
  } catch (const DimensionError &e) {
    throw IoError(std::string("trajectory: ") + e.what());
  }
  for (const Frame &f : table.frames) {
    DiscreteState s;
    for (std::size_t i = 0; i < f.edges.size(); ++i) {
      if (f.edges[i].breaks != bounds[i])
        throw IoError("trajectory: frame t=" + format_number(f.t) +
                      " uses a different cell layout");
      s.values.insert(s.values.end(), f.edges[i].values.begin(),
                      f.edges[i].values.end());
    }
    traj.times.push_back(f.t);
    traj.snapshots.push_back(std::move(s));
  }
  traj.mean0 = discrete_mean(g, traj.mesh, traj.snapshots.front());
  return traj;
}

void write_diagnostics_csv(std::ostream &out, const Trajectory &traj,
                           const Metadata &meta) {
  write_meta(out, meta);
  out << kDiagnosticsHeader << '\n';
  for (const StepDiagnostics &d : traj.diagnostics)
    out << format_number(d.t) << ',' << format_number(d.mass) << ','
        << format_number(d.tv) << ',' << format_number(d.l2) << ','
        << format_number(d.gap) << ',' << d.iterations << ','
        << format_number(d.certificate.kirchhoff_defect) << ','
        << format_number(d.certificate.supnorm_excess) << '\n';
}

}  // namespace mgtv
