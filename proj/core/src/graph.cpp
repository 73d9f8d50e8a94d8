#include "mgtv/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

namespace mgtv {

const char *to_string(GraphErrc code) noexcept {
  switch (code) {
  case GraphErrc::kEmpty:
    return "empty graph";
  case GraphErrc::kDuplicateVertex:
    return "duplicate vertex";
  case GraphErrc::kDuplicateEdgeId:
    return "duplicate edge id";
  case GraphErrc::kUnknownVertex:
    return "unknown vertex";
  case GraphErrc::kNonpositiveLength:
    return "nonpositive length";
  case GraphErrc::kLoop:
    return "loop edge";
  case GraphErrc::kMultipleEdge:
    return "multiple edge";
  case GraphErrc::kDisconnected:
    return "disconnected graph";
  case GraphErrc::kNotIncident:
    return "edge not incident to vertex";
  }
  return "graph error";
}

namespace {

[[noreturn]] void fail(GraphErrc code, const std::string &detail) {
  throw GraphError(code, std::string(to_string(code)) + ": " + detail);
}

}  // namespace

MetricGraph MetricGraph::build(const GraphSpec &spec) {
  if (spec.vertices.empty() || spec.edges.empty())
    fail(GraphErrc::kEmpty, "a graph needs at least one edge");

  MetricGraph g;
  std::unordered_map<std::string, std::size_t> index_of;
  for (const auto &name : spec.vertices) {
    if (!index_of.emplace(name, g.names_.size()).second)
      fail(GraphErrc::kDuplicateVertex, name);
    g.names_.push_back(name);
  }

  auto lookup = [&](const std::string &name, std::size_t edge_id) {
    auto it = index_of.find(name);
    if (it == index_of.end())
      fail(GraphErrc::kUnknownVertex,
           "edge " + std::to_string(edge_id) + " references '" + name + "'");
    return VertexId{it->second};
  };

  std::set<std::size_t> ids;
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  g.edges_.reserve(spec.edges.size());
  for (const auto &es : spec.edges) {
    const std::string label = "edge " + std::to_string(es.id);
    if (!ids.insert(es.id).second)
      fail(GraphErrc::kDuplicateEdgeId, label);
    if (!(es.length > 0.0) || !std::isfinite(es.length))
      fail(GraphErrc::kNonpositiveLength, label);

    VertexId init = lookup(es.from, es.id);
    VertexId term = lookup(es.to, es.id);
    if (init == term)
      fail(GraphErrc::kLoop, label + " at '" + es.from + "'");

    auto key = std::minmax(init.index, term.index);
    if (!pairs.insert(key).second)
      fail(GraphErrc::kMultipleEdge,
           label + " duplicates the pair ('" + es.from + "', '" + es.to + "')");
    g.edges_.push_back(Edge{es.id, init, term, es.length});
  }
  std::sort(g.edges_.begin(), g.edges_.end(),
            [](const Edge &a, const Edge &b) { return a.id < b.id; });

  g.incidence_.assign(g.names_.size(), {});
  for (std::size_t i = 0; i < g.edges_.size(); ++i) {
    const Edge &e = g.edges_[i];
    g.incidence_[e.init.index].push_back(Incidence{EdgeIndex{i}, false});
    g.incidence_[e.term.index].push_back(Incidence{EdgeIndex{i}, true});
  }

  // Connectivity by union-find; also catches isolated vertices.
  std::vector<std::size_t> parent(g.names_.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const Edge &e : g.edges_)
    parent[find(e.init.index)] = find(e.term.index);
  const std::size_t root = find(0);
  for (std::size_t v = 0; v < g.names_.size(); ++v) {
    if (find(v) != root)
      fail(GraphErrc::kDisconnected,
           "vertex '" + g.names_[v] + "' is not reachable from '" +
               g.names_[0] + "'");
  }

  g.total_length_ = 0.0;
  for (const Edge &e : g.edges_)
    g.total_length_ += e.length;
  return g;
}

std::optional<EdgeIndex> MetricGraph::find_edge_by_id(std::size_t id) const {
  auto it = std::lower_bound(
      edges_.begin(), edges_.end(), id,
      [](const Edge &e, std::size_t value) { return e.id < value; });
  if (it == edges_.end() || it->id != id)
    return std::nullopt;
  return EdgeIndex{static_cast<std::size_t>(it - edges_.begin())};
}

std::optional<VertexId> MetricGraph::find_vertex(const std::string &name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end())
    return std::nullopt;
  return VertexId{static_cast<std::size_t>(it - names_.begin())};
}

std::span<const Incidence> MetricGraph::incidence(VertexId v) const {
  if (v.index >= incidence_.size())
    fail(GraphErrc::kUnknownVertex, "index " + std::to_string(v.index));
  return incidence_[v.index];
}

std::size_t MetricGraph::degree(VertexId v) const {
  return incidence(v).size();
}

std::pair<std::vector<VertexId>, std::vector<VertexId>>
MetricGraph::boundary_interior() const {
  std::vector<VertexId> boundary, interior;
  for (std::size_t v = 0; v < names_.size(); ++v) {
    if (incidence_[v].size() == 1)
      boundary.push_back(VertexId{v});
    else
      interior.push_back(VertexId{v});
  }
  return {std::move(boundary), std::move(interior)};
}

int MetricGraph::trace_sign(EdgeIndex e, VertexId v) const {
  const Edge &edge = edges_.at(e.index);
  if (v == edge.term)
    return +1;
  if (v == edge.init)
    return -1;
  fail(GraphErrc::kNotIncident, "edge " + std::to_string(edge.id) +
                                    " and vertex index " +
                                    std::to_string(v.index));
}

bool MetricGraph::is_linear() const {
  return std::all_of(incidence_.begin(), incidence_.end(),
                     [](const auto &inc) { return inc.size() <= 2; });
}

GraphSpec MetricGraph::to_spec() const {
  GraphSpec spec;
  spec.vertices = names_;
  for (const Edge &e : edges_)
    spec.edges.push_back(GraphSpec::EdgeSpec{e.id, names_[e.init.index],
                                             names_[e.term.index], e.length});
  return spec;
}

}  // namespace mgtv
