#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mgtv {

struct VertexId {
  std::size_t index = 0;
  friend auto operator<=>(const VertexId &, const VertexId &) = default;
};

// Dense position of an edge in MetricGraph::edges(), which is sorted by the
// external edge id.
struct EdgeIndex {
  std::size_t index = 0;
  friend auto operator<=>(const EdgeIndex &, const EdgeIndex &) = default;
};

enum class GraphErrc {
  kEmpty,
  kDuplicateVertex,
  kDuplicateEdgeId,
  kUnknownVertex,
  kNonpositiveLength,
  kLoop,
  kMultipleEdge,
  kDisconnected,
  kNotIncident,
};

const char *to_string(GraphErrc code) noexcept;

class GraphError : public std::runtime_error {
public:
  GraphError(GraphErrc code, const std::string &what)
      : std::runtime_error(what), code_(code) { }

  GraphErrc code() const noexcept { return code_; }

private:
  GraphErrc code_;
};

// An oriented edge [init, term]. The edge coordinate runs from 0 at `init` to
// `length` at `term`.
struct Edge {
  std::size_t id = 0;
  VertexId init;
  VertexId term;
  double length = 0.0;
};

struct Incidence {
  EdgeIndex edge;
  // true if the vertex is the terminal end of the edge
  bool arrives = false;
};

struct GraphSpec {
  struct EdgeSpec {
    std::size_t id = 0;
    std::string from;
    std::string to;
    double length = 0.0;
  };

  std::vector<std::string> vertices;
  std::vector<EdgeSpec> edges;
};

/// Compact, connected metric graph without loops or multiple edges.
///
/// Immutable after construction. Vertex names are mapped to dense indices in
/// order of appearance in the spec; edges are stored sorted by id and each
/// vertex's incidence list follows that order.
class MetricGraph {
public:
  /// Validates `spec` and builds the incidence structure. Throws GraphError
  /// naming the offending element.
  static MetricGraph build(const GraphSpec &spec);

  std::size_t num_vertices() const noexcept { return names_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge &edge(EdgeIndex e) const { return edges_.at(e.index); }

  std::optional<EdgeIndex> find_edge_by_id(std::size_t id) const;
  std::optional<VertexId> find_vertex(const std::string &name) const;
  const std::string &vertex_name(VertexId v) const { return names_.at(v.index); }

  std::span<const Incidence> incidence(VertexId v) const;

  std::size_t degree(VertexId v) const;
  bool is_boundary(VertexId v) const { return degree(v) == 1; }

  /// (boundary, interior) partition of V, both in index order.
  std::pair<std::vector<VertexId>, std::vector<VertexId>>
  boundary_interior() const;

  /// +1 if v is the terminal vertex of e, -1 if it is the initial vertex.
  int trace_sign(EdgeIndex e, VertexId v) const;

  double total_length() const noexcept { return total_length_; }

  // connected + |E| = |V| - 1
  bool is_tree() const noexcept { return edges_.size() + 1 == names_.size(); }

  // every interior vertex has degree 2
  bool is_linear() const;

  GraphSpec to_spec() const;

private:
  MetricGraph() = default;

  std::vector<std::string> names_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Incidence>> incidence_;
  double total_length_ = 0.0;
};

}  // namespace mgtv
