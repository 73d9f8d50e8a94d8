#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mgtv/flow.hpp"
#include "mgtv/graph.hpp"
#include "mgtv/pwfunc.hpp"

namespace mgtv {

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string &path);
void write_file(const std::string &path, const std::string &text);

/// {"vertices": [...], "edges": [{"id", "from", "to", "length"}, ...]}
GraphSpec parse_graph_json(const std::string &text);
std::string graph_to_json(const GraphSpec &spec);

/// {"edges": [{"edge": id, "pieces": [{"from", "to", "value"}, ...]}]}.
/// Every edge of g must appear once and its pieces must tile [0, length].
PiecewiseConstant parse_function_json(const MetricGraph &g,
                                      const std::string &text);
std::string function_to_json(const MetricGraph &g, const PiecewiseConstant &u);

/// Shortest round-trip text of x (17 significant digits at most).
std::string format_number(double x);
double parse_number(std::string_view s);

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// One time slice of a trajectory file: per edge (EdgeIndex order) the
/// breaks and values of the state.
struct Frame {
  double t = 0.0;
  std::vector<EdgePieces> edges;
};

struct TrajectoryTable {
  Metadata meta;
  std::vector<Frame> frames;

  const std::string *find(const std::string &key) const;
};

inline constexpr const char *kTrajectoryHeader = "t,edge,cell_left,cell_right,value";
inline constexpr const char *kDiagnosticsHeader =
    "t,mass,tv,l2,gap,iters,kirchhoff_residual,supnorm_residual";

void write_trajectory_csv(std::ostream &out, const MetricGraph &g,
                          const TrajectoryTable &table);
/// Edge column holds edge ids; rows of one frame are grouped, edges and cells
/// in increasing order.
TrajectoryTable read_trajectory_csv(std::istream &in, const MetricGraph &g);

TrajectoryTable to_table(const MetricGraph &g, const Trajectory &traj,
                         Metadata meta = {});
/// Rebuilds a solver trajectory; every frame must share one cell layout.
Trajectory from_table(const MetricGraph &g, const TrajectoryTable &table);

void write_diagnostics_csv(std::ostream &out, const Trajectory &traj,
                           const Metadata &meta = {});

}  // namespace mgtv
