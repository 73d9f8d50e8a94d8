#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "mgtv/graph.hpp"
#include "mgtv/pwfunc.hpp"

namespace mgtv {

using Rational = boost::multiprecision::cpp_rational;

class OracleError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline double to_double(double x) { return x; }
inline double to_double(const Rational &x) { return x.convert_to<double>(); }

template <class S>
struct Segment {
  std::size_t edge;  // EdgeIndex value
  S from, to;
};

template <class S>
struct OraclePlateau {
  std::vector<Segment<S>> segments;
  S length{};
  S value{};  // at the start of the phase
  S flux{};   // net z change across the plateau
  S slope{};  // flux / length
};

template <class S>
struct OraclePhase {
  S start, end;  // absolute times
  std::vector<OraclePlateau<S>> plateaus;
};

/// Closed-form trajectory: plateaus move at constant speed within a phase and
/// merge at phase ends. Times are absolute.
template <class S>
struct ExplicitSolution {
  struct EdgeDef {
    std::size_t id;
    std::string from, to;
    S length;
  };
  struct Datum {
    std::vector<S> breaks, values;
  };

  std::string name;
  std::vector<std::string> vertices;
  std::vector<EdgeDef> edges;
  std::vector<Datum> datum;  // per edge, in edge order
  std::vector<OraclePhase<S>> phases;
  S mean;
  S final_value;
  S extinction_time;

  GraphSpec graph_spec() const;
  PiecewiseConstant initial(const MetricGraph &g) const;
};

/// Plateau dynamics of a piecewise-constant datum: each plateau moves with
/// slope sum_j w_ij sign(v_j - v_i) / length, where w_ij counts interior
/// cut points shared with plateau j, and min(count_i, count_j) at a vertex
/// where exactly two plateaus meet. Throws OracleError when three or more
/// plateaus meet at a vertex.
template <class S>
ExplicitSolution<S> plateau_dynamics(std::string name,
                                     std::vector<std::string> vertices,
                                     std::vector<typename ExplicitSolution<S>::EdgeDef> edges,
                                     std::vector<typename ExplicitSolution<S>::Datum> datum);

template <class S> ExplicitSolution<S> neumann_case1(S L, S a, S k);
template <class S> ExplicitSolution<S> neumann_case2(S L, S b, S k);
template <class S> ExplicitSolution<S> neumann_case3(S L, S c, S k1, S k2);
template <class S> ExplicitSolution<S> neumann_case4(S L, S a, S b, S k);
/// e1 = [v1, v2], e2 = [v2, v3]; datum k on the first a units of e2.
template <class S> ExplicitSolution<S> path3_example(S l1, S l2, S a, S k);
/// e1 = [v1, v2], e2 = [v2, v3], e3 = [v2, v4] with lengths (l1, l, l);
/// datum k on (a, l1) of e1.
template <class S> ExplicitSolution<S> star_example(S l1, S l, S a, S k);

/// Exact per-edge pieces at absolute time t (constant beyond T_ex).
template <class S>
std::vector<typename ExplicitSolution<S>::Datum>
eval_exact(const ExplicitSolution<S> &sol, const S &t);

template <class S>
PiecewiseConstant eval(const MetricGraph &g, const ExplicitSolution<S> &sol,
                       double t);

/// Boundaries T_1 < ... < T_m = T_ex of all phases.
template <class S>
std::vector<S> phase_ends(const ExplicitSolution<S> &sol);

}  // namespace mgtv
