#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mgtv/discrete.hpp"
#include "mgtv/flow.hpp"
#include "mgtv/graph.hpp"
#include "mgtv/pwfunc.hpp"

namespace mgtv {

class AnalysisError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

double mean(const MetricGraph &g, const PiecewiseConstant &u);

/// TV(u) / ||u||_2 for mean-zero, nonconstant u.
double rayleigh(const MetricGraph &g, const PiecewiseConstant &u);
/// Same quotient for a mesh state, after removing its mean.
double rayleigh(const MetricGraph &g, const Mesh &mesh, const DiscreteState &u);

struct LambdaEstimate {
  double lower = 0.0;  // mesh-certified
  double upper = 0.0;  // rayleigh quotient of the witness
  DiscreteState witness;  // mean zero, unit L2 norm
};

/// Bounds on inf TV / ||u - mean||_2. The lower bound is 2 / sqrt(l(G)) when
/// the graph has a bridge and 4 / sqrt(l(G)) otherwise (TV >= osc, or
/// >= 2 osc when every level set has two boundary points). The upper bound
/// is the best two-level witness over single cuts of bridge edges and
/// intervals within an edge, with cut points on mesh faces.
LambdaEstimate estimate_lambda(const MetricGraph &g, const Mesh &mesh);

enum class MstarMethod { kAuto, kTree, kFlow };

/// min ||z||_inf over Kirchhoff fields with z' = -v on every edge. Throws
/// AnalysisError when v does not have mean zero.
double mstar_norm(const MetricGraph &g, const PiecewiseConstant &v,
                  MstarMethod method = MstarMethod::kAuto);

struct SandwichRow {
  double t = 0.0;
  double norm = 0.0;       // ||u(t) - mean||_2
  double quotient = 0.0;   // Lambda(t)
  double lower_side = 0.0; // lambda.lower (T - t)
  double upper_side = 0.0; // Lambda(t) (T - t)
  double decay_bound = 0.0;// ||u0 - mean|| - lambda.lower t

  double lower_slack() const { return norm - lower_side; }
  double upper_slack() const { return upper_side - norm; }
  double decay_slack() const { return decay_bound - norm; }
};

struct ExtinctionReport {
  double measured = 0.0;
  double upper_bound = 0.0;  // ||u0 - mean|| / lambda.lower
  double lower_bound = 0.0;  // ||u0 - mean||_{m,*}
  double lambda_lower = 0.0;
  double lambda_upper = 0.0;
  std::vector<SandwichRow> rows;  // snapshots strictly before extinction

  double min_lower_slack() const;
  double min_upper_slack() const;
  double min_decay_slack() const;
};

class ExtinctionNotReached : public AnalysisError {
public:
  using AnalysisError::AnalysisError;
};

/// Throws ExtinctionNotReached if no snapshot is within `tol` of the mean.
ExtinctionReport extinction_report(const MetricGraph &g, const Trajectory &traj,
                                   const LambdaEstimate &lambda, double tol);

}  // namespace mgtv
