#pragma once

#include <json.hpp>
#include <optional>
#include <ostream>
#include <vector>

#include "lodegp/gp.hpp"

namespace lodegp {

struct Setpoint {
  double t = 0.0;
  Eigen::VectorXd f;       // length m0
  std::vector<bool> mask;  // empty = every channel pinned
};

// A steering task: drive the system through the setpoints over the horizon.
struct ControlProblem {
  PolyMatrix a;
  double t0 = 0.0, t1 = 1.0;
  std::vector<Setpoint> setpoints;
  int grid = 200;
  bool train_theta = true;
  Theta theta;  // fixed values, or the initial guess when training
  std::uint64_t seed = kDefaultSeed;
  std::optional<PolyMatrix> base_change;
  double slack = 0.0;  // tolerance for setpoints off the horizon

  // File form:
  //   {"system": {...}, "horizon": [t0, t1],
  //    "setpoints": [{"t": .., "f": [..], "mask": [..]?}, ...],
  //    "grid": 200, "theta": "train" | {"log_ell2": [..], ...},
  //    "seed": 20240, "base_change": {...}?, "slack": 0.0?}
  // Throws validation_error on malformed content.
  static ControlProblem from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Zero-noise conditioning data: one point per distinct setpoint time.
// Coinciding setpoints merge; a channel pinned twice to different values
// throws validation_error.
Dataset build_dataset(const ControlProblem& problem, int m0);

struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXd mean;  // times x m0
  Eigen::MatrixXd std;   // times x m0
  double residual_max = 0.0;
  std::vector<double> setpoint_errors;  // per setpoint, max over pinned channels
  double rkhs_norm = 0.0;
  Theta theta_used;
  double lambda_used = 0.0;
  long train_evals = 0;
};

// Conditions the constrained process on the setpoints (training first when
// requested), evaluates the mean on the grid plus the setpoint times, and
// reports the defining-equation residual and the solution norm. Throws
// inadmissible_error when the constraint system is numerically singular even
// at the top of the jitter ladder.
Trajectory solve(const ControlProblem& problem, double root_tol = 1e-6);

// Additional mean content for residual checks: weight * expr(t, t2) added to
// one output channel.
struct MeanSection {
  int channel = 0;
  KernelExpr expr;
  double t2 = 0.0;
  double weight = 1.0;
};

// Max over times and system rows of |(A mu)(t)| where mu is the representer
// mean sum_r alpha_r K(., coords_r) plus any extra sections. Differentiation
// is symbolic; no finite differences.
double residual_max(const LodeGP& gp, const Eigen::VectorXd& alpha,
                    const std::vector<ObsCoord>& coords, const std::vector<double>& times,
                    const std::vector<MeanSection>& extras = {});

// sqrt(f^T (K + N + lambda I)^{-1} f), the norm of the representer mean.
double rkhs_norm(const LodeGP& gp, const Dataset& data, double* lambda_used = nullptr,
                 const JitterPolicy& policy = {});

struct ProbeReport {
  int trials = 0;
  int passed = 0;
  int skipped = 0;          // projection left no usable direction
  double max_violation = 0.0;
};

// Empirical check that the mean is norm-minimal among consistent competitors:
// perturbs it by representer directions anchored at probe_times that vanish
// on the data coordinates, and verifies the norm never decreases.
ProbeReport minimality_probe(const LodeGP& gp, const Dataset& data,
                             const std::vector<double>& probe_times, int n_trials,
                             std::uint64_t seed = kDefaultSeed, const JitterPolicy& policy = {});

// Header t,mean_1..mean_m,std_1..std_m; values printed with %.17g.
void write_trajectory_csv(const Trajectory& tr, std::ostream& os);

// Scalar diagnostics plus the hyperparameters actually used.
nlohmann::json trajectory_to_json(const Trajectory& tr);

}  // namespace lodegp
