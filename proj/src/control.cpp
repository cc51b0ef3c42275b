#include "lodegp/control.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

namespace lodegp {

namespace {

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double require_number(const nlohmann::json& j, const char* what) {
  if (!j.is_number()) throw validation_error(std::string(what) + " must be a number");
  return j.get<double>();
}

void read_theta_array(const nlohmann::json& jt, const char* key, std::vector<double>& out) {
  if (!jt.contains(key)) return;
  const auto& ja = jt.at(key);
  if (!ja.is_array()) throw validation_error(std::string(key) + " must be an array");
  for (const auto& v : ja) out.push_back(require_number(v, key));
}

}  // namespace

ControlProblem ControlProblem::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw validation_error("problem file must be a JSON object");
  ControlProblem p;

  if (!j.contains("system")) throw validation_error("missing \"system\"");
  p.a = PolyMatrix::from_json(j.at("system"));

  if (!j.contains("horizon") || !j.at("horizon").is_array() || j.at("horizon").size() != 2)
    throw validation_error("\"horizon\" must be an array [t0, t1]");
  p.t0 = require_number(j.at("horizon")[0], "horizon start");
  p.t1 = require_number(j.at("horizon")[1], "horizon end");

  if (!j.contains("setpoints") || !j.at("setpoints").is_array())
    throw validation_error("\"setpoints\" must be an array");
  for (const auto& js : j.at("setpoints")) {
    if (!js.is_object() || !js.contains("t") || !js.contains("f"))
      throw validation_error("each setpoint needs \"t\" and \"f\"");
    Setpoint sp;
    sp.t = require_number(js.at("t"), "setpoint time");
    const auto& jf = js.at("f");
    if (!jf.is_array()) throw validation_error("setpoint \"f\" must be an array");
    sp.f.resize(jf.size());
    for (size_t c = 0; c < jf.size(); ++c) sp.f(c) = require_number(jf[c], "setpoint value");
    if (js.contains("mask")) {
      const auto& jm = js.at("mask");
      if (!jm.is_array() || jm.size() != jf.size())
        throw validation_error("setpoint \"mask\" must match \"f\" in length");
      for (const auto& b : jm) {
        if (!b.is_boolean()) throw validation_error("setpoint mask entries must be booleans");
        sp.mask.push_back(b.get<bool>());
      }
    }
    p.setpoints.push_back(std::move(sp));
  }

  if (j.contains("grid")) {
    if (!j.at("grid").is_number_integer())
      throw validation_error("\"grid\" must be an integer");
    p.grid = j.at("grid").get<int>();
  }

  if (j.contains("theta")) {
    const auto& jt = j.at("theta");
    if (jt.is_string()) {
      if (jt.get<std::string>() != "train")
        throw validation_error("\"theta\" must be \"train\" or an object of arrays");
      p.train_theta = true;
    } else if (jt.is_object()) {
      p.train_theta = false;
      read_theta_array(jt, "log_ell2", p.theta.log_ell2);
      read_theta_array(jt, "log_sigf2", p.theta.log_sigf2);
      read_theta_array(jt, "log_sigu2", p.theta.log_sigu2);
    } else {
      throw validation_error("\"theta\" must be \"train\" or an object of arrays");
    }
  }

  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned())
      throw validation_error("\"seed\" must be a non-negative integer");
    p.seed = j.at("seed").get<std::uint64_t>();
  }

  if (j.contains("base_change")) p.base_change = PolyMatrix::from_json(j.at("base_change"));

  if (j.contains("slack")) {
    p.slack = require_number(j.at("slack"), "slack");
    if (p.slack < 0.0) throw validation_error("slack must be non-negative");
  }
  return p;
}

nlohmann::json ControlProblem::to_json() const {
  nlohmann::json j;
  j["system"] = a.to_json();
  j["horizon"] = {t0, t1};
  auto& sps = j["setpoints"] = nlohmann::json::array();
  for (const auto& sp : setpoints) {
    nlohmann::json js;
    js["t"] = sp.t;
    js["f"] = std::vector<double>(sp.f.data(), sp.f.data() + sp.f.size());
    if (!sp.mask.empty()) js["mask"] = sp.mask;
    sps.push_back(std::move(js));
  }
  j["grid"] = grid;
  if (train_theta) {
    j["theta"] = "train";
  } else {
    j["theta"] = {{"log_ell2", theta.log_ell2},
                  {"log_sigf2", theta.log_sigf2},
                  {"log_sigu2", theta.log_sigu2}};
  }
  j["seed"] = seed;
  if (base_change) j["base_change"] = base_change->to_json();
  if (slack != 0.0) j["slack"] = slack;
  return j;
}

Dataset build_dataset(const ControlProblem& problem, int m0) {
  Dataset data;
  for (const Setpoint& sp : problem.setpoints) {
    if (sp.f.size() != m0)
      throw validation_error("setpoint value needs one entry per channel");
    if (!sp.mask.empty() && static_cast<int>(sp.mask.size()) != m0)
      throw validation_error("setpoint mask needs one entry per channel");
    DataPoint* slot = nullptr;
    for (auto& pt : data.points)
      if (pt.t == sp.t) {
        slot = &pt;
        break;
      }
    if (!slot) {
      DataPoint pt;
      pt.t = sp.t;
      pt.f = Eigen::VectorXd::Zero(m0);
      pt.noise_var = Eigen::VectorXd::Zero(m0);
      pt.mask.assign(m0, false);
      data.points.push_back(std::move(pt));
      slot = &data.points.back();
    }
    for (int c = 0; c < m0; ++c) {
      if (!sp.mask.empty() && !sp.mask[c]) continue;
      if (slot->mask[c] && slot->f(c) != sp.f(c))
        throw validation_error("inconsistent constraints at t=" + g17(sp.t));
      slot->mask[c] = true;
      slot->f(c) = sp.f(c);
    }
  }
  return data;
}

Trajectory solve(const ControlProblem& problem, double root_tol) {
  if (!(problem.t0 < problem.t1))
    throw validation_error("horizon start must precede its end");
  if (problem.grid < 2) throw validation_error("grid needs at least two points");
  if (problem.setpoints.empty()) throw validation_error("at least one setpoint required");
  for (const auto& sp : problem.setpoints)
    if (!(sp.t >= problem.t0 - problem.slack && sp.t <= problem.t1 + problem.slack))
      throw validation_error("setpoint at t=" + g17(sp.t) + " outside the horizon");

  const PolyMatrix* bc = problem.base_change ? &*problem.base_change : nullptr;
  LodeGP gp = build_lode_gp(problem.a, problem.theta, bc, root_tol);
  const int m0 = gp.kernel.m0;
  Dataset data = build_dataset(problem, m0);
  data.validate(m0);

  Trajectory tr;
  if (problem.train_theta) {
    TrainOptions opt;
    opt.seed = problem.seed;
    const TrainResult res = train(gp, data, gp.theta, opt);
    gp.theta = res.theta;
    gp.kernel = kernel_for(gp, res.theta);
    tr.train_evals = res.evals;
  }
  tr.theta_used = gp.theta;

  std::vector<double> times;
  times.reserve(problem.grid + problem.setpoints.size());
  for (int i = 0; i < problem.grid; ++i)
    times.push_back(problem.t0 + (problem.t1 - problem.t0) * i / (problem.grid - 1));
  for (const auto& sp : problem.setpoints) times.push_back(sp.t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  Posterior post;
  try {
    post = posterior(gp, data, times);
  } catch (const numerical_error&) {
    Eigen::MatrixXd kmat = gram_at(gp.kernel, data.coords());
    kmat.diagonal() += data.noises();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(kmat);
    throw inadmissible_error("problem not admissible: constraint matrix singular (smallest singular value " +
                             g17(svd.singularValues().minCoeff()) + ")");
  }
  tr.times = times;
  tr.mean = post.mean;
  tr.std = post.std;
  tr.lambda_used = post.lambda_used;

  tr.setpoint_errors.reserve(problem.setpoints.size());
  for (const auto& sp : problem.setpoints) {
    const auto it = std::lower_bound(times.begin(), times.end(), sp.t);
    const int idx = static_cast<int>(it - times.begin());
    double err = 0.0;
    for (int c = 0; c < m0; ++c) {
      if (!sp.mask.empty() && !sp.mask[c]) continue;
      err = std::max(err, std::abs(tr.mean(idx, c) - sp.f(c)));
    }
    tr.setpoint_errors.push_back(err);
  }

  tr.residual_max = residual_max(gp, post.alpha, post.coords, times);
  tr.rkhs_norm = rkhs_norm(gp, data);
  return tr;
}

double residual_max(const LodeGP& gp, const Eigen::VectorXd& alpha,
                    const std::vector<ObsCoord>& coords, const std::vector<double>& times,
                    const std::vector<MeanSection>& extras) {
  if (alpha.size() != static_cast<Eigen::Index>(coords.size()))
    throw validation_error("weights and coordinates must match in length");
  const int rows = gp.a.rows();
  const int m0 = gp.kernel.m0;

  // (A K)(i, b): system row i applied to covariance column b in the first
  // argument; the mean's defining-equation image is a weighted sum of these.
  std::vector<KernelExpr> applied(static_cast<size_t>(rows) * m0);
  for (int i = 0; i < rows; ++i)
    for (int b = 0; b < m0; ++b) {
      KernelExpr acc;
      for (int c = 0; c < m0; ++c) {
        if (gp.a.at(i, c).is_zero() || gp.kernel.at(c, b).is_zero()) continue;
        acc = acc + apply_operator_poly(gp.a.at(i, c), gp.kernel.at(c, b), 1);
      }
      applied[static_cast<size_t>(i) * m0 + b] = std::move(acc);
    }

  std::vector<KernelExpr> applied_extra(static_cast<size_t>(rows) * extras.size());
  for (size_t e = 0; e < extras.size(); ++e) {
    if (extras[e].channel < 0 || extras[e].channel >= m0)
      throw validation_error("extra section channel out of range");
    for (int i = 0; i < rows; ++i) {
      const Poly& op = gp.a.at(i, extras[e].channel);
      if (!op.is_zero())
        applied_extra[i * extras.size() + e] = apply_operator_poly(op, extras[e].expr, 1);
    }
  }

  double worst = 0.0;
  for (double t : times)
    for (int i = 0; i < rows; ++i) {
      double r = 0.0;
      for (size_t k = 0; k < coords.size(); ++k)
        r += alpha(k) * applied[static_cast<size_t>(i) * m0 + coords[k].second].eval(t, coords[k].first);
      for (size_t e = 0; e < extras.size(); ++e)
        r += extras[e].weight * applied_extra[i * extras.size() + e].eval(t, extras[e].t2);
      worst = std::max(worst, std::abs(r));
    }
  return worst;
}

double rkhs_norm(const LodeGP& gp, const Dataset& data, double* lambda_used,
                 const JitterPolicy& policy) {
  data.validate(gp.kernel.m0);
  const std::vector<ObsCoord> coords = data.coords();
  if (coords.empty()) throw validation_error("dataset has no observed channels");
  Eigen::MatrixXd kmat = gram_at(gp.kernel, coords);
  kmat.diagonal() += data.noises();
  const Eigen::VectorXd f = data.values();
  const PsdSolve sol = psd_solve(kmat, f, policy);
  if (lambda_used) *lambda_used = sol.lambda_used;
  return std::sqrt(std::max(0.0, f.dot(sol.x.col(0))));
}

ProbeReport minimality_probe(const LodeGP& gp, const Dataset& data,
                             const std::vector<double>& probe_times, int n_trials,
                             std::uint64_t seed, const JitterPolicy& policy) {
  data.validate(gp.kernel.m0);
  const std::vector<ObsCoord> obs = data.coords();
  if (obs.empty()) throw validation_error("dataset has no observed channels");
  if (probe_times.empty() || n_trials < 1)
    throw validation_error("minimality probe needs probe times and trials");

  std::vector<ObsCoord> probes;
  probes.reserve(probe_times.size() * gp.kernel.m0);
  for (double t : probe_times)
    for (int c = 0; c < gp.kernel.m0; ++c) probes.emplace_back(t, c);

  Eigen::MatrixXd noisy = gram_at(gp.kernel, obs);
  const Eigen::MatrixXd g_oo = noisy;
  noisy.diagonal() += data.noises();
  const Eigen::VectorXd f = data.values();
  const PsdSolve sol = psd_solve(noisy, f, policy);
  const Eigen::VectorXd alpha = sol.x.col(0);
  const double mu_norm2 = alpha.dot(g_oo * alpha);

  const Eigen::MatrixXd c_cross = cross_gram(gp.kernel, obs, probes);
  const Eigen::MatrixXd g_pp = gram_at(gp.kernel, probes);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(c_cross);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  ProbeReport rep;
  rep.trials = n_trials;
  for (int trial = 0; trial < n_trials; ++trial) {
    Eigen::VectorXd c0(static_cast<Eigen::Index>(probes.size()));
    for (Eigen::Index i = 0; i < c0.size(); ++i) c0(i) = gauss(rng);
    // Remove the component that changes the mean's values on the data; what
    // is left perturbs the interpolant without touching the constraints.
    const Eigen::VectorXd c = c0 - cod.solve(c_cross * c0);
    if (c.norm() < 1e-12 * c0.norm()) {
      ++rep.skipped;
      continue;
    }
    const double cross = alpha.dot(c_cross * c);
    const double h_norm2 = mu_norm2 + 2.0 * cross + c.dot(g_pp * c);
    const double violation = mu_norm2 - h_norm2;
    rep.max_violation = std::max(rep.max_violation, violation);
    if (violation <= 1e-8 * (1.0 + std::abs(mu_norm2))) ++rep.passed;
  }
  return rep;
}

void write_trajectory_csv(const Trajectory& tr, std::ostream& os) {
  const int m0 = static_cast<int>(tr.mean.cols());
  os << "t";
  for (int c = 1; c <= m0; ++c) os << ",mean_" << c;
  for (int c = 1; c <= m0; ++c) os << ",std_" << c;
  os << "\n";
  for (size_t i = 0; i < tr.times.size(); ++i) {
    os << g17(tr.times[i]);
    for (int c = 0; c < m0; ++c) os << "," << g17(tr.mean(i, c));
    for (int c = 0; c < m0; ++c) os << "," << g17(tr.std(i, c));
    os << "\n";
  }
}

nlohmann::json trajectory_to_json(const Trajectory& tr) {
  nlohmann::json j;
  j["residual_max"] = tr.residual_max;
  j["setpoint_errors"] = tr.setpoint_errors;
  j["rkhs_norm"] = tr.rkhs_norm;
  j["lambda_used"] = tr.lambda_used;
  j["train_evals"] = tr.train_evals;
  j["theta"] = {{"log_ell2", tr.theta_used.log_ell2},
                {"log_sigf2", tr.theta_used.log_sigf2},
                {"log_sigu2", tr.theta_used.log_sigu2}};
  return j;
}

}  // namespace lodegp
