#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "lodegp/control.hpp"

namespace {

using namespace lodegp;

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open " + path);
  return nlohmann::json::parse(in);
}

void emit(const nlohmann::json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream f(out);
  if (!f) throw validation_error("cannot write " + out);
  f << j.dump(2) << "\n";
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t comma = s.find(',', start);
    out.push_back(s.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string theta_lines(const Theta& th) {
  auto join = [](const std::vector<double>& v) {
    std::string s = "[";
    for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + g17(v[i]);
    return s + "]";
  };
  return "log_ell2 = " + join(th.log_ell2) + "\nlog_sigf2 = " + join(th.log_sigf2) +
         "\nlog_sigu2 = " + join(th.log_sigu2) + "\n";
}

struct GlobalOpts {
  std::uint64_t seed = kDefaultSeed;
  bool seed_given = false;
  int threads = 1;
  double setpoint_tol = 1e-6;
  double residual_tol = 1e-5;
  double root_tol = 1e-6;
  bool verbose = false;
};

ControlProblem load_problem(const std::string& path, const GlobalOpts& g) {
  const nlohmann::json j = load_json(path);
  ControlProblem p;
  if (j.is_object() && j.contains("system")) {
    p = ControlProblem::from_json(j);
  } else {
    // Bare system matrix: defaults stand in for the rest of the problem.
    p.a = PolyMatrix::from_json(j);
    p.train_theta = false;
  }
  if (g.seed_given) p.seed = g.seed;
  return p;
}

void run_snf(const std::string& file, bool analyze, const std::string& out,
             const GlobalOpts& g) {
  const nlohmann::json j = load_json(file);
  const PolyMatrix a = j.is_object() && j.contains("system") ? PolyMatrix::from_json(j.at("system"))
                                                             : PolyMatrix::from_json(j);
  const SNFDecomposition dec = snf(a);
  const bool ok = snf_verify(a, dec);
  nlohmann::json rep;
  rep["u"] = dec.u.to_json();
  rep["d"] = dec.d.to_json();
  rep["v"] = dec.v.to_json();
  rep["det_u"] = rational_str(dec.det_u);
  rep["det_v"] = rational_str(dec.det_v);
  rep["verified"] = ok;
  if (analyze) rep["analysis"] = diagspec_to_json(analyze_diagonal(dec.d, g.root_tol));
  emit(rep, out);
  if (!ok) throw numerical_error("decomposition failed its exact self-check");
}

void run_kernel(const std::string& file, const std::string& out, const GlobalOpts& g) {
  const ControlProblem p = load_problem(file, g);
  const PolyMatrix* bc = p.base_change ? &*p.base_change : nullptr;
  const LodeGP gp = build_lode_gp(p.a, p.theta, bc, g.root_tol);
  nlohmann::json rep;
  rep["m0"] = gp.kernel.m0;
  rep["channels"] = diagspec_to_json(gp.spec);
  rep["theta"] = {{"log_ell2", gp.theta.log_ell2},
                  {"log_sigf2", gp.theta.log_sigf2},
                  {"log_sigu2", gp.theta.log_sigu2}};
  auto& entries = rep["entries"] = nlohmann::json::array();
  for (int i = 0; i < gp.kernel.m0; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int jcol = 0; jcol < gp.kernel.m0; ++jcol) row.push_back(gp.kernel.at(i, jcol).to_json());
    entries.push_back(std::move(row));
  }
  emit(rep, out);
}

void run_solve(const std::string& file, const std::string& out_csv, const std::string& out_json,
               const GlobalOpts& g) {
  const ControlProblem p = load_problem(file, g);
  const Trajectory tr = solve(p, g.root_tol);

  {
    std::ofstream csv(out_csv);
    if (!csv) throw validation_error("cannot write " + out_csv);
    write_trajectory_csv(tr, csv);
  }
  emit(trajectory_to_json(tr), out_json);

  double max_sp = 0.0;
  for (double e : tr.setpoint_errors) max_sp = std::max(max_sp, e);
  std::cout << "setpoint_error_max = " << g17(max_sp) << "\n";
  std::cout << "residual_max = " << g17(tr.residual_max) << "\n";
  std::cout << "rkhs_norm = " << g17(tr.rkhs_norm) << "\n";
  std::cout << theta_lines(tr.theta_used);
  if (g.verbose) {
    std::cerr << "lambda_used = " << g17(tr.lambda_used) << "\n";
    std::cerr << "train_evals = " << tr.train_evals << "\n";
  }
  if (max_sp > g.setpoint_tol)
    throw inadmissible_error("setpoint error " + g17(max_sp) + " exceeds tolerance " +
                             g17(g.setpoint_tol));
  if (tr.residual_max > g.residual_tol)
    throw inadmissible_error("residual " + g17(tr.residual_max) + " exceeds tolerance " +
                             g17(g.residual_tol));
  std::cout << "ok\n";
}

void run_train(const std::string& file, const std::string& out, const GlobalOpts& g) {
  const ControlProblem p = load_problem(file, g);
  const PolyMatrix* bc = p.base_change ? &*p.base_change : nullptr;
  const LodeGP gp = build_lode_gp(p.a, p.theta, bc, g.root_tol);
  Dataset data = build_dataset(p, gp.kernel.m0);
  data.validate(gp.kernel.m0);
  TrainOptions opt;
  opt.seed = p.seed;
  const TrainResult res = train(gp, data, gp.theta, opt);
  std::cout << "nll = " << g17(res.nll) << "\n" << theta_lines(res.theta);
  if (g.verbose) std::cerr << "evals = " << res.evals << "\n";
  ControlProblem trained = p;
  trained.train_theta = false;
  trained.theta = res.theta;
  emit(trained.to_json(), out);
}

void run_nll_grid(const std::string& file, const std::string& counts_arg,
                  const std::string& lo_arg, const std::string& hi_arg, const std::string& out,
                  const GlobalOpts& g) {
  const ControlProblem p = load_problem(file, g);
  const PolyMatrix* bc = p.base_change ? &*p.base_change : nullptr;
  const LodeGP gp = build_lode_gp(p.a, p.theta, bc, g.root_tol);
  Dataset data = build_dataset(p, gp.kernel.m0);
  data.validate(gp.kernel.m0);

  const int k = static_cast<int>(gp.theta.flatten().size());
  if (k == 0) throw validation_error("system has no hyperparameters to sweep");

  auto expand = [&](const std::string& arg, auto convert, auto fallback) {
    std::vector<decltype(convert(std::string()))> vals;
    if (arg.empty()) {
      for (int i = 0; i < k; ++i) vals.push_back(fallback(i));
    } else {
      const auto parts = split_commas(arg);
      if (parts.size() != 1 && static_cast<int>(parts.size()) != k)
        throw validation_error("expected one value or one per hyperparameter");
      for (int i = 0; i < k; ++i)
        vals.push_back(convert(parts[parts.size() == 1 ? 0 : i]));
    }
    return vals;
  };
  const TrainBounds bounds;
  const auto counts = expand(
      counts_arg, [](const std::string& s) { return std::stoi(s); }, [](int) { return 40; });
  const auto los = expand(
      lo_arg, [](const std::string& s) { return std::stod(s); },
      [&](int i) { return bounds.at(gp.spec, i).first; });
  const auto his = expand(
      hi_arg, [](const std::string& s) { return std::stod(s); },
      [&](int i) { return bounds.at(gp.spec, i).second; });

  std::vector<GridAxis> axes(k);
  for (int i = 0; i < k; ++i) {
    if (counts[i] < 1) throw validation_error("grid count must be positive");
    axes[i] = GridAxis{los[i], his[i], counts[i]};
  }
  const GridResult grid = nll_grid(gp, data, axes, g.threads);

  std::ofstream csv(out);
  if (!csv) throw validation_error("cannot write " + out);
  for (int i = 1; i <= k; ++i) csv << "theta_" << i << ",";
  csv << "nll\n";
  for (size_t cell = 0; cell < grid.nll.size(); ++cell) {
    size_t rem = cell;
    std::vector<double> x(k);
    for (int d = k - 1; d >= 0; --d) {
      x[d] = axes[d].point(static_cast<int>(rem % axes[d].count));
      rem /= axes[d].count;
    }
    for (int d = 0; d < k; ++d) csv << g17(x[d]) << ",";
    csv << g17(grid.nll[cell]) << "\n";
  }
  std::cout << "wrote " << grid.nll.size() << " cells to " << out << "\n";
}

void run_verify(const std::string& file, const std::string& sidecar, int trials,
                const GlobalOpts& g) {
  const ControlProblem p = load_problem(file, g);
  const PolyMatrix* bc = p.base_change ? &*p.base_change : nullptr;
  LodeGP gp = build_lode_gp(p.a, p.theta, bc, g.root_tol);

  nlohmann::json rep;
  bool all_ok = true;
  auto line = [&](const char* name, bool ok, const std::string& detail) {
    std::cout << name << ": " << (ok ? "PASS" : "FAIL")
              << (detail.empty() ? "" : " (" + detail + ")") << "\n";
    rep[name] = {{"pass", ok}, {"detail", detail}};
    all_ok = all_ok && ok;
  };

  line("factorization", snf_verify(p.a, gp.dec), "exact identity and invariants");

  const Trajectory tr = solve(p, g.root_tol);
  gp.theta = tr.theta_used;
  gp.kernel = kernel_for(gp, gp.theta);

  // The covariance must be annihilated row-wise by the system in its first
  // argument; sampled at random pairs, scaled by the largest kernel value.
  {
    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> uni(p.t0, p.t1);
    double worst = 0.0, scale = 1.0;
    std::vector<KernelExpr> applied(static_cast<size_t>(p.a.rows()) * gp.kernel.m0);
    for (int i = 0; i < p.a.rows(); ++i)
      for (int b = 0; b < gp.kernel.m0; ++b) {
        KernelExpr acc;
        for (int c = 0; c < gp.kernel.m0; ++c) {
          if (p.a.at(i, c).is_zero() || gp.kernel.at(c, b).is_zero()) continue;
          acc = acc + apply_operator_poly(p.a.at(i, c), gp.kernel.at(c, b), 1);
        }
        applied[static_cast<size_t>(i) * gp.kernel.m0 + b] = std::move(acc);
      }
    for (int pair = 0; pair < 50; ++pair) {
      const double t1 = uni(rng), t2 = uni(rng);
      for (int b = 0; b < gp.kernel.m0; ++b) {
        for (int c = 0; c < gp.kernel.m0; ++c)
          scale = std::max(scale, std::abs(gp.kernel.at(c, b).eval(t1, t2)));
        for (int i = 0; i < p.a.rows(); ++i)
          worst = std::max(
              worst, std::abs(applied[static_cast<size_t>(i) * gp.kernel.m0 + b].eval(t1, t2)));
      }
    }
    line("annihilation", worst <= 1e-8 * scale, "max |A k| = " + g17(worst));
  }

  double max_sp = 0.0;
  for (double e : tr.setpoint_errors) max_sp = std::max(max_sp, e);
  line("setpoints", max_sp <= g.setpoint_tol, "max error " + g17(max_sp));
  line("residual", tr.residual_max <= g.residual_tol, "max " + g17(tr.residual_max));

  {
    Dataset data = build_dataset(p, gp.kernel.m0);
    std::vector<double> probes;
    for (int i = 1; i <= 7; ++i) probes.push_back(p.t0 + (p.t1 - p.t0) * i / 8.0);
    const ProbeReport probe = minimality_probe(gp, data, probes, trials, p.seed);
    const bool ok = probe.passed == probe.trials - probe.skipped && probe.skipped < probe.trials;
    line("minimality", ok,
         std::to_string(probe.passed) + "/" + std::to_string(probe.trials) + " passed, " +
             std::to_string(probe.skipped) + " skipped, max violation " +
             g17(probe.max_violation));
  }

  if (!sidecar.empty()) emit(rep, sidecar);
  if (!all_ok) throw inadmissible_error("verification failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Control synthesis for linear constant-coefficient ODE systems"};
  app.require_subcommand(1);

  GlobalOpts g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Seed for stochastic components");
  app.add_option("--threads", g.threads, "Worker threads for grid sweeps")
      ->check(CLI::PositiveNumber);
  app.add_option("--setpoint-tol", g.setpoint_tol, "Setpoint tolerance for solve/verify");
  app.add_option("--residual-tol", g.residual_tol, "Residual tolerance for solve/verify");
  app.add_option("--root-tol", g.root_tol, "Root clustering tolerance");
  app.add_flag("-v,--verbose", g.verbose, "Extra diagnostics on stderr");

  std::string file, out_csv = "trajectory.csv", out_json = "trajectory.json";
  std::string out_snf, out_kernel, out_train = "trained.json", out_grid = "nll_grid.csv";
  std::string counts_arg, lo_arg, hi_arg, sidecar;
  bool analyze = false;
  int trials = 20;

  auto* c_snf = app.add_subcommand("snf", "Factor a system matrix");
  c_snf->add_option("file", file, "System or problem JSON")->required();
  c_snf->add_flag("--analyze", analyze, "Classify the diagonal channels");
  c_snf->add_option("-o,--out", out_snf, "Write the report here instead of stdout");
  c_snf->callback([&]() {
    g.seed_given = seed_opt->count() > 0;
    run_snf(file, analyze, out_snf, g);
  });

  auto* c_kernel = app.add_subcommand("kernel", "Print the constrained covariance");
  c_kernel->add_option("file", file, "System or problem JSON")->required();
  c_kernel->add_option("-o,--out", out_kernel, "Write the report here instead of stdout");
  c_kernel->callback([&]() {
    g.seed_given = seed_opt->count() > 0;
    run_kernel(file, out_kernel, g);
  });

  auto* c_solve = app.add_subcommand("solve", "Solve a steering problem");
  c_solve->add_option("file", file, "Problem JSON")->required();
  c_solve->add_option("--out-csv", out_csv, "Trajectory table destination");
  c_solve->add_option("--out-json", out_json, "Diagnostics destination");
  c_solve->callback([&]() {
    g.seed_given = seed_opt->count() > 0;
    run_solve(file, out_csv, out_json, g);
  });

  auto* c_train = app.add_subcommand("train", "Fit hyperparameters to the setpoints");
  c_train->add_option("file", file, "Problem JSON")->required();
  c_train->add_option("-o,--out", out_train, "Trained problem destination");
  c_train->callback([&]() {
    g.seed_given = seed_opt->count() > 0;
    run_train(file, out_train, g);
  });

  auto* c_grid = app.add_subcommand("nll-grid", "Tabulate the objective on a grid");
  c_grid->add_option("file", file, "Problem JSON")->required();
  c_grid->add_option("--counts", counts_arg, "Points per axis, comma separated");
  c_grid->add_option("--lo", lo_arg, "Axis lower bounds, comma separated");
  c_grid->add_option("--hi", hi_arg, "Axis upper bounds, comma separated");
  c_grid->add_option("-o,--out", out_grid, "CSV destination");
  c_grid->callback([&]() {
    g.seed_given = seed_opt->count() > 0;
    run_nll_grid(file, counts_arg, lo_arg, hi_arg, out_grid, g);
  });

  auto* c_verify = app.add_subcommand("verify", "Check every solution invariant");
  c_verify->add_option("file", file, "Problem JSON")->required();
  c_verify->add_option("--sidecar", sidecar, "Write a JSON report here");
  c_verify->add_option("--trials", trials, "Minimality probe count")->check(CLI::PositiveNumber);
  c_verify->callback([&]() {
    g.seed_given = seed_opt->count() > 0;
    run_verify(file, sidecar, trials, g);
  });

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const inadmissible_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
