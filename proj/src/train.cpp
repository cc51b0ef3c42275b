#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

#include "lodegp/gp.hpp"

namespace lodegp {

namespace {

constexpr double kFailedEval = 1e100;

double halton(std::uint64_t index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

constexpr int kHaltonBases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31};

struct Simplex {
  std::vector<std::vector<double>> x;
  std::vector<double> fx;
};

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink
// 1/2). The objective is responsible for bound handling.
std::pair<std::vector<double>, double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& x0,
    double step, int max_iters, long* evals) {
  const int n = static_cast<int>(x0.size());
  Simplex s;
  s.x.push_back(x0);
  for (int i = 0; i < n; ++i) {
    std::vector<double> xi = x0;
    xi[i] += step;
    s.x.push_back(std::move(xi));
  }
  s.fx.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    s.fx[i] = f(s.x[i]);
    ++*evals;
  }

  std::vector<int> order(n + 1);
  for (int it = 0; it < max_iters; ++it) {
    for (int i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return s.fx[a] < s.fx[b]; });
    const int best = order[0], worst = order[n], second = order[n - 1];
    if (std::fabs(s.fx[worst] - s.fx[best]) < 1e-12) {
      double diam = 0.0;
      for (int i = 1; i <= n; ++i)
        for (int d = 0; d < n; ++d)
          diam = std::max(diam, std::fabs(s.x[order[i]][d] - s.x[best][d]));
      if (diam < 1e-10) break;
    }

    std::vector<double> centroid(n, 0.0);
    for (int i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (int d = 0; d < n; ++d) centroid[d] += s.x[i][d];
    }
    for (double& c : centroid) c /= n;

    auto blend = [&](double coef) {
      std::vector<double> p(n);
      for (int d = 0; d < n; ++d) p[d] = centroid[d] + coef * (s.x[worst][d] - centroid[d]);
      return p;
    };
    const std::vector<double> refl = blend(-1.0);
    const double frefl = f(refl);
    ++*evals;
    if (frefl < s.fx[best]) {
      const std::vector<double> expd = blend(-2.0);
      const double fexpd = f(expd);
      ++*evals;
      if (fexpd < frefl) {
        s.x[worst] = expd;
        s.fx[worst] = fexpd;
      } else {
        s.x[worst] = refl;
        s.fx[worst] = frefl;
      }
      continue;
    }
    if (frefl < s.fx[second]) {
      s.x[worst] = refl;
      s.fx[worst] = frefl;
      continue;
    }
    const std::vector<double> contr = blend(frefl < s.fx[worst] ? -0.5 : 0.5);
    const double fcontr = f(contr);
    ++*evals;
    if (fcontr < std::min(frefl, s.fx[worst])) {
      s.x[worst] = contr;
      s.fx[worst] = fcontr;
      continue;
    }
    for (int i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (int d = 0; d < n; ++d) s.x[i][d] = 0.5 * (s.x[i][d] + s.x[best][d]);
      s.fx[i] = f(s.x[i]);
      ++*evals;
    }
  }
  int arg = 0;
  for (int i = 1; i <= static_cast<int>(x0.size()); ++i)
    if (s.fx[i] < s.fx[arg]) arg = i;
  return {s.x[arg], s.fx[arg]};
}

}  // namespace

std::pair<double, double> TrainBounds::at(const DiagonalSpec& spec, int index) const {
  const int nf = spec.num_free();
  if (index < 2 * nf)
    return index % 2 == 0 ? std::make_pair(ell2_lo, ell2_hi)
                          : std::make_pair(sigf2_lo, sigf2_hi);
  return {sigu2_lo, sigu2_hi};
}

TrainResult train(const LodeGP& gp, const Dataset& data, const Theta& init,
                  const TrainOptions& opt) {
  const std::vector<double> x_init = init.flatten();
  const int nfull = static_cast<int>(x_init.size());
  if (!opt.freeze.empty() && static_cast<int>(opt.freeze.size()) != nfull)
    throw validation_error("freeze flags must match the hyperparameter count");

  std::vector<int> active;
  for (int i = 0; i < nfull; ++i)
    if (opt.freeze.empty() || !opt.freeze[i]) active.push_back(i);
  if (active.empty()) {
    TrainResult out;
    out.theta = init;
    out.nll = nll(gp, data);
    return out;
  }
  const int n = static_cast<int>(active.size());

  auto expand = [&](const std::vector<double>& xr) {
    std::vector<double> x = x_init;
    for (int i = 0; i < n; ++i) {
      const auto [lo, hi] = opt.bounds.at(gp.spec, active[i]);
      x[active[i]] = std::clamp(xr[i], lo, hi);
    }
    return x;
  };

  long evals = 0;
  auto objective = [&](const std::vector<double>& xr) -> double {
    try {
      const Theta theta = Theta::unflatten(gp.spec, expand(xr));
      LodeGP cand = gp;
      cand.theta = theta;
      cand.kernel = kernel_for(gp, theta);
      return nll(cand, data);
    } catch (const std::exception&) {
      return kFailedEval;
    }
  };

  std::vector<std::vector<double>> starts;
  {
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = x_init[active[i]];
    starts.push_back(std::move(r));
  }
  const std::uint64_t base_index = 1 + opt.seed % 8191;
  for (int rstart = 0; rstart < opt.restarts; ++rstart) {
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) {
      const auto [lo, hi] = opt.bounds.at(gp.spec, active[i]);
      const int base = kHaltonBases[i % (sizeof(kHaltonBases) / sizeof(int))];
      r[i] = lo + (hi - lo) * halton(base_index + rstart, base);
    }
    starts.push_back(std::move(r));
  }

  std::vector<double> best_x;
  double best_f = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    auto [x, fx] = nelder_mead(objective, s, 0.25, opt.max_iters, &evals);
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  if (!(best_f < kFailedEval)) throw numerical_error("all training restarts failed");

  // Re-descend from the incumbent until the simplex stops finding progress.
  for (int pass = 0; pass < 40; ++pass) {
    auto [x, fx] = nelder_mead(objective, best_x, 0.25, opt.max_iters, &evals);
    const double gain = best_f - fx;
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
    if (gain < 1e-10) break;
  }

  TrainResult out;
  out.theta = Theta::unflatten(gp.spec, expand(best_x));
  out.nll = best_f;
  out.evals = evals;
  return out;
}

GridResult nll_grid(const LodeGP& gp, const Dataset& data, const std::vector<GridAxis>& axes,
                    int threads) {
  if (axes.empty()) throw validation_error("empty grid specification");
  if (static_cast<int>(axes.size()) != static_cast<int>(gp.theta.flatten().size()))
    throw validation_error("grid must cover every hyperparameter");
  long total = 1;
  for (const auto& ax : axes) {
    if (ax.count < 1) throw validation_error("grid axis needs at least one point");
    total *= ax.count;
  }

  GridResult out;
  out.axes = axes;
  out.nll.assign(total, std::numeric_limits<double>::quiet_NaN());

  auto run_cell = [&](long cell) {
    std::vector<double> x(axes.size());
    long rem = cell;
    for (int d = static_cast<int>(axes.size()) - 1; d >= 0; --d) {
      x[d] = axes[d].point(rem % axes[d].count);
      rem /= axes[d].count;
    }
    try {
      const Theta theta = Theta::unflatten(gp.spec, x);
      LodeGP cand = gp;
      cand.theta = theta;
      cand.kernel = kernel_for(gp, theta);
      out.nll[cell] = nll(cand, data);
    } catch (const std::exception&) {
      // NaN marker stays in place.
    }
  };

  if (threads <= 1 || total < 4) {
    for (long cell = 0; cell < total; ++cell) run_cell(cell);
  } else {
    const int nt = std::min<long>(threads, total);
    std::vector<std::thread> pool;
    for (int w = 0; w < nt; ++w)
      pool.emplace_back([&, w]() {
        for (long cell = w; cell < total; cell += nt) run_cell(cell);
      });
    for (auto& th : pool) th.join();
  }
  return out;
}

}  // namespace lodegp
