#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "lodegp/gp.hpp"
#include "oracle_data.hpp"

using namespace lodegp;

namespace {

PolyMatrix minimal_system() {
  PolyMatrix a(1, 2);
  a.at(0, 0) = Poly::parse("1");
  a.at(0, 1) = Poly::parse("Dt");
  return a;
}

const Theta kOracleTheta{{-0.5774}, {-0.6097}, {}};

Dataset steering_data() {
  Dataset d;
  DataPoint p0;
  p0.t = 0.0;
  p0.f = Eigen::Vector2d(1.0, 0.0);
  p0.noise_var = Eigen::Vector2d::Zero();
  DataPoint p1;
  p1.t = 1.0;
  p1.f = Eigen::Vector2d(0.0, 0.0);
  p1.noise_var = Eigen::Vector2d::Zero();
  d.points = {p0, p1};
  return d;
}

}  // namespace

TEST_CASE("theta layout round trips") {
  PolyMatrix tank(3, 5);
  const char* rows[3][5] = {{"-Dt", "0", "0", "1", "0"},
                            {"0", "-Dt", "0", "1", "1"},
                            {"0", "0", "-Dt", "0", "1"}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 5; ++j) tank.at(i, j) = Poly::parse(rows[i][j]);
  const LodeGP gp = build_lode_gp(tank, Theta{});
  CHECK(gp.spec.num_free() == 2);
  CHECK(gp.spec.num_finite() == 1);

  const Theta t{{0.1, 0.2}, {0.3, 0.4}, {0.5}};
  const std::vector<double> x = t.flatten();
  REQUIRE(x.size() == 5);
  // Interleaved (ell2, sigf2) pairs, then the uncontrollable variances.
  CHECK(x == std::vector<double>{0.1, 0.3, 0.2, 0.4, 0.5});
  const Theta back = Theta::unflatten(gp.spec, x);
  CHECK(back.log_ell2 == t.log_ell2);
  CHECK(back.log_sigf2 == t.log_sigf2);
  CHECK(back.log_sigu2 == t.log_sigu2);
  CHECK_THROWS_AS(Theta::unflatten(gp.spec, {1.0, 2.0}), validation_error);
  CHECK_THROWS_AS(kernel_for(gp, Theta{{0.0}, {0.0}, {}}), validation_error);
}

TEST_CASE("dataset validation") {
  Dataset d = steering_data();
  CHECK(d.num_scalars() == 4);
  d.points[0].noise_var(1) = -1.0;
  CHECK_THROWS_AS(d.validate(2), validation_error);
  d = steering_data();
  d.points[0].f(0) = std::nan("");
  CHECK_THROWS_AS(d.validate(2), validation_error);
  // A masked-out channel may hold garbage.
  d.points[0].mask = {false, true};
  CHECK_NOTHROW(d.validate(2));
  CHECK(d.num_scalars() == 3);
  d = steering_data();
  d.points[0].mask = {true};
  CHECK_THROWS_AS(d.validate(2), validation_error);
}

TEST_CASE("psd_solve basics") {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 4);
  const Eigen::VectorXd b = Eigen::Vector4d(1, -2, 3, 0.5);
  const PsdSolve s = psd_solve(id, b);
  CHECK((s.x.col(0) - b).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(s.logdet == doctest::Approx(0.0));
  CHECK(s.lambda_used == 0.0);

  Eigen::MatrixXd r = Eigen::MatrixXd::Random(8, 8);
  Eigen::MatrixXd spd = r * r.transpose() + Eigen::MatrixXd::Identity(8, 8);
  const Eigen::VectorXd rhs = Eigen::VectorXd::Random(8);
  const PsdSolve s2 = psd_solve(spd, rhs);
  CHECK((spd * s2.x.col(0) - rhs).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(s2.logdet == doctest::Approx(std::log(spd.determinant())).epsilon(1e-10));
}

TEST_CASE("psd_solve escalates jitter on rank deficiency") {
  const Eigen::Vector3d v(1.0, 2.0, -1.0);
  const Eigen::MatrixXd rank1 = v * v.transpose();
  const PsdSolve s = psd_solve(rank1, Eigen::MatrixXd(v));
  CHECK(s.lambda_used > 0.0);
  Eigen::MatrixXd shifted = rank1;
  shifted.diagonal().array() += s.lambda_used;
  CHECK((shifted * s.x.col(0) - v).cwiseAbs().maxCoeff() <= 1e-8);

  // The zero matrix can never be factored, whatever the ladder offers.
  CHECK_THROWS_AS(psd_solve(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 1)),
                  numerical_error);
}

TEST_CASE("gram against the frozen oracle") {
  const LodeGP gp = build_lode_gp(minimal_system(), kOracleTheta);
  std::vector<ObsCoord> coords;
  for (double t : {0.0, 1.0})
    for (int c = 0; c < 2; ++c) coords.emplace_back(t, c);
  const Eigen::MatrixXd g = gram_at(gp.kernel, coords);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(g(i, j) == doctest::Approx(oracle::kGram[i][j]).epsilon(1e-12));
}

TEST_CASE("marginal likelihood against the frozen oracle") {
  const LodeGP gp = build_lode_gp(minimal_system(), kOracleTheta);
  double lambda = -1.0;
  const double value = nll(gp, steering_data(), &lambda);
  CHECK(value == doctest::Approx(oracle::kNll).epsilon(1e-12));
  CHECK(lambda == 0.0);
}

TEST_CASE("nll closed forms for a single observation") {
  const LodeGP gp = build_lode_gp(minimal_system(), Theta{});
  Dataset d;
  DataPoint p;
  p.t = 0.0;
  p.f = Eigen::Vector2d(0.0, 0.7);
  p.noise_var = Eigen::Vector2d(0.0, 0.25);
  p.mask = {false, true};
  d.points = {p};
  const double k00 = gp.kernel.at(1, 1).eval(0.0, 0.0);
  const double var = k00 + 0.25;
  CHECK(nll(gp, d) ==
        doctest::Approx(0.5 * 0.7 * 0.7 / var + 0.5 * std::log(var)).epsilon(1e-12));

  d.points[0].f(1) = 0.0;
  CHECK(nll(gp, d) == doctest::Approx(0.5 * std::log(var)).epsilon(1e-12));
}

TEST_CASE("posterior interpolates and reverts") {
  const LodeGP gp = build_lode_gp(minimal_system(), kOracleTheta);
  const Dataset data = steering_data();
  const Posterior post = posterior(gp, data, {0.0, 1.0});
  CHECK(std::abs(post.mean(0, 0) - 1.0) <= 1e-6);
  CHECK(std::abs(post.mean(0, 1)) <= 1e-6);
  CHECK(std::abs(post.mean(1, 0)) <= 1e-6);
  CHECK(std::abs(post.mean(1, 1)) <= 1e-6);
  CHECK(post.std.cwiseAbs().maxCoeff() <= 1e-6);

  // Far from the data the process forgets the conditioning.
  const double far = 1.0 + 10.0 * std::sqrt(std::exp(-0.5774));
  const Posterior faraway = posterior(gp, data, {far});
  for (int c = 0; c < 2; ++c) {
    const double prior_std = std::sqrt(gp.kernel.at(c, c).eval(far, far));
    CHECK(std::abs(faraway.std(0, c) - prior_std) <= 1e-3 * prior_std);
    CHECK(std::abs(faraway.mean(0, c)) <= 1e-2);
  }
}

TEST_CASE("posterior against the frozen oracle") {
  const LodeGP gp = build_lode_gp(minimal_system(), kOracleTheta);
  const Posterior post = posterior(gp, steering_data(), {0.25, 0.5, 1.5});
  const double* means[3] = {oracle::kMean025, oracle::kMean05, oracle::kMean15};
  const double* stds[3] = {oracle::kStd025, oracle::kStd05, oracle::kStd15};
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 2; ++c) {
      CHECK(post.mean(i, c) == doctest::Approx(means[i][c]).epsilon(1e-9));
      CHECK(post.std(i, c) == doctest::Approx(stds[i][c]).epsilon(1e-7));
    }
}

TEST_CASE("single-point posterior closed form") {
  const LodeGP gp = build_lode_gp(minimal_system(), Theta{});
  Dataset d;
  DataPoint p;
  p.t = 0.0;
  p.f = Eigen::Vector2d(0.0, 2.0);
  p.noise_var = Eigen::Vector2d::Zero();
  p.mask = {false, true};
  d.points = {p};
  const Posterior post = posterior(gp, d, {0.6});
  const double k00 = gp.kernel.at(1, 1).eval(0.0, 0.0);
  const double ks = gp.kernel.at(1, 1).eval(0.6, 0.0);
  CHECK(post.mean(0, 1) == doctest::Approx(ks / k00 * 2.0).epsilon(1e-12));
  const double kc = gp.kernel.at(0, 1).eval(0.6, 0.0);
  CHECK(post.mean(0, 0) == doctest::Approx(kc / k00 * 2.0).epsilon(1e-12));
}

TEST_CASE("posterior is invariant to observation order") {
  const LodeGP gp = build_lode_gp(minimal_system(), kOracleTheta);
  Dataset d = steering_data();
  DataPoint mid;
  mid.t = 0.5;
  mid.f = Eigen::Vector2d(0.4, 0.0);
  mid.noise_var = Eigen::Vector2d::Zero();
  mid.mask = {true, false};
  d.points.push_back(mid);

  Dataset shuffled;
  shuffled.points = {d.points[2], d.points[0], d.points[1]};

  const std::vector<double> ts = {0.1, 0.35, 0.7, 0.9};
  const Posterior a = posterior(gp, d, ts);
  const Posterior b = posterior(gp, shuffled, ts);
  CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((a.std - b.std).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("base change certification") {
  const PolyMatrix a = minimal_system();

  // The canonical relation column scaled by a constant is still exact.
  PolyMatrix ok(2, 2);
  ok.at(0, 0) = Poly::parse("2");
  ok.at(0, 1) = Poly::parse("-Dt");
  ok.at(1, 0) = Poly::parse("0");
  ok.at(1, 1) = Poly::parse("1");
  CHECK_NOTHROW(build_lode_gp(a, Theta{}, &ok));

  // The identity feeds Dt into the free channel: not a solution map.
  const PolyMatrix id = PolyMatrix::identity(2);
  CHECK_THROWS_AS(build_lode_gp(a, Theta{}, &id), validation_error);

  // Non-constant determinant.
  PolyMatrix sing(2, 2);
  sing.at(0, 0) = Poly::parse("Dt");
  sing.at(1, 1) = Poly::parse("1");
  CHECK_THROWS_AS(build_lode_gp(a, Theta{}, &sing), validation_error);

  // Wrong shape.
  PolyMatrix rect(2, 3);
  CHECK_THROWS_AS(build_lode_gp(a, Theta{}, &rect), validation_error);
}

TEST_CASE("training respects bounds, freezes, and is deterministic") {
  const LodeGP gp = build_lode_gp(minimal_system(), kOracleTheta);
  const Dataset data = steering_data();

  TrainOptions opt;
  opt.restarts = 2;
  opt.max_iters = 400;
  const TrainResult r1 = train(gp, data, kOracleTheta, opt);
  const TrainResult r2 = train(gp, data, kOracleTheta, opt);
  CHECK(r1.theta.flatten() == r2.theta.flatten());
  CHECK(r1.nll == r2.nll);
  CHECK(r1.nll <= nll(gp, data));

  const TrainBounds bounds;
  const auto x = r1.theta.flatten();
  for (size_t i = 0; i < x.size(); ++i) {
    const auto [lo, hi] = bounds.at(gp.spec, static_cast<int>(i));
    CHECK(x[i] >= lo);
    CHECK(x[i] <= hi);
  }

  // Freezing the lengthscale pins it to the initial value exactly.
  opt.freeze = {true, false};
  const TrainResult rf = train(gp, data, kOracleTheta, opt);
  CHECK(rf.theta.log_ell2[0] == -0.5774);

  // A frozen-variance scan cannot beat the trained value on its own axis.
  double best_scan = 1e300;
  for (int i = 0; i <= 40; ++i) {
    Theta t = kOracleTheta;
    t.log_sigf2[0] = -6.0 + 10.0 * i / 40.0;
    LodeGP cand = gp;
    cand.theta = t;
    cand.kernel = kernel_for(gp, t);
    best_scan = std::min(best_scan, nll(cand, data));
  }
  CHECK(rf.nll <= best_scan + 1e-9);

  opt.freeze = {true};
  CHECK_THROWS_AS(train(gp, data, kOracleTheta, opt), validation_error);
}

TEST_CASE("objective grid enumerates cells in declared order") {
  const LodeGP gp = build_lode_gp(minimal_system(), kOracleTheta);
  const Dataset data = steering_data();
  const std::vector<GridAxis> axes = {{-2.0, 0.0, 3}, {-1.0, 0.0, 2}};
  const GridResult g = nll_grid(gp, data, axes);
  REQUIRE(g.nll.size() == 6);
  int cell = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) {
      Theta t;
      t.log_ell2 = {axes[0].point(i)};
      t.log_sigf2 = {axes[1].point(j)};
      LodeGP cand = gp;
      cand.theta = t;
      cand.kernel = kernel_for(gp, t);
      CHECK(g.nll[cell++] == doctest::Approx(nll(cand, data)).epsilon(1e-12));
    }

  const GridResult g2 = nll_grid(gp, data, axes, 3);
  for (size_t i = 0; i < g.nll.size(); ++i) CHECK(g.nll[i] == g2.nll[i]);

  CHECK_THROWS_AS(nll_grid(gp, data, {{0.0, 1.0, 2}}), validation_error);
}
