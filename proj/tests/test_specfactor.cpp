#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lodegp/diagspec.hpp"
#include "oracle_data.hpp"

using namespace lodegp;

TEST_CASE("roots of simple polynomials") {
  // Dt^2 + Dt + 1: conjugate pair at -1/2 +- sqrt(3)/2 i.
  const auto roots = find_roots(Poly::parse("Dt^2 + Dt + 1"));
  REQUIRE(roots.size() == 2);
  for (const auto& r : roots) {
    CHECK(r.multiplicity == 1);
    CHECK(r.root.real() == doctest::Approx(oracle::kQuadRootRe).epsilon(1e-10));
    CHECK(std::abs(r.root.imag()) == doctest::Approx(oracle::kQuadRootIm).epsilon(1e-10));
  }

  // (Dt + 1)^2 (Dt - 2): double root at -1 recovered by clustering.
  const Poly p = Poly::parse("Dt + 1") * Poly::parse("Dt + 1") * Poly::parse("Dt - 2");
  auto rs = find_roots(p);
  REQUIRE(rs.size() == 2);
  std::sort(rs.begin(), rs.end(),
            [](const RootCluster& a, const RootCluster& b) { return a.root.real() < b.root.real(); });
  CHECK(rs[0].multiplicity == 2);
  CHECK(rs[0].root.real() == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(rs[1].multiplicity == 1);
  CHECK(rs[1].root.real() == doctest::Approx(2.0).epsilon(1e-10));

  CHECK_THROWS(find_roots(Poly(Rational(3))));
  CHECK_THROWS(find_roots(Poly()));
}

TEST_CASE("multiplicities always sum to the degree") {
  const char* polys[] = {"Dt^3 - 1", "Dt^4", "Dt^2 - 2*Dt + 1", "2*Dt^5 + Dt + 1"};
  for (const char* s : polys) {
    const Poly p = Poly::parse(s);
    const auto rs = find_roots(p);
    int total = 0;
    for (const auto& r : rs) {
      total += r.multiplicity;
      const auto val = p.eval(r.root);
      CHECK(std::abs(val) <= 1e-6 * (1.0 + std::abs(r.root)));
    }
    CHECK(total == p.degree());
  }
}

TEST_CASE("conjugate pairing") {
  const auto rs = find_roots(Poly::parse("Dt^3 - 1"));
  const auto fs = pair_conjugates(rs);
  REQUIRE(fs.size() == 2);
  // Sorted by growth rate: the pair at -1/2 precedes the real root at 1.
  CHECK(fs[0].a == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(fs[0].b == doctest::Approx(oracle::kQuadRootIm).epsilon(1e-10));
  CHECK(fs[0].j == 1);
  CHECK(fs[1].a == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fs[1].b == 0.0);
  CHECK(fs[1].j == 1);

  // A lone complex root has no partner.
  CHECK_THROWS(pair_conjugates({RootCluster{{0.0, 1.0}, 1}}));
  // Conjugates with unequal multiplicity cannot pair.
  CHECK_THROWS(pair_conjugates({RootCluster{{0.0, 1.0}, 2}, RootCluster{{0.0, -1.0}, 1}}));
}

TEST_CASE("diagonal classification") {
  PolyMatrix d(1, 2);
  d.at(0, 0) = Poly(Rational(1));
  const DiagonalSpec one_free = analyze_diagonal(d);
  REQUIRE(one_free.channels.size() == 2);
  CHECK(one_free.channels[0].kind == ChannelKind::unit);
  CHECK(one_free.channels[1].kind == ChannelKind::free);
  CHECK(one_free.num_free() == 1);
  CHECK(one_free.num_finite() == 0);
  CHECK(one_free.q == 0);

  PolyMatrix d2(3, 5);
  d2.at(0, 0) = Poly(Rational(1));
  d2.at(1, 1) = Poly(Rational(1));
  d2.at(2, 2) = Poly::dt(1);
  const DiagonalSpec spec = analyze_diagonal(d2);
  REQUIRE(spec.channels.size() == 5);
  CHECK(spec.channels[2].kind == ChannelKind::finite);
  REQUIRE(spec.channels[2].factors.size() == 1);
  CHECK(spec.channels[2].factors[0].a == 0.0);
  CHECK(spec.channels[2].factors[0].b == 0.0);
  CHECK(spec.channels[2].factors[0].j == 1);
  CHECK(spec.channels[3].kind == ChannelKind::free);
  CHECK(spec.channels[4].kind == ChannelKind::free);
  CHECK(spec.q == 1);

  // A conjugate pair of multiplicity 2 contributes 4 basis functions.
  PolyMatrix d3(1, 1);
  const Poly quad = Poly::parse("Dt^2 + Dt + 1");
  d3.at(0, 0) = quad * quad;
  CHECK(analyze_diagonal(d3).q == 4);
}

TEST_CASE("channel kernels") {
  const Channel unit{ChannelKind::unit, Poly(Rational(1)), {}};
  CHECK(base_kernel(unit, {}).is_zero());

  Channel free{ChannelKind::free, Poly(), {}};
  ChannelHyperparams hp;
  hp.lengthscale_sq = 1.0;
  hp.signal_var = 1.0;
  const KernelExpr se = base_kernel(free, hp);
  CHECK(se.eval(1.0, 0.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(se.eval(0.3, 0.3) == doctest::Approx(1.0).epsilon(1e-14));
  hp.signal_var = 2.5;
  CHECK(base_kernel(free, hp).eval(1.0, 0.0) ==
        doctest::Approx(2.5 * std::exp(-0.5)).epsilon(1e-14));

  // Exponential channel, single real root a: k = e^{a(t1+t2)}.
  Channel expo{ChannelKind::finite, Poly::parse("Dt + 1"), {RootFactor{-1.0, 0.0, 1}}};
  ChannelHyperparams hu;
  hu.uncontrollable_var = 1.0;
  CHECK(base_kernel(expo, hu).eval(0.5, 0.25) == doctest::Approx(std::exp(-0.75)).epsilon(1e-14));

  // Oscillator pair (a=0, b=1): k = cos(t1 - t2); antiphase gives -1.
  Channel osc{ChannelKind::finite, Poly::parse("Dt^2 + 1"), {RootFactor{0.0, 1.0, 1}}};
  const KernelExpr kosc = base_kernel(osc, hu);
  CHECK(kosc.eval(3.14159265358979312, 0.0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(kosc.eval(0.7, 0.7) == doctest::Approx(1.0).epsilon(1e-14));

  // Damped pair with a repeated root: (1 + t1 t2) e^{-(t1+t2)} cos(2(t1-t2)).
  Channel damped{ChannelKind::finite, Poly(), {RootFactor{-1.0, 2.0, 2}}};
  CHECK(base_kernel(damped, hu).eval(0.3, 0.7) ==
        doctest::Approx(oracle::kDampedVal).epsilon(1e-12));

  // The variance scales the whole channel; zero switches it off.
  hu.uncontrollable_var = 2.0;
  CHECK(base_kernel(damped, hu).eval(0.3, 0.7) ==
        doctest::Approx(2.0 * oracle::kDampedVal).epsilon(1e-12));
  hu.uncontrollable_var = 0.0;
  CHECK(base_kernel(damped, hu).eval(0.3, 0.7) == 0.0);
}

TEST_CASE("channel kernels are symmetric") {
  ChannelHyperparams hp;
  hp.lengthscale_sq = 0.7;
  hp.signal_var = 1.3;
  hp.uncontrollable_var = 0.9;
  const Channel chans[] = {
      Channel{ChannelKind::free, Poly(), {}},
      Channel{ChannelKind::finite, Poly(), {RootFactor{-0.5, 0.0, 2}}},
      Channel{ChannelKind::finite, Poly(), {RootFactor{0.25, 1.5, 1}, RootFactor{-1.0, 0.0, 1}}},
  };
  const double pts[] = {-0.8, 0.0, 0.45, 1.7};
  for (const auto& ch : chans) {
    const KernelExpr k = base_kernel(ch, hp);
    for (double s : pts)
      for (double t : pts)
        CHECK(k.eval(s, t) == doctest::Approx(k.eval(t, s)).epsilon(1e-12));
  }
}

TEST_CASE("factor reconstruction guards bad tolerances") {
  PolyMatrix d(1, 1);
  d.at(0, 0) = Poly::parse("Dt^2 + 1");
  const DiagonalSpec spec = analyze_diagonal(d);
  REQUIRE(spec.channels[0].factors.size() == 1);
  CHECK(spec.channels[0].factors[0].b == doctest::Approx(1.0).epsilon(1e-10));

  // An absurd clustering tolerance merges distinct roots; reconstruction
  // must notice and refuse.
  PolyMatrix far(1, 1);
  far.at(0, 0) = Poly::parse("Dt^2 - 1");  // roots at -1 and 1
  CHECK_THROWS(analyze_diagonal(far, 5.0));
}
