#!/usr/bin/env python3
"""Regenerates the frozen numeric constants asserted by the unit tests.

Run from the repository root:

    python3 tools/oracles.py

Every value is derived with sympy and numpy, independently of the C++
implementation, and printed with full float precision. Tests freeze these
numbers with a 1e-12 relative tolerance to absorb libm rounding differences.
"""

import numpy as np
import sympy as sp


def integrator_example():
    """Two-channel system x1 + dx2/dt = 0 conditioned at t in {0, 1}.

    The constrained covariance couples an unobservable squared-exponential
    potential into both channels: channel 1 carries the potential itself and
    channel 0 its negated derivative.
    """
    t1, t2 = sp.symbols("t1 t2")
    ell2 = sp.exp(sp.Float("-0.5774", 30))
    sigf2 = sp.exp(sp.Float("-0.6097", 30))
    k = sigf2 * sp.exp(-((t1 - t2) ** 2) / (2 * ell2))
    kmat = [
        [sp.diff(k, t1, t2), -sp.diff(k, t1)],
        [-sp.diff(k, t2), k],
    ]

    def kval(ci, cj, ti, tj):
        return float(kmat[ci][cj].subs({t1: ti, t2: tj}).evalf(30))

    coords = [(0.0, 0), (0.0, 1), (1.0, 0), (1.0, 1)]
    n = len(coords)
    gram = np.array([[kval(ci, cj, ti, tj) for (tj, cj) in coords] for (ti, ci) in coords])
    f = np.array([1.0, 0.0, 0.0, 0.0])
    alpha = np.linalg.solve(gram, f)
    _, logdet = np.linalg.slogdet(gram)
    nll = 0.5 * f @ alpha + 0.5 * logdet
    rkhs = float(np.sqrt(f @ alpha))

    print("== integrator example ==")
    print("gram rows:")
    for row in gram:
        print("  " + ", ".join(repr(float(x)) for x in row))
    print("nll  =", repr(float(nll)))
    print("rkhs =", repr(rkhs))
    for ts in (0.25, 0.5, 1.5):
        ks = np.array([[kval(c, cj, ts, tj) for (tj, cj) in coords] for c in range(2)])
        kss = np.array([[kval(a, b, ts, ts) for b in range(2)] for a in range(2)])
        mean = ks @ alpha
        cov = kss - ks @ np.linalg.solve(gram, ks.T)
        std = np.sqrt(np.maximum(np.diag(cov), 0.0))
        print(f"mean({ts}) =", repr(float(mean[0])), repr(float(mean[1])))
        print(f"std({ts})  =", repr(float(std[0])), repr(float(std[1])))


def polynomial_examples():
    x = sp.symbols("x")
    q, r = sp.div(sp.Rational(3, 2) * x**3 - x + 2, x**2 + 1, x)
    print("== polynomial division ==")
    print("(3/2 x^3 - x + 2) / (x^2 + 1): q =", q, " r =", r)
    g = sp.gcd((x - 1) ** 2 * (x + 2), (x - 1) * (x + 3))
    print("gcd((x-1)^2 (x+2), (x-1)(x+3)) =", sp.monic(g, x))


def root_examples():
    print("== roots ==")
    x = sp.symbols("x")
    for poly in (x**2 + x + 1, (x + 1) ** 2 * (x - 2), x**3 - 1):
        roots = sp.roots(poly, x)
        printable = {complex(sp.N(root, 20)): mult for root, mult in roots.items()}
        print(poly, "->", printable)


def derivative_spot_values():
    print("== derivative spot values ==")
    t1, t2 = sp.symbols("t1 t2")
    k = sp.exp(-((t1 - t2) ** 2) / 2)
    print("d/dt1 exp(-(t1-t2)^2/2) at (1,0) =", repr(float(sp.diff(k, t1).subs({t1: 1, t2: 0}))))
    damped = (1 + t1 * t2) * sp.exp(-(t1 + t2)) * sp.cos(2 * (t1 - t2))
    print("(1+t1 t2) e^-(t1+t2) cos(2(t1-t2)) at (0.3,0.7) =",
          repr(float(damped.subs({t1: sp.Float("0.3", 30), t2: sp.Float("0.7", 30)}).evalf(30))))
    print("its d/dt1 at (0.3,0.7) =",
          repr(float(sp.diff(damped, t1).subs({t1: sp.Float("0.3", 30), t2: sp.Float("0.7", 30)}).evalf(30))))


if __name__ == "__main__":
    integrator_example()
    polynomial_examples()
    root_examples()
    derivative_spot_values()
