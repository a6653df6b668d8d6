"""Equilibrium measure of a logarithmic gas under an external potential:
support endpoints, density via a principal-value integral, and the
local-universality condition report.

For point-charge potentials the two singular endpoint equations reduce to
exact algebraic sums over the charges; for analytic potentials the
Chebyshev-Gauss rule absorbs the endpoint square roots. The conventions
match an external potential V with equilibrium energy
int int log|s-t|^-1 dnu dnu + int V dnu; the local-universality dictionary
uses Q = V/2.
"""

import math
from dataclasses import dataclass

import numpy as np

from .orthopoly import density as op_density

__all__ = [
    "PotentialSpec",
    "SupportInterval",
    "solve_endpoints",
    "equilibrium_density",
    "levin_lubinsky_report",
]


@dataclass(frozen=True)
class PotentialSpec:
    """External potential: point charges (double log charges at the rescaled
    externals, scaled by 2/n) or an analytic V' on an interval."""

    kind: str
    roots: np.ndarray = None
    n: int = None
    vprime: object = None
    domain: tuple = (-1.0, 1.0)
    convexity_hint: bool = True

    def __post_init__(self):
        if self.kind == "pointcharge":
            if self.roots is None or self.n is None:
                raise ValueError("pointcharge potential needs roots and n")
            roots = np.asarray(self.roots, dtype=float)
            if roots.size and np.min(np.abs(roots)) < 1.0 - 1e-12:
                raise ValueError("pointcharge roots must satisfy |y| >= 1")
            object.__setattr__(self, "roots", roots)
        elif self.kind == "analytic":
            if self.vprime is None:
                raise ValueError("analytic potential needs a vprime callable")
        else:
            raise ValueError(f"unknown potential kind {self.kind!r}")

    @classmethod
    def from_weight(cls, weight):
        return cls(kind="pointcharge", roots=weight.roots, n=weight.n)

    def vprime_at(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "pointcharge":
            return -(2.0 / self.n) * np.sum(1.0 / (s[..., None] - self.roots), axis=-1)
        return np.asarray([self.vprime(v) for v in np.atleast_1d(s)], dtype=float).reshape(s.shape)


@dataclass(frozen=True)
class SupportInterval:
    a: float
    b: float
    residuals: tuple


def _pointcharge_system(roots, n, a, b):
    """The two endpoint equations and their Jacobian for point charges.

    F1 = (1/n) [sum_(y<a) P^-1/2 - sum_(y>b) P^-1/2]
    F2 = (1/n) [sum_k sigma_k y_k P_k^-1/2 + M] + 1,  P_k = (a-y_k)(b-y_k)
    with sigma_k = +1 for y_k < a and -1 for y_k > b.
    """
    left = roots[roots < a]
    right = roots[roots > b]
    pl = (a - left) * (b - left)
    pr = (a - right) * (b - right)
    if np.any(pl <= 0) or np.any(pr <= 0):
        return None, None
    sl = pl**-0.5
    sr = pr**-0.5
    f1 = (np.sum(sl) - np.sum(sr)) / n
    f2 = (np.sum(left * sl) - np.sum(right * sr) + len(roots)) / n + 1.0

    # d(P^-1/2)/da = -(b-y)/(2 P^(3/2)), d/db = -(a-y)/(2 P^(3/2))
    dl_da = -0.5 * (b - left) * pl**-1.5
    dl_db = -0.5 * (a - left) * pl**-1.5
    dr_da = -0.5 * (b - right) * pr**-1.5
    dr_db = -0.5 * (a - right) * pr**-1.5
    j11 = (np.sum(dl_da) - np.sum(dr_da)) / n
    j12 = (np.sum(dl_db) - np.sum(dr_db)) / n
    j21 = (np.sum(left * dl_da) - np.sum(right * dr_da)) / n
    j22 = (np.sum(left * dl_db) - np.sum(right * dr_db)) / n
    return np.array([f1, f2]), np.array([[j11, j12], [j21, j22]])


def _chebyshev_nodes(a, b, m):
    theta = (np.arange(m) + 0.5) * math.pi / m
    return (a + b) / 2.0 + (b - a) / 2.0 * np.cos(theta)


def _analytic_system(pot, a, b, m=400):
    """Endpoint equations by Chebyshev-Gauss quadrature (weight absorbed)."""
    s = _chebyshev_nodes(a, b, m)
    v = pot.vprime_at(s)
    f1 = float(np.mean(v))                      # (1/pi) int V'/sqrt(...) ds
    f2 = float(np.mean(v * s) / 2.0 - 1.0)      # (1/2pi) int V' s/sqrt(...) ds - 1
    return np.array([f1, f2])


def solve_endpoints(pot, tol=1e-12, max_iter=200):
    """Support endpoints (a, b) of the equilibrium measure by damped Newton.

    Point-charge systems use the exact algebraic equations with an analytic
    Jacobian; analytic potentials use quadrature residuals with a finite-
    difference Jacobian. Initialization hugs the interval ends.
    """
    if pot.kind == "pointcharge":
        n = pot.n
        a, b = -1.0 + 1.0 / (2.0 * n), 1.0 - 1.0 / (2.0 * n)
        lo, hi = -1.0, 1.0
        f, jac = _pointcharge_system(pot.roots, n, a, b)
        for _ in range(max_iter):
            step = np.linalg.solve(jac, f)
            scale = 1.0
            resid = float(np.max(np.abs(f)))
            for _ in range(60):
                an, bn = a - scale * step[0], b - scale * step[1]
                an = min(max(an, lo + 1e-14), b - 1e-13)
                bn = max(min(bn, hi - 1e-14), a + 1e-13)
                fn, jn = _pointcharge_system(pot.roots, n, an, bn)
                if fn is not None and float(np.max(np.abs(fn))) <= resid * (1.0 + 1e-12):
                    break
                scale *= 0.5
            else:
                raise RuntimeError("endpoint Newton iteration could not be damped into the bracket")
            a, b, f, jac = an, bn, fn, jn
            if float(np.max(np.abs(f))) < tol:
                return SupportInterval(a=a, b=b, residuals=(float(f[0]), float(f[1])))
        raise RuntimeError("endpoint Newton iteration did not converge")

    lo, hi = pot.domain
    span = hi - lo
    a, b = lo + 0.05 * span, hi - 0.05 * span
    f = _analytic_system(pot, a, b)
    for _ in range(max_iter):
        h = 1e-7 * span
        ja = (_analytic_system(pot, a + h, b) - _analytic_system(pot, a - h, b)) / (2 * h)
        jb = (_analytic_system(pot, a, b + h) - _analytic_system(pot, a, b - h)) / (2 * h)
        jac = np.column_stack([ja, jb])
        step = np.linalg.solve(jac, f)
        scale = 1.0
        resid = float(np.max(np.abs(f)))
        for _ in range(60):
            an, bn = a - scale * step[0], b - scale * step[1]
            bn = max(bn, an + 1e-12)
            fn = _analytic_system(pot, an, bn)
            if float(np.max(np.abs(fn))) <= resid * (1.0 + 1e-12):
                break
            scale *= 0.5
        else:
            raise RuntimeError("endpoint Newton iteration could not be damped")
        a, b, f = an, bn, fn
        if float(np.max(np.abs(f))) < tol:
            return SupportInterval(a=float(a), b=float(b), residuals=(float(f[0]), float(f[1])))
    raise RuntimeError("endpoint Newton iteration did not converge")


def equilibrium_density(pot, support, x, m=800):
    """Density g(x) of the equilibrium measure at an interior point.

    g(x) = (1/2 pi^2) sqrt((x-a)(b-x)) PV int_a^b V'(s)/((s-x) sqrt(...)) ds,
    evaluated by singularity subtraction: the subtracted principal-value
    integral of 1/((s-x) sqrt(...)) vanishes identically on (a, b), and
    Chebyshev-Gauss nodes absorb the endpoint square roots.
    """
    a, b = support.a, support.b
    x = float(x)
    if not (a + 1e-8 < x < b - 1e-8):
        raise ValueError("x must lie strictly inside the support")
    s = _chebyshev_nodes(a, b, m)
    if pot.kind == "pointcharge":
        # [V'(s) - V'(x)]/(s - x) = (2/n) sum_k 1/((x - y_k)(s - y_k))
        dd = (2.0 / pot.n) * np.sum(
            1.0 / ((x - pot.roots)[None, :] * (s[:, None] - pot.roots)), axis=1
        )
    else:
        vs = pot.vprime_at(s)
        vx = float(pot.vprime_at(np.array([x]))[0])
        ds = s - x
        h = 1e-6 * (b - a)
        vpp = (pot.vprime_at(np.array([x + h]))[0] - pot.vprime_at(np.array([x - h]))[0]) / (2 * h)
        dd = np.where(np.abs(ds) > 1e-9 * (b - a), (vs - vx) / np.where(ds == 0, 1.0, ds), vpp)
    pv = math.pi * float(np.mean(dd))
    return math.sqrt(max((x - a) * (b - x), 0.0)) * pv / (2.0 * math.pi**2)


def equilibrium_mass(pot, support, m=400, outer=200):
    """int_a^b g by the same Chebyshev rule (sanity value, ~1)."""
    a, b = support.a, support.b
    s = _chebyshev_nodes(a, b, outer)
    r = (b - a) / 2.0
    theta = (np.arange(outer) + 0.5) * math.pi / outer
    g = np.array([equilibrium_density(pot, support, v, m) for v in s])
    return float(np.sum(g * r * np.sin(theta)) * math.pi / outer)


def levin_lubinsky_report(pot, support, rec, weight, J, grid_points=41):
    """Desk-scale report of the four local-universality conditions on J.

    (a) min/max of the equilibrium density g on a J-covering grid;
    (b) modulus of continuity of Q' = V'/2 at grid resolution;
    (c) min/max of the kernel density rho_n on J;
    (d) max over E in J, |x| <= 3 of |rho_n(E)/rho_n(E + x/n) - 1|.
    """
    a, b = support.a, support.b
    j_lo, j_hi = J
    if not (a < j_lo < j_hi < b):
        raise ValueError("J must be interior to the support")
    grid = np.linspace(j_lo, j_hi, grid_points)
    g = np.array([equilibrium_density(pot, support, x) for x in grid])
    qprime = pot.vprime_at(grid) / 2.0
    modulus = float(np.max(np.abs(np.diff(qprime)))) if len(grid) > 1 else 0.0
    n = weight.n
    rho = op_density(rec, weight, n, grid)
    offsets = np.linspace(-3.0, 3.0, 13)
    shifted = grid[:, None] + offsets[None, :] / n
    shifted = np.clip(shifted, -1.0, 1.0)
    rho_shift = op_density(rec, weight, n, shifted.ravel()).reshape(shifted.shape)
    cond_d = float(np.max(np.abs(rho[:, None] / rho_shift - 1.0)))
    return {
        "a": float(support.a),
        "b": float(support.b),
        "residuals": [float(r) for r in support.residuals],
        "ll_conditions": {
            "a": {"min": float(np.min(g)), "max": float(np.max(g))},
            "b": modulus,
            "c": {"min": float(np.min(rho)), "max": float(np.max(rho))},
            "d": cond_d,
        },
    }
