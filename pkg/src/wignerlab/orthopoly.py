"""Orthonormal polynomials for the varying polynomial weight
w = prod_k (x - y_k)^2 on [-1, 1]: recurrence construction, the
Christoffel-Darboux kernel, densities, determinantal correlations, and the
consistency identities that tie them together.

The weight is a polynomial, so every inner product is computed with an
exact-degree Gauss-Legendre rule; orthonormality residuals are then
rounding-limited. Weight values always enter through exp(log-sum) with the
WeightSpec's additive normalizer, which cancels in all orthonormal
quantities. Polynomial recurrences run directly on the weighted functions
psi_j = p_j sqrt(w), which stay O(1) where p_j alone would overflow.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Quadrature",
    "build_quadrature",
    "Recurrence",
    "stieltjes_recurrence",
    "recurrence_node_doubling_gap",
    "eval_psi",
    "KernelEval",
    "cd_kernel",
    "kernel_matrix",
    "density",
    "correlation",
    "density_derivative",
    "stieltjes_identity_residual",
    "derivative_norm_checks",
]

NEAR_DIAGONAL = 1e-6  # |x - y| below this switches the kernel to the direct sum


@dataclass(frozen=True)
class Quadrature:
    """Gauss-Legendre rule on [-1, 1], exact through ``exact_degree``."""

    nodes: np.ndarray
    weights: np.ndarray
    exact_degree: int


def build_quadrature(weight, order, margin=8):
    """Rule exact for every moment integral p_i p_j w with i, j <= order.

    The weight has polynomial degree 2M (M roots of multiplicity 2), so the
    required exactness is 2M + 2*order; node count grows linearly in M.
    """
    m = len(weight.roots)
    count = (2 * m + 2 * order) // 2 + 1 + margin
    nodes, wts = np.polynomial.legendre.leggauss(count)
    return Quadrature(nodes=nodes, weights=wts, exact_degree=2 * count - 1)


@dataclass(frozen=True)
class Recurrence:
    """Jacobi coefficients of the orthonormal polynomials for one weight.

    ``alpha[j]`` is the diagonal coefficient a_j and ``beta[j]`` the
    off-diagonal b_(j+1) coupling degrees j and j+1, so that
    x p_j = beta[j] p_(j+1) + alpha[j] p_j + beta[j-1] p_(j-1).
    ``mass`` is the square root of the total weight integral (p_0 = 1/mass).
    """

    alpha: np.ndarray
    beta: np.ndarray
    mass: float
    max_degree: int

    def __post_init__(self):
        if np.any(self.beta <= 0):
            raise ValueError("off-diagonal recurrence coefficients must be positive")


def _normalized_weights(weight, quad):
    """Quadrature weights times the normalized polynomial weight."""
    logw = weight.log_weight(quad.nodes) - weight.log_shift
    return quad.weights * np.exp(logw)


def stieltjes_recurrence(weight, quad, max_degree):
    """Recurrence coefficients by the discrete Stieltjes procedure.

    Orthonormalizes degree by degree against the quadrature inner product;
    raises on loss of positivity in a beta (the symptom of an inexact rule
    or weight underflow).
    """
    if quad.exact_degree < 2 * len(weight.roots) + 2 * max_degree:
        raise ValueError("quadrature not exact for the needed moments")
    x = quad.nodes
    wts = _normalized_weights(weight, quad)
    mass_sq = float(np.sum(wts))
    if not mass_sq > 0:
        raise FloatingPointError("weight underflowed on the quadrature nodes")
    mass = math.sqrt(mass_sq)
    p_prev = np.zeros_like(x)
    p = np.full_like(x, 1.0 / mass)
    alpha = np.empty(max_degree)
    beta = np.empty(max_degree)
    b_prev = 0.0
    for j in range(max_degree):
        a_j = float(np.sum(wts * x * p * p))
        q = (x - a_j) * p - b_prev * p_prev
        b_sq = float(np.sum(wts * q * q))
        if not b_sq > 0 or not np.isfinite(b_sq):
            raise FloatingPointError(f"loss of positivity in beta at degree {j + 1}")
        b = math.sqrt(b_sq)
        alpha[j] = a_j
        beta[j] = b
        p_prev, p = p, q / b
        b_prev = b
    return Recurrence(alpha=alpha, beta=beta, mass=mass, max_degree=max_degree)


def recurrence_node_doubling_gap(weight, max_degree):
    """Self-consistency guard: recurrence drift when the node count doubles."""
    quad1 = build_quadrature(weight, max_degree)
    quad2 = build_quadrature(weight, max_degree, margin=8 + len(quad1.nodes))
    r1 = stieltjes_recurrence(weight, quad1, max_degree)
    r2 = stieltjes_recurrence(weight, quad2, max_degree)
    return float(np.max(np.abs(r1.alpha - r2.alpha)) + np.max(np.abs(r1.beta - r2.beta)))


def _psi_table(rec, weight, degree, x):
    """psi_0..psi_degree at points x, shape (degree + 1, len(x)).

    Runs the three-term recurrence directly on psi_j = p_j sqrt(w)
    (normalized), which is the numerically bounded object.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if degree > rec.max_degree:
        raise ValueError("degree exceeds the built recurrence")
    with np.errstate(over="ignore"):
        sqw = np.exp(0.5 * (np.asarray(weight.log_weight(x)) - weight.log_shift))
    table = np.empty((degree + 1, len(x)))
    table[0] = sqw / rec.mass
    if degree >= 1:
        table[1] = (x - rec.alpha[0]) * table[0] / rec.beta[0]
    for j in range(1, degree):
        table[j + 1] = ((x - rec.alpha[j]) * table[j] - rec.beta[j - 1] * table[j - 1]) / rec.beta[j]
    return table


def eval_psi(rec, weight, j, x):
    """Weighted orthonormal function psi_j(x) = p_j(x) exp(-n U(x) / 2)."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.abs(x_arr) > 1.0):
        raise ValueError("evaluation points must lie in [-1, 1]")
    vals = _psi_table(rec, weight, j, x_arr)[j]
    return vals if np.ndim(x) else float(vals[0])


@dataclass(frozen=True)
class KernelEval:
    n: int
    x: float
    y: float
    value: float


def cd_kernel(rec, weight, n, x, y):
    """Order-n reproducing kernel via the Christoffel-Darboux form.

    Near the diagonal (|x - y| < 1e-6) the direct sum of psi_j(x) psi_j(y)
    replaces the cancellation-prone quotient.
    """
    if n > rec.max_degree:
        raise ValueError("kernel order exceeds the built recurrence")
    if abs(x - y) < NEAR_DIAGONAL:
        table = _psi_table(rec, weight, n - 1, np.array([x, y]))
        value = float(np.sum(table[:, 0] * table[:, 1]))
    else:
        t = _psi_table(rec, weight, n, np.array([x, y]))
        j = rec.beta[n - 1]
        value = j * (t[n, 0] * t[n - 1, 1] - t[n, 1] * t[n - 1, 0]) / (x - y)
    return KernelEval(n=n, x=float(x), y=float(y), value=value)


def kernel_matrix(rec, weight, n, xs, ys=None):
    """K_n on a grid; CD form off the diagonal band, direct sum on it."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = xs if ys is None else np.atleast_1d(np.asarray(ys, dtype=float))
    tx = _psi_table(rec, weight, n, xs)
    ty = tx if ys is xs else _psi_table(rec, weight, n, ys)
    dx = xs[:, None] - ys[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        num = rec.beta[n - 1] * (np.outer(tx[n], ty[n - 1]) - np.outer(tx[n - 1], ty[n]))
        out = num / dx
    near = np.abs(dx) < NEAR_DIAGONAL
    if np.any(near):
        direct = tx[:n].T @ ty[:n]
        out[near] = direct[near]
    return out


def density(rec, weight, n, x):
    """One-point density rho_n(x) = n^-1 K_n(x, x)."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    table = _psi_table(rec, weight, n - 1, x_arr)
    vals = np.sum(table * table, axis=0) / n
    return vals if np.ndim(x) else float(vals[0])


def correlation(rec, weight, n, points):
    """ell-point correlation ((n-ell)!/n!) det[K_n(x_i, x_j)].

    Repeated points give 0 (the determinant vanishes); that value is
    returned, not raised.
    """
    pts = np.asarray(points, dtype=float)
    ell = len(pts)
    if ell > n:
        raise ValueError("correlation order exceeds the kernel order")
    k = kernel_matrix(rec, weight, n, pts)
    pref = math.exp(math.lgamma(n - ell + 1) - math.lgamma(n + 1))
    return float(pref * np.linalg.det(k))


def density_derivative(rec, weight, n, x, quad=None):
    """Derivative of the density through the kernel identity.

    rho_n'(x) = int [U'(z) - U'(x)] K_n(x, z)^2 dz
                + n^-1 [K_n(x, 1)^2 - K_n(x, -1)^2].

    The boundary term vanishes identically for window weights (double roots
    at +-1 kill the kernel there) and restores exactness for weights that do
    not vanish at the endpoints.
    """
    if abs(x) >= 1.0 - 1e-8:
        raise ValueError("x too close to the interval endpoints")
    if weight.roots.size and np.min(np.abs(x - weight.roots)) == 0.0:
        raise ValueError("x coincides with a weight root")
    if quad is None:
        quad = build_quadrature(weight, n, margin=64)
    z = quad.nodes
    krow = kernel_matrix(rec, weight, n, np.array([x]), z)[0]
    if weight.roots.size:
        # U'(z) - U'(x) = -(2/n) sum_k (x - z)/((x - y_k)(z - y_k))
        dv = -(2.0 / weight.n) * np.sum(
            (x - z[:, None]) / ((x - weight.roots)[None, :] * (z[:, None] - weight.roots)),
            axis=1,
        )
    else:
        dv = np.zeros_like(z)
    integral = float(np.sum(quad.weights * dv * krow**2))
    k_hi = cd_kernel(rec, weight, n, x, 1.0).value
    k_lo = cd_kernel(rec, weight, n, x, -1.0).value
    return integral + (k_hi**2 - k_lo**2) / n


def stieltjes_transform_of_density(rec, weight, n, z, quad=None):
    """m_n(z) = int rho_n(x) / (x - z) dx for Im z > 0."""
    if quad is None:
        quad = build_quadrature(weight, n, margin=64)
    rho = density(rec, weight, n, quad.nodes)
    return complex(np.sum(quad.weights * rho / (quad.nodes - z)))


def stieltjes_identity_residual(rec, weight, n, z, quad=None):
    """|m_n(z)^2 + int U'(x) rho_n(x)/(x - z) dx| at z = u + i eta, eta > 0."""
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("z must have positive imaginary part")
    if quad is None:
        quad = build_quadrature(weight, n, margin=64)
    xs = quad.nodes
    rho = density(rec, weight, n, xs)
    m = np.sum(quad.weights * rho / (xs - z))
    vprime = weight.potential_derivative(xs) if weight.roots.size else np.zeros_like(xs)
    t = np.sum(quad.weights * vprime * rho / (xs - z))
    return float(abs(m * m + t))


def _psi_with_derivative(rec, weight, degree, x):
    """(psi_degree, psi_degree') at points x.

    Recurses jointly on phi_j = p_j sqrt(w) and phidot_j = p_j' sqrt(w);
    then psi' = phidot - (n/2) U' phi.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    sqw = np.exp(0.5 * (np.asarray(weight.log_weight(x)) - weight.log_shift))
    phi_prev = np.zeros_like(x)
    phi = sqw / rec.mass
    dot_prev = np.zeros_like(x)
    dot = np.zeros_like(x)
    for j in range(degree):
        b = rec.beta[j]
        a = rec.alpha[j]
        b_prev = rec.beta[j - 1] if j > 0 else 0.0
        phi_next = ((x - a) * phi - b_prev * phi_prev) / b
        dot_next = (phi + (x - a) * dot - b_prev * dot_prev) / b
        phi_prev, phi = phi, phi_next
        dot_prev, dot = dot, dot_next
    uprime = np.asarray(weight.potential_derivative(x)) if weight.roots.size else np.zeros_like(x)
    psi_prime = dot - 0.5 * weight.n * uprime * phi
    return phi, psi_prime


def derivative_norm_checks(rec, weight, n, quad=None):
    """Quadrature values of the two derivative norms of psi_(n-1).

    Returns (op73, op51): the weighted inverse-distance norm
    int psi^2 [n^-1 sum_k |x - y_k|^-1]^2 dx and the derivative norm
    int (psi')^2 dx, to be read against n^(6 gamma) and n^(2 + 6 gamma)
    reference scalings.
    """
    if quad is None:
        quad = build_quadrature(weight, n, margin=64)
    xs = quad.nodes
    psi, psi_prime = _psi_with_derivative(rec, weight, n - 1, xs)
    if weight.roots.size:
        inv = np.sum(1.0 / np.abs(xs[:, None] - weight.roots), axis=1) / weight.n
    else:
        inv = np.zeros_like(xs)
    op73 = float(np.sum(quad.weights * psi**2 * inv**2))
    op51 = float(np.sum(quad.weights * psi_prime**2))
    return op73, op51
