"""Integration machinery.

Three independent tool families live here:

* the classical Chebyshev-family Gauss rules (second kind for series
  coefficients, a half-open endpoint rule, first kind for weighted sums),
  with auto-doubling convergence drivers;

* exact modified moments of complex-exponent Jacobi weights
  ``(k - t)^alpha (k + t)^beta`` against Chebyshev polynomials, computed from
  Gamma-function seeds by stable three-term recurrences, plus closed-form
  principal-value transforms of weight*polynomial built on them.  These give
  spectral (geometric) accuracy for every integral in the solver pipeline,
  including the endpoint-oscillatory ones where plain Gauss rules converge
  only algebraically;

* a general-purpose principal-value integrator (pairing form) over dyadically
  graded Gauss-Legendre panels, used by the verification layer.  Panels are
  evaluated in distance-from-endpoint coordinates so that algebraic endpoint
  factors never suffer cancellation, and the last sliver is closed with an
  analytic two-term tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import scipy.fft
from scipy.special import gamma as _cgamma

from .errors import ConvergenceError, DomainError, EndpointError

__all__ = [
    "QuadratureConfig", "ChebSeries", "JacobiWeight",
    "cheb_coeffs", "cheb_fit_auto", "cheb_eval",
    "chebu_moments", "chebt_moments",
    "weighted_series_integral", "pv_weighted_transforms",
    "offsegment_weighted_transform",
    "gauss_legendre_panels", "pv_integral",
    "cheb2_coeffs", "psi_series", "psi_at_endpoint",
    "cheb2_rule", "cheb1_rule", "endpoint_rule", "endpoint_rule_apply",
    "usereval",
]


@dataclass(frozen=True)
class QuadratureConfig:
    """Orders and tolerances for all rules.

    N: second-kind (coefficient) rule order; M: endpoint rule order;
    L: first-kind rule order.  Auto-doubling multiplies an order by two up to
    ``max_doublings`` times until the relative change drops below ``rel_tol``.
    """

    N: int = 200
    M: int = 200
    L: int = 200
    rel_tol: float = 1e-10
    max_doublings: int = 3
    # spectral-fit controls (production path)
    fit_start: int = 32
    fit_max: int = 1 << 13

    def __post_init__(self):
        if min(self.N, self.M, self.L) < 8:
            raise DomainError("rule orders must be >= 8")
        if not 0.0 < self.rel_tol <= 1e-6:
            raise DomainError(f"rel_tol={self.rel_tol} outside (0, 1e-6]")


# ----------------------------------------------------------------------
# Chebyshev fitting (first-kind root grid, DCT based)

def _cheb_nodes(k: float, n: int) -> np.ndarray:
    j = np.arange(n)
    return k * np.cos(np.pi * (2 * j + 1) / (2 * n))


def cheb_coeffs(f: Callable, k: float, n: int) -> np.ndarray:
    """Chebyshev-T coefficients of ``f`` on (-k, k) from n root-grid samples."""
    vals = np.asarray(f(_cheb_nodes(k, n)), dtype=complex)
    cr = scipy.fft.dct(vals.real, type=2) / n
    ci = scipy.fft.dct(vals.imag, type=2) / n
    c = cr + 1j * ci
    c[0] *= 0.5
    return c


def cheb_fit_auto(f: Callable, k: float, rel_tol: float = 1e-13,
                  n0: int = 32, nmax: int = 1 << 13) -> np.ndarray:
    """Adaptive Chebyshev fit: double n until the coefficient tail is resolved."""
    n = n0
    while True:
        c = cheb_coeffs(f, k, n)
        scale = np.max(np.abs(c))
        if scale == 0.0:
            return c[:1]
        tail = np.max(np.abs(c[-max(2, n // 8):]))
        if tail <= rel_tol * scale:
            keep = np.nonzero(np.abs(c) > 1e-2 * rel_tol * scale)[0]
            return c[:keep[-1] + 1] if keep.size else c[:1]
        if n >= nmax:
            raise ConvergenceError(
                f"Chebyshev fit not resolved at n={n} (tail {tail/scale:.2e})")
        n *= 2


def cheb_eval(coeffs: np.ndarray, k: float, t) -> np.ndarray:
    """Evaluate a Chebyshev-T series on (-k, k); valid slightly outside too."""
    return np.polynomial.chebyshev.chebval(np.asarray(t) / k, coeffs)


def usereval(coeffs: np.ndarray, k: float, t) -> np.ndarray:
    """Evaluate a Chebyshev-U series sum c_m U_m(t/k)."""
    t = np.asarray(t, dtype=float)
    theta = np.arccos(np.clip(t / k, -1.0, 1.0))
    m = np.arange(1, len(coeffs) + 1)
    s = np.sin(np.outer(theta, m)) @ np.asarray(coeffs)
    return s / np.sin(theta)


# ----------------------------------------------------------------------
# exact complex-exponent Jacobi moments

def chebu_moments(alpha: complex, beta: complex, nmax: int) -> np.ndarray:
    """rho_m = int_{-1}^{1} (1-x)^alpha (1+x)^beta U_m(x) dx, m = 0..nmax.

    Stable forward recurrence with a Beta-function seed; requires
    Re(alpha), Re(beta) > -1.
    """
    alpha = complex(alpha)
    beta = complex(beta)
    if alpha.real <= -1.0 or beta.real <= -1.0:
        raise DomainError("moment exponents must have real part > -1")
    rho = np.zeros(nmax + 1, dtype=complex)
    rho[0] = 2.0 ** (alpha + beta + 1.0) * _cgamma(alpha + 1.0) \
        * _cgamma(beta + 1.0) / _cgamma(alpha + beta + 2.0)
    if nmax >= 1:
        rho[1] = 2.0 * (beta - alpha) * rho[0] / (alpha + beta + 2.0)
    for m in range(2, nmax + 1):
        rho[m] = (2.0 * (beta - alpha) * rho[m - 1]
                  + (m - alpha - beta - 1.0) * rho[m - 2]) \
            / (m + alpha + beta + 1.0)
    return rho


def chebt_moments(alpha: complex, beta: complex, nmax: int) -> np.ndarray:
    """nu_m = int_{-1}^{1} (1-x)^alpha (1+x)^beta T_m(x) dx, m = 0..nmax."""
    rho = chebu_moments(alpha, beta, nmax)
    nu = np.empty_like(rho)
    nu[0] = rho[0]
    if nmax >= 1:
        nu[1] = 0.5 * rho[1]
    if nmax >= 2:
        nu[2:] = 0.5 * (rho[2:] - rho[:-2])
    return nu


@dataclass(frozen=True)
class JacobiWeight:
    """Weight w(t) = (k - t)^alpha (k + t)^beta on the segment (-k, k).

    The closed-form Cauchy transforms require alpha + beta to be an integer
    in {-1, 0, 1}; the plain moments work for any Re > -1.
    """

    k: float
    alpha: complex
    beta: complex

    @property
    def exponent_sum(self) -> int:
        s = self.alpha + self.beta
        if abs(s.imag) > 1e-12 or abs(s.real - round(s.real)) > 1e-12:
            raise DomainError("alpha + beta must be an integer for transforms")
        return int(round(s.real))

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return (self.k - t) ** self.alpha * (self.k + t) ** self.beta

    def t_moments(self, nmax: int) -> np.ndarray:
        """int_{-k}^{k} w(t) T_n(t/k) dt for n = 0..nmax."""
        return self.k ** (self.alpha + self.beta + 1.0) \
            * chebt_moments(self.alpha, self.beta, nmax)


def weighted_series_integral(w: JacobiWeight, coeffs: np.ndarray) -> complex:
    """int_{-k}^{k} w(t) * sum_n coeffs[n] T_n(t/k) dt, exactly."""
    mu = w.t_moments(len(coeffs) - 1)
    return complex(np.sum(np.asarray(coeffs) * mu))


def _poly_seed(w: JacobiWeight, t: np.ndarray) -> np.ndarray:
    """Polynomial part at infinity of (z-k)^alpha (z+k)^beta, evaluated at t."""
    s = w.exponent_sum
    if s == 1:
        return t + (w.beta - w.alpha) * w.k
    if s == 0:
        return np.ones_like(t, dtype=complex)
    if s == -1:
        return np.zeros_like(t, dtype=complex)
    raise DomainError(f"unsupported exponent sum {s}")


def pv_weighted_transforms(w: JacobiWeight, coeffs: Sequence[complex],
                           t) -> np.ndarray:
    """sum_n coeffs[n] * PV int_{-k}^{k} w(tau) T_n(tau/k) / (tau - t) dtau.

    Interior t only (|t| < k).  Uses the closed-form seed
    pi [cot(pi alpha) w(t) - p0(t)/sin(pi alpha)] and the Chebyshev three-term
    recurrence, whose homogeneous solutions are oscillatory (hence stable)
    for |t| < k.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(np.abs(t) >= w.k):
        raise EndpointError("principal-value transforms need |t| < k")
    coeffs = np.asarray(coeffs, dtype=complex)
    nmax = len(coeffs) - 1
    mu = w.t_moments(nmax)
    cot = np.cos(np.pi * w.alpha) / np.sin(np.pi * w.alpha)
    inv_sin = 1.0 / np.sin(np.pi * w.alpha)
    W_prev = np.pi * (cot * w(t) - _poly_seed(w, t) * inv_sin)
    acc = coeffs[0] * W_prev
    if nmax == 0:
        return acc
    x = t / w.k
    W_cur = x * W_prev + mu[0] / w.k
    acc = acc + coeffs[1] * W_cur
    for n in range(1, nmax):
        W_next = 2.0 * x * W_cur - W_prev + 2.0 * mu[n] / w.k
        acc = acc + coeffs[n + 1] * W_next
        W_prev, W_cur = W_cur, W_next
    return acc


def offsegment_parts(w: JacobiWeight, coeffs: Sequence[complex], t) -> tuple:
    """Split form of int w(tau) series(tau/k) / (tau - t) dtau for real |t| > k.

    Returns (branch_part, poly_part) with
        transform = pi/sin(pi alpha) * (branch_part - poly_part),
    branch_part = w_an(t) * series(t/k) (analytic continuation) and poly_part
    the polynomial component.  The two parts may nearly cancel for t far from
    the segment; integrate them separately when that matters.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(np.abs(t) <= w.k):
        raise EndpointError("off-segment transform needs |t| > k")
    coeffs = np.asarray(coeffs, dtype=complex)
    nmax = len(coeffs) - 1
    mu = w.t_moments(nmax)
    inv_sin_pi = 1.0 / np.pi  # moment-to-recurrence constant, see below
    # w_an via principal powers; +0j puts real t < -k on the continuous side
    zc = t.astype(complex)
    w_an = (zc - w.k) ** w.alpha * (zc + w.k) ** w.beta
    series = np.polynomial.chebyshev.chebval(t / w.k, coeffs)
    branch = w_an * series
    # q_n recurrence: q_{n+1} = 2(t/k) q_n - q_{n-1} - (sin(pi a)/pi)(2/k) mu_n
    sin_a = np.sin(np.pi * w.alpha)
    q_prev = _poly_seed(w, t)
    acc = coeffs[0] * q_prev
    if nmax >= 1:
        q_cur = (t / w.k) * q_prev - (sin_a / np.pi) * mu[0] / w.k
        acc = acc + coeffs[1] * q_cur
        for n in range(1, nmax):
            q_next = 2.0 * (t / w.k) * q_cur - q_prev \
                - (sin_a / np.pi) * 2.0 * mu[n] / w.k
            acc = acc + coeffs[n + 1] * q_next
            q_prev, q_cur = q_cur, q_next
    del inv_sin_pi
    return branch, acc


def offsegment_weighted_transform(w: JacobiWeight, coeffs: Sequence[complex],
                                  t) -> np.ndarray:
    """int_{-k}^{k} w(tau) series(tau/k)/(tau - t) dtau for real |t| > k.

    Evaluated from the split parts; accurate while the recurrence growth
    e^{n arccosh(|t|/k)} stays within double precision, which holds for the
    trace evaluations this supports.
    """
    branch, poly = offsegment_parts(w, coeffs, t)
    return np.pi / np.sin(np.pi * w.alpha) * (branch - poly)


# ----------------------------------------------------------------------
# graded Gauss-Legendre panel engine and pairing principal values

@lru_cache(maxsize=16)
def _gl(n: int):
    return np.polynomial.legendre.leggauss(n)


def gauss_legendre_panels(f: Callable, a: float, b: float,
                          left_exp: complex = 0.0, right_exp: complex = 0.0,
                          n_gl: int = 24, ratio: float = 2.0,
                          eps: float | None = None) -> complex:
    """int_a^b (t-a)^left_exp (b-t)^right_exp f(t, sL, sR) dt.

    ``f`` is vectorized and receives the exact endpoint distances
    sL = t - a, sR = b - t so that no cancellation occurs in the weight.
    Dyadic panels are graded into each endpoint down to a relative sliver,
    which is closed with an analytic linear-fit tail; exponents with real
    part <= -1 are integrated in the Hadamard finite-part sense.
    """
    pL = complex(left_exp)
    pR = complex(right_exp)
    x, wgl = _gl(n_gl)
    L = b - a
    if L <= 0.0:
        return 0.0 + 0.0j
    half = 0.5 * L
    total = 0.0 + 0.0j
    for side in ("L", "R"):
        p = pL if side == "L" else pR
        if eps is None:
            side_eps = 1e-12 if p.real <= -0.99 else 1e-30
        else:
            side_eps = eps
        nlev = max(4, int(math.ceil(math.log(0.5 / side_eps)
                                    / math.log(ratio))))
        edges = half * ratio ** (-np.arange(nlev + 1, dtype=float))
        s_hi = edges[:-1]
        s_lo = edges[1:]
        mid = 0.5 * (s_lo + s_hi)[:, None]
        rad = 0.5 * (s_hi - s_lo)[:, None]
        s = mid + rad * x[None, :]
        if side == "L":
            tau = a + s
            vals = s ** pL * (L - s) ** pR * f(tau, s, L - s)
        else:
            tau = b - s
            vals = (L - s) ** pL * s ** pR * f(tau, L - s, s)
        total += complex(np.sum(vals * (rad * wgl[None, :])))
        # analytic tail on (0, smin): weightless factor fit linearly
        smin = edges[-1]
        s1 = np.array([smin])
        s2 = np.array([2.0 * smin])
        if side == "L":
            g1 = (L - s1) ** pR * f(a + s1, s1, L - s1)
            g2 = (L - s2) ** pR * f(a + s2, s2, L - s2)
        else:
            g1 = (L - s1) ** pL * f(b - s1, L - s1, s1)
            g2 = (L - s2) ** pL * f(b - s2, L - s2, s2)
        c1 = (g2[0] - g1[0]) / smin
        c0 = g1[0] - c1 * smin
        total += c0 * smin ** (p + 1.0) / (p + 1.0) \
            + c1 * smin ** (p + 2.0) / (p + 2.0)
    return total


def pv_integral(f: Callable, t: float, a: float, b: float,
                left_exp: complex = 0.0, right_exp: complex = 0.0,
                n_gl: int = 24) -> complex:
    """PV int_a^b (tau-a)^left_exp (b-tau)^right_exp f(tau, sL, sR)/(tau-t) dtau.

    Pairing form: the symmetric window (t - h, t + h) with h = half the
    distance to the nearer endpoint is integrated as
    int_0^h [F(t+u) - F(t-u)]/u du (analytic at u = 0), and the remainders
    are one-sided weighted panel integrals.  No global rule is trusted near t.
    """
    if not a < t < b:
        raise EndpointError(f"PV point t={t} outside ({a}, {b})")
    pL = complex(left_exp)
    pR = complex(right_exp)

    def F(tau, sL, sR):
        return sL ** pL * sR ** pR * f(tau, sL, sR)

    h = 0.5 * min(t - a, b - t)
    x, wgl = _gl(48)
    out = 0.0 + 0.0j
    edges = np.array([0.0, 0.25 * h, 0.5 * h, h])
    for s1, s2 in zip(edges[:-1], edges[1:]):
        u = 0.5 * (s1 + s2) + 0.5 * (s2 - s1) * x
        Fp = F(t + u, t + u - a, b - t - u)
        Fm = F(t - u, t - u - a, b - t + u)
        out += complex(np.sum((Fp - Fm) / u * wgl)) * 0.5 * (s2 - s1)
    out += gauss_legendre_panels(
        lambda tau, sL, sR: (tau - a) ** pL * f(tau, tau - a, sR) / (tau - t),
        t + h, b, 0.0, pR, n_gl)
    out += gauss_legendre_panels(
        lambda tau, sL, sR: (b - tau) ** pR * f(tau, sL, b - tau) / (tau - t),
        a, t - h, pL, 0.0, n_gl)
    return out


# ----------------------------------------------------------------------
# the paper-style Gauss rules and the coefficient/series operations

def cheb2_rule(k: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Second-kind rule: nodes k cos(l pi/(n+1)), weights for sqrt(k^2-t^2) dt."""
    l = np.arange(1, n + 1)
    theta = l * np.pi / (n + 1)
    nodes = k * np.cos(theta)
    weights = np.pi * k * k / (n + 1) * np.sin(theta) ** 2
    return nodes, weights


def cheb1_rule(k: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """First-kind rule: int f(t)/sqrt(k^2-t^2) dt ~ (pi/n) sum f(nodes)."""
    l = np.arange(1, n + 1)
    nodes = k * np.cos((2 * l - 1) * np.pi / (2 * n))
    weights = np.full(n, np.pi / n)
    return nodes, weights


def endpoint_rule(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Half-open rule on (0, 1) with weight sqrt(x/(1-x)).

    Nodes x_l = cos^2((2l-1) pi / (2(2m+1))); weights 2 pi x_l/(2m+1).
    """
    l = np.arange(1, m + 1)
    x = np.cos((2 * l - 1) * np.pi / (2 * (2 * m + 1))) ** 2
    w = 2.0 * np.pi * x / (2 * m + 1)
    return x, w


def endpoint_rule_apply(gj: Callable, k: float, p0: complex, m: int) -> complex:
    """Endpoint value -p0 int ((k+t)/(k-t))^{1/2} gj(t) dt by the half-open rule."""
    x, w = endpoint_rule(m)
    t = -k + 2.0 * k * x
    return complex(-p0 * 2.0 * k * np.sum(w * gj(t)))


@dataclass
class ChebSeries:
    """Second-kind expansion coefficients of the two density integrands."""

    c1: np.ndarray
    c2: np.ndarray
    k: float
    n_used: int

    def coeffs(self, j: int) -> np.ndarray:
        if j == 1:
            return self.c1
        if j == 2:
            return self.c2
        raise DomainError(f"component index {j} not in {{1, 2}}")


def _cheb2_coeffs_once(g: Callable, k: float, n: int) -> np.ndarray:
    """Second-kind coefficients by the n-point sine rule (a DST-I)."""
    l = np.arange(1, n + 1)
    theta = l * np.pi / (n + 1)
    vals = np.asarray(g(k * np.cos(theta)), dtype=complex) * np.sin(theta)
    cr = scipy.fft.dst(vals.real, type=1)
    ci = scipy.fft.dst(vals.imag, type=1)
    return (cr + 1j * ci) / (n + 1)


def cheb2_coeffs(g: Callable, k: float, n: int | None = None,
                 rel_tol: float = 1e-10, max_doublings: int = 12) -> np.ndarray:
    """Second-kind expansion coefficients c_m of ``g`` on (-k, k).

    c_m = (2/(pi k^2)) int g(t) sqrt(k^2 - t^2) U_m(t/k) dt, computed by the
    sine-transform rule and doubled until the retained coefficients are
    stable to ``rel_tol`` (the tail of an endpoint-oscillatory integrand
    decays only algebraically, so stability, not tail size, is the test).
    """
    n = int(n or 256)
    prev = _cheb2_coeffs_once(g, k, n)
    for _ in range(max_doublings):
        n = 2 * n + 1
        cur = _cheb2_coeffs_once(g, k, n)
        scale = np.max(np.abs(cur))
        if scale == 0.0:
            return cur[:1]
        change = np.max(np.abs(cur[:len(prev)] - prev))
        if change <= rel_tol * scale:
            return cur
        prev = cur
    raise ConvergenceError(
        f"coefficient rule did not stabilize at n={n} "
        f"(last change {change/scale:.2e})")


def psi_series(t, series: ChebSeries, p0: complex) -> tuple:
    """Principal-value components from the spectral route.

    Psi_j(t) = -pi k p0 sum_m c_jm T_{m+1}(t/k), from the spectral relation
    int sqrt(k^2-tau^2) U_m(tau/k)/(tau-t) dtau = -pi k T_{m+1}(t/k).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(np.abs(t) >= series.k):
        raise EndpointError("series route needs interior |t| < k")
    theta = np.arccos(t / series.k)
    out = []
    for j in (1, 2):
        c = series.coeffs(j)
        m = np.arange(1, len(c) + 1)
        val = np.cos(np.outer(theta, m)) @ c
        out.append(-np.pi * series.k * p0 * val)
    return out[0], out[1]


def psi_at_endpoint(g1: Callable, g2: Callable, k: float, gamma: float,
                    p0: complex, rel_tol: float = 1e-12) -> tuple:
    """Endpoint values Psi_j(k) = -p0 int ((k+t)/(k-t))^{1/2} g_j(t) dt.

    Production path: strip the oscillatory endpoint factor
    ((k-t)/(k+t))^{2 i gamma} off g_j, fit the remaining analytic factor, and
    contract with exact (-1/2 + 2 i gamma, 1/2 - 2 i gamma)-class moments.
    Matches adaptive quadrature of the defining integral to ~1e-12.
    """
    alpha = -0.5 + 2j * gamma
    beta = 0.5 - 2j * gamma
    mom_cache: dict[int, np.ndarray] = {}
    out = []
    for g in (g1, g2):
        def analytic_part(t, g=g):
            osc = ((k - t) / (k + t)) ** (2j * gamma)
            return np.asarray(g(t), dtype=complex) / osc
        coeffs = cheb_fit_auto(analytic_part, k, rel_tol=rel_tol)
        nmax = len(coeffs) - 1
        if nmax not in mom_cache:
            mom_cache[nmax] = chebt_moments(alpha, beta, nmax)
        out.append(complex(-p0 * k * np.sum(coeffs * mom_cache[nmax])))
    return out[0], out[1]
