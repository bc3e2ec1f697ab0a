"""Branch-correct special functions of the factorization layer.

Everything here is a pure function of a segment point (|t| < k) or an
off-segment complex argument, plus the derived constants.  On-segment values
use explicit closed forms; Cauchy integrals are used only off the segment.
All complex powers are principal-branch powers of positive real bases, with
the segment-side phases carried by explicit unit factors, so branch drift is
structurally impossible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.integrate

from .errors import CutContactError, EndpointError
from .params import DerivedConstants

# relative endpoint margin below which pointwise evaluation is refused
ENDPOINT_MARGIN = 1e-8


def _check_interior(t, k: float, margin: float = ENDPOINT_MARGIN):
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > k * (1.0 - margin)):
        raise EndpointError(
            f"|t| exceeds k(1 - {margin:g}); endpoint behavior is analytic "
            "metadata, not a pointwise value")
    return t


@dataclass(frozen=True)
class SegmentPoint:
    """A strictly interior point of the segment (-kappa, kappa)."""

    t: float
    kappa: float

    def __post_init__(self):
        _check_interior(self.t, self.kappa)


@dataclass(frozen=True)
class EndpointExponents:
    """Density endpoint exponents: value ~ (k - t)^at_plus, (k + t)^at_minus."""

    at_plus_k: complex
    at_minus_k: complex


@dataclass(frozen=True)
class FactorPair:
    """Upper/lower boundary values of the 2x2 matrix factor at one point."""

    Xplus: np.ndarray
    Xminus: np.ndarray
    t: float
    kappa: float


def sqrt_one_minus_z2(z):
    """The branch of sqrt(1 - z^2) equal to 1 at z = 0.

    Cut along the real axis for |Re z| >= 1 (through infinity); this is
    exactly the cut of the principal square root of 1 - z^2.  For large |z|
    the value behaves like -i z sgn(Im z).
    """
    z = np.asarray(z, dtype=complex)
    on_cut = (z.imag == 0.0) & (np.abs(z.real) >= 1.0)
    if np.any(on_cut):
        raise CutContactError(
            "sqrt(1 - z^2) evaluated on its cut {real z, |z| >= 1}; "
            "take one-sided limits explicitly")
    out = np.sqrt(1.0 - z * z)
    return out if out.ndim else complex(out)


def radical_parts(t, k: float):
    """Positive factors R+(t), R-(t) = 1 +- k t + sqrt((1-t^2)(1-k^2)).

    The radicand is assembled in fused form, so both parts stay positive all
    the way to |t| = k without cancellation.
    """
    t = np.asarray(t, dtype=float)
    s = np.sqrt((1.0 - t * t) * (1.0 - k * k))
    return 1.0 + k * t + s, 1.0 - k * t + s


def radical_ratio(t, k: float):
    """R(t) = R+(t)/R-(t); tends to (1+t)/(1-t) as k -> 1."""
    rp, rm = radical_parts(t, k)
    return rp / rm


def cauchy_log(t, k: float):
    """I(t) = PV int_{-k}^{k} dtau / (sqrt(1-tau^2) (tau - t)), closed form.

    Equals log((k-t) R(t) / (k+t)) / sqrt(1-t^2); real and odd on (-k, k).
    """
    t = _check_interior(t, k)
    return np.log((k - t) * radical_ratio(t, k) / (k + t)) / np.sqrt(1.0 - t * t)


def beta_pm(t, k: float, gamma: float):
    """One-sided boundary values of the phase function on the segment.

    sqrt(1-t^2) beta_pm(t) = (1/4 - i gamma)(+- i pi + log((k-t) R(t)/(k+t))).
    Their jump is (log(nu0)/2 + i pi/2)/sqrt(1-t^2).
    """
    t = _check_interior(t, k)
    core = (0.25 - 1j * gamma) * np.log((k - t) * radical_ratio(t, k) / (k + t))
    s = np.sqrt(1.0 - t * t)
    return (core + 1j * np.pi * (0.25 - 1j * gamma)) / s, \
           (core - 1j * np.pi * (0.25 - 1j * gamma)) / s


def beta_offsegment(z: complex, k: float, gamma: float,
                    rel_tol: float = 1e-12) -> complex:
    """Phase function off the segment, by its Cauchy-integral definition.

    beta(z) = (log(nu0)/2 + i pi/2)/(2 pi i) * int_{-k}^{k}
              dtau / (sqrt(1-tau^2) (tau - z)); decays like beta0/z at infinity.
    Adaptive quadrature; the integrand is smooth on [-k, k] for z off it.
    """
    z = complex(z)
    if z.imag == 0.0 and abs(z.real) <= k:
        raise CutContactError("beta(z) is discontinuous across the segment; "
                              "use beta_pm for boundary values")
    # log of the eigenvalue square root, expressed through gamma
    ln_sqrt_lam = 2.0 * np.pi * gamma + 0.5j * np.pi

    def f_re(tau):
        return (1.0 / (np.sqrt(1.0 - tau * tau) * (tau - z))).real

    def f_im(tau):
        return (1.0 / (np.sqrt(1.0 - tau * tau) * (tau - z))).imag

    opts = dict(epsabs=0.0, epsrel=rel_tol, limit=200)
    re = scipy.integrate.quad(f_re, -k, k, **opts)[0]
    im = scipy.integrate.quad(f_im, -k, k, **opts)[0]
    return ln_sqrt_lam / (2j * np.pi) * (re + 1j * im)


def lambda_pm(t, k: float, gamma: float, e0: complex):
    """One-sided boundary values of the scalar factor on the segment.

    lambda_pm(t) = -e0^{+-1} (k-t)^{-3/4 - i gamma} (k+t)^{-1/4 + i gamma}.
    Their ratio is i sqrt(nu0) everywhere on the segment.
    """
    t = _check_interior(t, k)
    core = (k - t) ** (-0.75 - 1j * gamma) * (k + t) ** (-0.25 + 1j * gamma)
    return -e0 * core, -core / e0


def lambda_offsegment(z: complex, k: float, gamma: float) -> complex:
    """Scalar factor off the segment: product of principal powers.

    Continuous across the real axis outside [-k, k], behaves like 1/z at
    infinity, and its boundary values reproduce :func:`lambda_pm`.
    """
    z = complex(z)
    if z.imag == 0.0 and abs(z.real) <= k:
        raise CutContactError("lambda(z) jumps across the segment; "
                              "use lambda_pm for boundary values")
    return (z - k) ** (-0.75 - 1j * gamma) * (z + k) ** (-0.25 + 1j * gamma)


def matrix_coefficient(t, nu: float) -> np.ndarray:
    """The 2x2 jump matrix whose factorization drives the solution.

    G(t) = 1/(nu+1) [[nu-1, -2/sqrt(1-t^2)], [-2 sqrt(1-t^2), nu-1]];
    eigenvalues are the constants -(3-nu)/(1+nu) and 1.
    """
    t = float(t)
    s = np.sqrt(1.0 - t * t)
    return np.array([[nu - 1.0, -2.0 / s],
                     [-2.0 * s, nu - 1.0]], dtype=complex) / (nu + 1.0)


def chi_entries_pm(t, k: float, consts: DerivedConstants):
    """Entries (chi1_pm, chi2_pm) of the boundary factor matrices.

    chi_j^pm = -(1/(2 (sqrt(1-t^2))^{j-1})) [ e0^{+-2} (k-t)^{-1/2-2ig}
               (k+t)^{-1/2+2ig} R^{1/4-ig}  -  (-1)^j R^{-1/4+ig} / (k-t) ].
    """
    t = _check_interior(t, k)
    g = consts.gamma
    R = radical_ratio(t, k)
    core = (k - t) ** (-0.5 - 2j * g) * (k + t) ** (-0.5 + 2j * g) \
        * R ** (0.25 - 1j * g)
    rec = R ** (-0.25 + 1j * g) / (k - t)
    e2 = consts.e0 ** 2
    s = np.sqrt(1.0 - t * t)
    chi1p = -0.5 * (e2 * core + rec)
    chi1m = -0.5 * (core / e2 + rec)
    chi2p = -0.5 * (e2 * core - rec) / s
    chi2m = -0.5 * (core / e2 - rec) / s
    return (chi1p, chi1m), (chi2p, chi2m)


def chi_jump(t, k: float, consts: DerivedConstants):
    """Jumps of the factor entries and the common jump factor.

    Returns ((chi1+, chi1-), (chi2+, chi2-), chi) where
    chi(t) = -2i/((1+nu) sqrt(nu0)) (k-t)^{-1/2-2ig} (k+t)^{-1/2+2ig} R^{1/4-ig}
    and chi_j^+ - chi_j^- = chi / (sqrt(1-t^2))^{j-1}.
    """
    (chi1p, chi1m), (chi2p, chi2m) = chi_entries_pm(t, k, consts)
    t = np.asarray(t, dtype=float)
    g = consts.gamma
    chi = -2j / ((1.0 + consts.nu) * np.sqrt(consts.nu0)) \
        * (k - t) ** (-0.5 - 2j * g) * (k + t) ** (-0.5 + 2j * g) \
        * radical_ratio(t, k) ** (0.25 - 1j * g)
    return (chi1p, chi1m), (chi2p, chi2m), chi


def factor_matrices(t: float, k: float, consts: DerivedConstants) -> FactorPair:
    """Boundary values X+(t), X-(t) of the matrix factor at one point.

    Structure: [[chi1, chi2], [(1-t^2) chi2, chi1]]; X+ (X-)^{-1} equals the
    jump matrix and det X_pm = lambda_pm^2.
    """
    (chi1p, chi1m), (chi2p, chi2m) = chi_entries_pm(t, k, consts)
    t = float(t)
    s2 = 1.0 - t * t
    Xp = np.array([[chi1p, chi2p], [s2 * chi2p, chi1p]], dtype=complex)
    Xm = np.array([[chi1m, chi2m], [s2 * chi2m, chi1m]], dtype=complex)
    return FactorPair(Xplus=Xp, Xminus=Xm, t=t, kappa=k)


def density_exponents(gamma: float) -> EndpointExponents:
    """Endpoint exponents of the traction-jump density on its segment."""
    return EndpointExponents(at_plus_k=-0.5 - 2j * gamma,
                             at_minus_k=-0.5 + 2j * gamma)
