"""Right-hand sides and the closed-form density.

Both geometric models reduce to one dominant singular integral equation

    (1/pi) PV int_{-kap}^{kap} (1 + sqrt((1-tau^2)/(1-t^2))) rho(tau) dtau/(tau-t)
        - i (1-nu) rho(t) = g(t),            -kap < t < kap,

differing only in the segment ratio kap, the right-hand side g, and the
moment constraint on the density rho.  ``solve_closed_form`` is the single
generic solver; the model-specific builders are thin facades over it.

The density is evaluated from its explicit representation

    rho(t) = -i(1-nu) g(t)/nu1 + chi(t) * H(t),

where chi carries the oscillatory endpoint weight and H collects the two
principal-value components, their endpoint values, and the moment block.
For smooth g the product of chi with the weight-borne part of H cancels the
first term exactly, so rho = u(t) Y(t) with u the pure endpoint weight and Y
analytic; Y is fitted once and drives every downstream integral spectrally.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, EndpointError, ProfileError
from .params import (DerivedConstants, Model, ProblemConfig, constants_for,
                     derive_constants)
from .quadrature import (JacobiWeight, QuadratureConfig, cheb2_coeffs,
                         cheb_eval, cheb_fit_auto, chebt_moments,
                         gauss_legendre_panels, pv_weighted_transforms,
                         usereval, weighted_series_integral)
from .special import (EndpointExponents, density_exponents, radical_ratio,
                      _check_interior)

K1_SWITCH = 0.995        # above this ratio the equal-length form is advised
DEFAULT_NODES = 129


class RhsKind(enum.Enum):
    MODEL1_GENERAL = "model1-general"
    MODEL1_POINT_LOAD = "model1-point-load"
    MODEL2_GENERAL = "model2-general"


@dataclass(frozen=True)
class RhsFunction:
    """Right-hand side g on (-kappa, kappa), split as smooth + invsqrt parts.

    g(t) = smooth(t) + invsqrt(t)/sqrt(1-t^2) with both parts analytic on the
    closed segment; the split survives the equal-length limit where the
    segment endpoints meet the crack tips.
    """

    kind: RhsKind
    kappa: float
    scale: float                  # a (model 1 / equal) or b (model 2)
    moment: complex               # required moment of the density on (-kap,kap)
    smooth: Callable
    invsqrt: Callable

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.smooth(t) + self.invsqrt(t) / np.sqrt(1.0 - t * t)


def _zero(t):
    return np.zeros_like(np.asarray(t, dtype=float), dtype=complex)


def _profile_pv_series(profile: Callable, tol: float = 1e-12) -> np.ndarray:
    """Second-kind coefficients of a smooth profile on (-1, 1).

    Feeds the closed-form principal value
    PV int sqrt(1-tau^2) U_m(tau) dtau/(tau-t) = -pi T_{m+1}(t).
    """
    return cheb2_coeffs(profile, 1.0, n=64, rel_tol=tol)


def build_rhs_model1(cfg: ProblemConfig) -> RhsFunction:
    """Right-hand side for the longer-crack configuration (b < a)."""
    if cfg.model not in (Model.MODEL1, Model.EQUAL):
        raise DomainError("model-1 right-hand side needs b <= a")
    a = cfg.a
    kappa = cfg.b / cfg.a
    nu, E = cfg.nu, cfg.E
    pstar = cfg.p_star
    prof = cfg.profiles
    moment = 1j * pstar / a

    if prof.all_zero:
        const = (1.0 - nu) * pstar / (2.0 * math.pi * a)

        def invsqrt(t):
            return np.full_like(np.asarray(t, dtype=float), const,
                                dtype=complex)

        return RhsFunction(kind=RhsKind.MODEL1_POINT_LOAD, kappa=kappa,
                           scale=a, moment=moment, smooth=_zero,
                           invsqrt=invsqrt)

    hp = prof.h_prime or _zero
    wb = prof.w_background or _zero
    sb = prof.sigma_background or _zero
    if prof.sigma_background is not None:
        d = _profile_pv_series(lambda tau: np.asarray(
            sb(a * tau), dtype=complex))
    else:
        d = np.zeros(1, dtype=complex)

    def smooth(t):
        t = np.asarray(t, dtype=float)
        return (-1j * E * np.asarray(hp(a * t), dtype=complex)
                + E * np.asarray(wb(a * t), dtype=complex)
                + 1j * (1.0 - nu) * np.asarray(sb(a * t), dtype=complex))

    def invsqrt(t):
        t = np.asarray(t, dtype=float)
        # -(2/pi) PV int sqrt(1-tau^2) sigma(a tau)/(tau-t) = 2 sum d_m T_{m+1}
        series = 2.0 * cheb_eval(np.concatenate(([0.0 + 0j], d)), 1.0, t)
        return series + (1.0 - nu) * pstar / (2.0 * math.pi * a)

    return RhsFunction(kind=RhsKind.MODEL1_GENERAL, kappa=kappa, scale=a,
                       moment=moment, smooth=smooth, invsqrt=invsqrt)


def build_rhs_model2(cfg: ProblemConfig) -> RhsFunction:
    """Right-hand side for the longer-inclusion configuration (a < b)."""
    if cfg.model is not Model.MODEL2:
        raise DomainError("model-2 right-hand side needs a < b")
    b = cfg.b
    kappa = cfg.a / cfg.b
    nu, E = cfg.nu, cfg.E
    nu1 = (3.0 - nu) * (1.0 + nu)
    pstar = cfg.p_star
    prof = cfg.profiles

    hp = prof.h_prime or _zero
    wb = prof.w_background or _zero
    sb = prof.sigma_background or _zero
    if prof.h_prime is not None or prof.w_background is not None:
        d = _profile_pv_series(lambda tau: (
            1j * np.asarray(hp(b * tau), dtype=complex)
            - np.asarray(wb(b * tau), dtype=complex)))
    else:
        d = np.zeros(1, dtype=complex)

    def smooth(t):
        t = np.asarray(t, dtype=float)
        return (-nu1 * np.asarray(sb(b * t), dtype=complex)
                - E * (1.0 - nu) * (np.asarray(hp(b * t), dtype=complex)
                                    + 1j * np.asarray(wb(b * t), dtype=complex)))

    def invsqrt(t):
        t = np.asarray(t, dtype=float)
        series = 2.0 * E * cheb_eval(np.concatenate(([0.0 + 0j], d)), 1.0, t)
        return series - 1j * pstar * nu1 / (2.0 * math.pi * b)

    return RhsFunction(kind=RhsKind.MODEL2_GENERAL, kappa=kappa, scale=b,
                       moment=0.0 + 0.0j, smooth=smooth, invsqrt=invsqrt)


# ----------------------------------------------------------------------
# density container

@dataclass
class DensitySolution:
    """Sampled density on the interior of its segment, plus exact structure.

    ``values[i]`` is the density at ``nodes[i]`` (t units, segment (-kap,kap)).
    The density equals u(t) * Y(t) with u the endpoint weight encoded by
    ``endpoint_exponents`` and Y analytic; ``bounded_coeffs`` holds the
    Chebyshev coefficients of Y, which downstream quadrature should prefer
    over raw values.  ``moment`` is the computed integral of the density.
    """

    kind: str                     # "psi" (traction jump) or "phi" (slip rate)
    kappa: float
    scale: float
    nu: float
    gamma: float
    nodes: np.ndarray
    values: np.ndarray
    endpoint_exponents: EndpointExponents
    moment: complex
    bounded_coeffs: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def weight(self) -> JacobiWeight:
        e = self.endpoint_exponents
        return JacobiWeight(k=self.kappa, alpha=e.at_plus_k, beta=e.at_minus_k)

    def bounded_part(self, t):
        """Analytic factor Y(t); finite on the closed segment."""
        if not len(self.bounded_coeffs):
            raise DomainError("recovered traces have no single bounded part")
        return cheb_eval(self.bounded_coeffs, self.kappa, t)

    def evaluate(self, t):
        """Density at strictly interior points."""
        if "trace" in self.meta:
            return self.meta["trace"].evaluate(t)
        t = _check_interior(t, self.kappa)
        return self.weight(t) * self.bounded_part(t)


def _assemble_bracket(kappa: float, consts: DerivedConstants,
                      psi1, psi2, psi1k: complex, psi2k: complex,
                      C0: complex, t: np.ndarray) -> np.ndarray:
    """The weight-multiplied bracket H(t) of the density representation."""
    s = np.sqrt(1.0 - t * t)
    root = math.sqrt(1.0 - kappa * kappa)
    cos0 = np.cos(consts.beta0)
    sin0 = np.sin(consts.beta0)
    return (psi1 + root / s * psi1k + (psi2 - psi2k) / s
            + C0 * (cos0 + ((t - kappa) * sin0 + root * cos0) / s))


def solve_closed_form(kappa: float, rhs: RhsFunction, moment: complex,
                      consts: DerivedConstants,
                      qcfg: QuadratureConfig | None = None,
                      nodes: np.ndarray | None = None) -> DensitySolution:
    """Evaluate the closed-form density for the generic kernel equation.

    ``moment`` is the target integral of the density (i P*/a for the
    longer-crack model, 0 for the longer-inclusion model); it fixes the free
    polynomial constant.  The second free constant is eliminated analytically
    through the endpoint values of the principal-value components, which is
    what keeps the density integrable at +kappa.
    """
    qcfg = qcfg or QuadratureConfig()
    if not 0.0 < kappa < 1.0:
        raise DomainError(f"segment ratio kappa={kappa} must lie in (0, 1); "
                          "use the equal-length closed form at kappa = 1")
    if kappa > K1_SWITCH:
        warnings.warn(
            f"kappa={kappa} is close to 1; endpoint exponents nearly collide "
            "and the equal-length closed form is better conditioned",
            RuntimeWarning, stacklevel=2)
    if abs(consts.kappa - kappa) > 1e-12:
        consts = derive_constants(consts.nu, kappa)
    nu = consts.nu
    g = consts.gamma
    k = kappa
    CE = 1.0 / (2.0 * math.pi * (nu + 1.0) * consts.e0 ** 2)
    c_nu = -2j / ((1.0 + nu) * math.sqrt(consts.nu0))
    C0 = -moment / (2j * math.pi)

    # analytic factors of the two principal-value integrands
    def f_comp(t, j):
        t = np.asarray(t, dtype=float)
        return CE * radical_ratio(t, k) ** (-0.25 + 1j * g) \
            * np.sqrt(1.0 - t * t) ** (j - 1) * rhs(t)

    a1 = cheb_fit_auto(lambda t: f_comp(t, 1), k, rel_tol=qcfg.rel_tol * 1e-3,
                       n0=qcfg.fit_start, nmax=qcfg.fit_max)
    a2 = cheb_fit_auto(lambda t: f_comp(t, 2), k, rel_tol=qcfg.rel_tol * 1e-3,
                       n0=qcfg.fit_start, nmax=qcfg.fit_max)

    w_pv = JacobiWeight(k=k, alpha=0.5 + 2j * g, beta=0.5 - 2j * g)
    nmax = max(len(a1), len(a2)) - 1
    end_moments = chebt_moments(-0.5 + 2j * g, 0.5 - 2j * g, nmax)
    psi1k = complex(-k * np.sum(a1 * end_moments[:len(a1)]))
    psi2k = complex(-k * np.sum(a2 * end_moments[:len(a2)]))

    def pv_components(t):
        return (pv_weighted_transforms(w_pv, a1, t),
                pv_weighted_transforms(w_pv, a2, t))

    def bounded(t):
        """Y(t) = w(t) * density(t), assembled without forming the weight."""
        t = np.asarray(t, dtype=float)
        psi1, psi2 = pv_components(t)
        H = _assemble_bracket(k, consts, psi1, psi2, psi1k, psi2k, C0, t)
        w_t = (k - t) ** (0.5 + 2j * g) * (k + t) ** (0.5 - 2j * g)
        chi_w = c_nu * radical_ratio(t, k) ** (0.25 - 1j * g)
        return w_t * (-1j * (1.0 - nu) * rhs(t) / consts.nu1) + chi_w * H

    bounded_coeffs = cheb_fit_auto(bounded, k, rel_tol=qcfg.rel_tol * 1e-2,
                                   n0=qcfg.fit_start, nmax=qcfg.fit_max)

    if nodes is None:
        nodes = k * np.cos((2 * np.arange(DEFAULT_NODES) + 1) * np.pi
                           / (2 * DEFAULT_NODES))
    else:
        nodes = _check_interior(nodes, k)
    u = JacobiWeight(k=k, alpha=-0.5 - 2j * g, beta=-0.5 + 2j * g)
    values = u(nodes) * cheb_eval(bounded_coeffs, k, nodes)

    computed_moment = weighted_series_integral(u, bounded_coeffs)
    kind = "phi" if rhs.kind is RhsKind.MODEL2_GENERAL else "psi"
    meta = {"psi1_end": psi1k, "psi2_end": psi2k, "C0": C0,
            "fit_sizes": (len(a1), len(a2), len(bounded_coeffs)),
            "rhs_kind": rhs.kind.value,
            "pv_coeffs": (a1, a2), "pv_weight": w_pv}
    return DensitySolution(kind=kind, kappa=k, scale=rhs.scale, nu=nu,
                           gamma=g, nodes=np.asarray(nodes),
                           values=values,
                           endpoint_exponents=density_exponents(g),
                           moment=complex(computed_moment),
                           bounded_coeffs=bounded_coeffs, meta=meta)


def solve_model1(cfg: ProblemConfig,
                 qcfg: QuadratureConfig | None = None) -> DensitySolution:
    rhs = build_rhs_model1(cfg)
    consts = constants_for(cfg)
    return solve_closed_form(rhs.kappa, rhs, rhs.moment, consts, qcfg)


def solve_model2(cfg: ProblemConfig,
                 qcfg: QuadratureConfig | None = None) -> DensitySolution:
    rhs = build_rhs_model2(cfg)
    consts = derive_constants(cfg.nu, rhs.kappa)
    return solve_closed_form(rhs.kappa, rhs, rhs.moment, consts, qcfg)


# ----------------------------------------------------------------------
# closed-form segment transforms of the inverse-sqrt weight

def _invsqrt_cauchy_segment(x: float, lo: float, hi: float) -> float:
    """int_{lo}^{hi} dt / (sqrt(1-t^2) (t - x)) for x outside (lo, hi).

    Uses the elementary primitive
    -(1/S) log|(1 - t x + S sqrt(1-t^2)) / (t - x)|, S = sqrt(1-x^2);
    the endpoint t = 1 (or -1) is a finite limit of the primitive.
    """
    if lo < x < hi:
        raise DomainError("inside-segment point needs the principal value")
    S = math.sqrt(1.0 - x * x)

    def prim(t):
        s = math.sqrt(max(0.0, 1.0 - t * t))
        return -math.log(abs((1.0 - t * x + S * s) / (t - x))) / S

    return prim(hi) - prim(lo)


# ----------------------------------------------------------------------
# traces recovered from a solved density: the slip-rate jump of the
# longer-crack model on (-1, 1), and the traction jump of the
# longer-inclusion model on (-1, 1)

class RecoveredTrace:
    """Piecewise representation of a Cauchy-transformed density trace.

    value(t) = (c_T / (pi sqrt(1-t^2))) * T(t) + S(t)/sqrt(1-t^2)
               + c_loc * density(t) * [|t| < kappa],

    where T is the Cauchy transform of m(s) = sqrt(1-s^2) * density(s) over
    the density's segment and S collects the smooth closed-form load terms.
    The weight-borne part of T cancels c_loc * density exactly (the constants
    satisfy c_T cot(pi alpha) + pi c_loc = 0), so the trace is analytic
    inside the segment and carries the oscillatory weight only outside.
    """

    # relative distance from the segment tip where evaluation switches from
    # boundary-continuation to per-point refits
    _SWITCH = 0.005

    def __init__(self, source: DensitySolution, c_T: complex, c_loc: complex,
                 smooth_invsqrt: Callable, kind: str, scale: float):
        self.source = source
        self.kappa = source.kappa
        self.kind = kind
        self.scale = scale
        self.c_T = complex(c_T)
        self.c_loc = complex(c_loc)
        self.smooth_invsqrt = smooth_invsqrt
        self.u = source.weight
        alpha = self.u.alpha
        cot = np.cos(np.pi * alpha) / np.sin(np.pi * alpha)
        if abs(self.c_T * cot + np.pi * self.c_loc) > 1e-10 * abs(self.c_T):
            raise DomainError("trace constants do not satisfy the "
                              "weight-cancellation identity")
        self._sin_a = complex(np.sin(np.pi * alpha))
        # analytic factor of the transformed integrand
        k = self.kappa
        self.m2 = cheb_fit_auto(
            lambda s: np.sqrt(1.0 - s * s) * source.bounded_part(s), k)
        self._mu = self.u.t_moments(len(self.m2) - 1)

    # -- polynomial part of the transform, stable for all real t
    def _qpoly(self, t: np.ndarray) -> np.ndarray:
        k = self.kappa
        coeffs = self.m2
        q_prev = np.zeros_like(t, dtype=complex)   # exponent sum -1
        acc = coeffs[0] * q_prev
        if len(coeffs) > 1:
            q_cur = -(self._sin_a / np.pi) * self._mu[0] / k \
                + (t / k) * q_prev
            acc = acc + coeffs[1] * q_cur
            for n in range(1, len(coeffs) - 1):
                q_next = 2.0 * (t / k) * q_cur - q_prev \
                    - (self._sin_a / np.pi) * 2.0 * self._mu[n] / k
                acc = acc + coeffs[n + 1] * q_next
                q_prev, q_cur = q_cur, q_next
        return acc

    def _u_an(self, t: np.ndarray) -> np.ndarray:
        z = np.asarray(t, dtype=complex)
        return (z - self.kappa) ** self.u.alpha * (z + self.kappa) ** self.u.beta

    def transform(self, t) -> np.ndarray:
        """T(t) anywhere on (-1, 1) away from the segment tips."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty(t.shape, dtype=complex)
        k = self.kappa
        inside = np.abs(t) < k
        if np.any(inside):
            out[inside] = pv_weighted_transforms(self.u, self.m2, t[inside])
        outside = ~inside
        if np.any(outside):
            to = t[outside]
            res = np.empty(to.shape, dtype=complex)
            near = np.abs(to) / k - 1.0 < self._SWITCH
            if np.any(near):
                tn = to[near]
                cont = cheb_eval(self.m2, k, tn)
                res[near] = np.pi / self._sin_a \
                    * (self._u_an(tn) * cont - self._qpoly(tn))
            for i in np.nonzero(~near)[0]:
                res[i] = self._point_transform(to[i])
            out[outside] = res
        return out

    def _point_transform(self, t0: float) -> complex:
        """Off-segment transform by a dedicated fit of m(s)/(s - t0)."""
        k = self.kappa
        fit = cheb_fit_auto(
            lambda s: cheb_eval(self.m2, k, s) / (s - t0), k,
            rel_tol=1e-13, n0=64, nmax=1 << 15)
        return complex(weighted_series_integral(self.u, fit))

    def evaluate(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        k = self.kappa
        if np.any((np.abs(np.abs(t) - k) < 1e-7 * k) | (np.abs(t) >= 1.0)):
            raise EndpointError("trace evaluation too close to a tip")
        s = np.sqrt(1.0 - t * t)
        out = (self.c_T / (np.pi * s)) * self.transform(t) \
            + np.asarray(self.smooth_invsqrt(t), dtype=complex) / s
        inside = np.abs(t) < k
        if np.any(inside):
            out[inside] += self.c_loc * self.u(t[inside]) \
                * self.source.bounded_part(t[inside])
        return out

    # -- the same trace written without the cancelling weight parts:
    # inside:  value = -(c_T/(pi s)) * pi/sin * qpoly + S/s
    # outside: value =  (c_T/(pi s)) * pi/sin * (u_an m2c - qpoly) + S/s
    def _inside_smooth(self, t: np.ndarray) -> np.ndarray:
        s = np.sqrt(1.0 - t * t)
        return (-self.c_T / self._sin_a * self._qpoly(t)
                + np.asarray(self.smooth_invsqrt(t), dtype=complex)) / s

    def integral(self) -> complex:
        """Full-range integral of the trace over (-1, 1).

        The mid-segment part is analytic-over-sqrt and is fitted directly;
        the outer parts are integrated by swapping the transform order, which
        turns them into smooth functions against the density weight.
        """
        k = self.kappa
        mid_fit = cheb_fit_auto(lambda t: self._inside_smooth(t)
                                * np.sqrt(1.0 - t * t), k)
        w00 = JacobiWeight(k=k, alpha=-0.5, beta=-0.5)
        # int_{-k}^{k} f(t)/sqrt(1-t^2) dt with f analytic: map to the
        # (0,0)-moments of f(t)/sqrt((1-t^2)/(k^2-t^2))  -- simpler: fit
        # f(t)/sqrt(1-t^2)*sqrt(k^2-t^2) against the (-1/2,-1/2) weight
        mid_fit2 = cheb_fit_auto(
            lambda t: self._inside_smooth(t) * np.sqrt(k * k - t * t), k)
        total = weighted_series_integral(w00, mid_fit2)
        del mid_fit
        for lo, hi in ((k, 1.0), (-1.0, -k)):
            total += self._outer_integral(lo, hi)
        return complex(total)

    def _outer_integral(self, lo: float, hi: float,
                        pole: float | None = None) -> complex:
        """int over the outer piece of value(t) (optionally / (t - pole))."""
        k = self.kappa
        # transform part by swapping integration order
        def jfun(sig):
            sig = np.atleast_1d(sig)
            if pole is None:
                return np.array([
                    _invsqrt_cauchy_segment(s, lo, hi) * (-1.0)
                    for s in sig])
            cpole = _invsqrt_cauchy_segment(pole, lo, hi)
            return np.array([
                (cpole - _invsqrt_cauchy_segment(s, lo, hi)) / (s - pole)
                for s in sig])
        jfit = cheb_fit_auto(
            lambda sig: cheb_eval(self.m2, k, sig) * jfun(sig), k)
        total = (self.c_T / np.pi) * weighted_series_integral(self.u, jfit)
        # smooth load terms against the inverse-sqrt factor
        def rest(t, sL, sR):
            v = np.asarray(self.smooth_invsqrt(t), dtype=complex)
            if pole is not None:
                v = v / (t - pole)
            return v / np.sqrt((1.0 - t) * (1.0 + t))
        total += gauss_legendre_panels(rest, lo, hi, 0.0, 0.0, n_gl=24)
        return complex(total)

    def cauchy_pv(self, t0: float) -> complex:
        """PV int_{-1}^{1} value(tau)/(tau - t0) dtau for |t0| < kappa."""
        k = self.kappa
        if not abs(t0) < k:
            raise EndpointError("transform point must lie inside the segment")
        # mid part: analytic-over-sqrt; principal value via the log-seeded
        # polynomial transform against the (-1/2,-1/2) weight
        mid_fit = cheb_fit_auto(
            lambda t: self._inside_smooth(t) * np.sqrt(k * k - t * t), k)
        w00 = JacobiWeight(k=k, alpha=-0.5, beta=-0.5)
        total = pv_weighted_transforms(w00, mid_fit, np.array([t0]))[0]
        for lo, hi in ((k, 1.0), (-1.0, -k)):
            total += self._outer_integral(lo, hi, pole=t0)
        return complex(total)


def recover_phi(psi: DensitySolution, cfg: ProblemConfig) -> DensitySolution:
    """Slip-rate jump on the whole crack (-1, 1) from the solved traction jump.

    phi(at) = (1/(pi a sqrt(1-t^2))) [2a T(t) + 4a S_sigma(t) - (1-nu) P*]
              - i (1-nu) psi(at) on the inclusion span.
    """
    if psi.kind != "psi":
        raise DomainError("phi recovery needs the traction-jump density")
    nu = cfg.nu
    a = cfg.a
    pstar = cfg.p_star
    prof = cfg.profiles
    if prof.sigma_background is not None:
        d = _profile_pv_series(lambda tau: np.asarray(
            prof.sigma_background(a * tau), dtype=complex))
    else:
        d = None

    def smooth_invsqrt(t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, -(1.0 - nu) * pstar / (np.pi * a),
                      dtype=complex)
        if d is not None:
            # 4 S_sigma / pi with S_sigma = -pi sum d_m T_{m+1}
            out -= 4.0 * cheb_eval(np.concatenate(([0.0 + 0j], d)), 1.0, t)
        return out

    trace = RecoveredTrace(psi, c_T=2.0, c_loc=-1j * (1.0 - nu),
                           smooth_invsqrt=smooth_invsqrt, kind="phi", scale=a)
    grid = np.cos((2 * np.arange(DEFAULT_NODES) + 1) * np.pi
                  / (2 * DEFAULT_NODES))
    grid = grid[np.abs(np.abs(grid) - psi.kappa) > 1e-3]
    values = trace.evaluate(grid)
    sol = DensitySolution(kind="phi", kappa=1.0, scale=a, nu=nu,
                          gamma=psi.gamma, nodes=grid, values=values,
                          endpoint_exponents=EndpointExponents(-0.5, -0.5),
                          moment=trace.integral(),
                          bounded_coeffs=np.zeros(0, dtype=complex),
                          meta={"trace": trace, "inner_kappa": psi.kappa})
    return sol


def recover_psi_model2(phi: DensitySolution, cfg: ProblemConfig) -> DensitySolution:
    """Traction jump across the whole inclusion (-1, 1) for the longer inclusion.

    psi(b s) = (2/(pi nu1 sqrt(1-s^2))) T(s) - (i(1-nu)/nu1) phi(b s)
               + i P*/(pi b sqrt(1-s^2)) + background-displacement terms.
    """
    if phi.kind != "phi":
        raise DomainError("traction recovery needs the slip-rate density")
    nu = cfg.nu
    b = cfg.b
    nu1 = (3.0 - nu) * (1.0 + nu)
    pstar = cfg.p_star
    prof = cfg.profiles
    if prof.h_prime is not None or prof.w_background is not None:
        hp = prof.h_prime or _zero
        wb = prof.w_background or _zero
        d = _profile_pv_series(lambda tau: (
            1j * np.asarray(hp(b * tau), dtype=complex)
            - np.asarray(wb(b * tau), dtype=complex)))
    else:
        d = None

    def smooth_invsqrt(s):
        s = np.asarray(s, dtype=float)
        out = np.full(s.shape, 1j * pstar / (np.pi * b), dtype=complex)
        if d is not None:
            # (2/(pi nu1)) * 2E * (-pi) sum d_m T_{m+1}
            out -= (4.0 * cfg.E / nu1) \
                * cheb_eval(np.concatenate(([0.0 + 0j], d)), 1.0, s)
        return out

    trace = RecoveredTrace(phi, c_T=2.0 / nu1, c_loc=-1j * (1.0 - nu) / nu1,
                           smooth_invsqrt=smooth_invsqrt, kind="psi", scale=b)
    grid = np.cos((2 * np.arange(DEFAULT_NODES) + 1) * np.pi
                  / (2 * DEFAULT_NODES))
    grid = grid[np.abs(np.abs(grid) - phi.kappa) > 1e-3]
    values = trace.evaluate(grid)
    return DensitySolution(kind="psi", kappa=1.0, scale=b, nu=nu,
                           gamma=phi.gamma, nodes=grid, values=values,
                           endpoint_exponents=EndpointExponents(-0.5, -0.5),
                           moment=trace.integral(),
                           bounded_coeffs=np.zeros(0, dtype=complex),
                           meta={"trace": trace, "inner_kappa": phi.kappa})


# ----------------------------------------------------------------------
# limiting regimes

def limit_k0_sifs(nu: float, P: float, a: float):
    """Analytic stress intensity factors as the inclusion shrinks away.

    sqrt(a) K_I / P = 1/(2 sqrt(pi)) independent of nu;
    sqrt(a) K_II^pm / P = +-(1 - nu)/(4 sqrt(pi)).
    """
    from .post import SifResult
    k1 = P / (2.0 * math.sqrt(math.pi * a))
    k2 = (1.0 - nu) * P / (4.0 * math.sqrt(math.pi * a))
    return SifResult(K1_plus=k1, K1_minus=k1, K2_plus=k2, K2_minus=-k2,
                     a=a, P=P, nu=nu, k=0.0, route="analytic-limit")


def _equal_rhs(cfg: ProblemConfig) -> RhsFunction:
    """Right-hand side for the equal-length configuration (segment ratio 1)."""
    c = ProblemConfig(model=Model.MODEL1, a=cfg.a, b=cfg.a * (1.0 - 1e-15),
                      nu=cfg.nu, P=cfg.P, sigma=cfg.sigma, E=cfg.E,
                      profiles=cfg.profiles)
    base = build_rhs_model1(c)
    return RhsFunction(kind=base.kind, kappa=1.0, scale=cfg.a,
                       moment=base.moment, smooth=base.smooth,
                       invsqrt=base.invsqrt)


def limit_k1_density(cfg: ProblemConfig,
                     qcfg: QuadratureConfig | None = None) -> DensitySolution:
    """Exact density of the equal-length configuration (a = b).

    For the pure point load the density is the explicit two-weight form; a
    general right-hand side goes through the limiting representation with the
    weights (1-t)^{3/4+ig}(1+t)^{1/4-ig} and (1-t)^{1/4+ig}(1+t)^{3/4-ig}.
    """
    qcfg = qcfg or QuadratureConfig()
    if abs(cfg.a - cfg.b) > 1e-12 * cfg.a and cfg.model is not Model.EQUAL:
        raise DomainError("equal-length form needs a = b")
    rhs = _equal_rhs(cfg)
    consts = derive_constants(cfg.nu, 1.0)
    nu = cfg.nu
    g = consts.gamma
    a = cfg.a
    pstar = cfg.p_star
    nu1 = consts.nu1
    point_load = rhs.kind is RhsKind.MODEL1_POINT_LOAD

    if point_load:
        pref = -pstar / (2.0 * math.pi * a * (1.0 + nu)
                         * math.sqrt(consts.nu0))

        def density(t):
            t = np.asarray(t, dtype=float)
            return pref * (
                (1.0 - t) ** (-0.25 - 1j * g) * (1.0 + t) ** (-0.75 + 1j * g)
                / consts.e_minus
                - 1j / consts.e_plus
                * (1.0 - t) ** (-0.75 - 1j * g) * (1.0 + t) ** (-0.25 + 1j * g))

        # equilibrium integral, exact through the Beta-class moments
        m1 = chebt_moments(-0.25 - 1j * g, -0.75 + 1j * g, 0)[0]
        m2 = chebt_moments(-0.75 - 1j * g, -0.25 + 1j * g, 0)[0]
        moment = complex(pref * (m1 / consts.e_minus
                                 - 1j * m2 / consts.e_plus))
        meta = {"route": "point-load"}
    else:
        # general route: two weighted Cauchy transforms per split part of g
        w1s = JacobiWeight(k=1.0, alpha=0.75 + 1j * g, beta=0.25 - 1j * g)
        w1i = JacobiWeight(k=1.0, alpha=0.25 + 1j * g, beta=-0.25 - 1j * g)
        w2s = JacobiWeight(k=1.0, alpha=0.25 + 1j * g, beta=0.75 - 1j * g)
        w2i = JacobiWeight(k=1.0, alpha=-0.25 + 1j * g, beta=0.25 - 1j * g)
        cs = cheb_fit_auto(lambda t: np.asarray(rhs.smooth(t), dtype=complex),
                           1.0, rel_tol=qcfg.rel_tol * 1e-2)
        ci = cheb_fit_auto(lambda t: np.asarray(rhs.invsqrt(t), dtype=complex),
                           1.0, rel_tol=qcfg.rel_tol * 1e-2)
        c_pm = pstar / (a * (1.0 + nu) * math.sqrt(consts.nu0))

        def density(t):
            t = np.asarray(t, dtype=float)
            I1 = pv_weighted_transforms(w1s, cs, t) \
                + pv_weighted_transforms(w1i, ci, t)
            I2 = pv_weighted_transforms(w2s, cs, t) \
                + pv_weighted_transforms(w2i, ci, t)
            om1 = (1.0 - t) ** (0.75 + 1j * g) * (1.0 + t) ** (0.25 - 1j * g)
            om2 = (1.0 - t) ** (0.25 + 1j * g) * (1.0 + t) ** (0.75 - 1j * g)
            return (1j * (nu - 1.0) * rhs(t) / nu1
                    - (I1 / nu1 - 1j * consts.e_plus * c_pm) / (np.pi * om1)
                    - (I2 / nu1 - consts.e_minus * c_pm) / (np.pi * om2))

        # moment: integrate each structural part with its own weight class.
        # Splitting I_j(t) = pi cot(pi alpha) w(t) C(t) - pi q(t)/sin(pi alpha)
        # per part, the density integral decomposes into plain series
        # integrals (cot parts, whose weights cancel against 1/omega_j) and
        # inverse-omega weighted integrals (polynomial parts and constants).
        smooth_int = complex(np.sum(cs * chebt_moments(0.0, 0.0,
                                                       len(cs) - 1)))
        invsq_int = complex(np.sum(ci * chebt_moments(-0.5, -0.5,
                                                      len(ci) - 1)))
        moment = 1j * (nu - 1.0) / nu1 * (smooth_int + invsq_int)
        for wS, wI, cpm_term in (
                (w1s, w1i, 1j * consts.e_plus * c_pm),
                (w2s, w2i, consts.e_minus * c_pm)):
            for wpart, cpart, part_int in ((wS, cs, smooth_int),
                                           (wI, ci, invsq_int)):
                cot = complex(np.cos(np.pi * wpart.alpha)
                              / np.sin(np.pi * wpart.alpha))
                inv_sin = 1.0 / complex(np.sin(np.pi * wpart.alpha))
                moment += -cot / nu1 * part_int
                qfit = _poly_series(wpart, cpart)
                inv_mom = chebt_moments(-wS.alpha, -wS.beta, len(qfit) - 1)
                moment += (inv_sin / nu1) * complex(np.sum(qfit * inv_mom))
            inv0 = chebt_moments(-wS.alpha, -wS.beta, 0)[0]
            moment += cpm_term / np.pi * complex(inv0)
        meta = {"route": "general"}

    grid = np.cos((2 * np.arange(DEFAULT_NODES) + 1) * np.pi
                  / (2 * DEFAULT_NODES)) * (1.0 - 1e-9)
    values = density(grid)
    sol = DensitySolution(
        kind="psi", kappa=1.0, scale=a, nu=nu, gamma=g, nodes=grid,
        values=values,
        endpoint_exponents=EndpointExponents(at_plus_k=-0.75 - 1j * g,
                                             at_minus_k=-0.75 + 1j * g),
        moment=moment, bounded_coeffs=np.zeros(0, dtype=complex),
        meta={**meta, "evaluator": density})
    return sol


def _poly_series(w: JacobiWeight, coeffs: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients (in t/k) of the polynomial transform part.

    q(t) = sum_n coeffs[n] q_n(t) where q_n is the polynomial part of the
    weighted Cauchy transform of w * T_n; returned in the Chebyshev basis by
    running the recurrence on coefficient vectors.
    """
    k = w.k
    nmax = len(coeffs) - 1
    mu = w.t_moments(nmax)
    sin_a = complex(np.sin(np.pi * w.alpha))
    s = w.exponent_sum
    size = nmax + 2 + max(0, s)
    out = np.zeros(size, dtype=complex)

    def addmul_x(vec):
        """Chebyshev coefficients of (t/k) * series(vec)."""
        res = np.zeros(len(vec) + 1, dtype=complex)
        res[1] += vec[0]
        for m in range(1, len(vec)):
            res[m - 1] += 0.5 * vec[m]
            res[m + 1] += 0.5 * vec[m]
        return res

    if s == 1:
        q_prev = np.zeros(2, dtype=complex)
        q_prev[0] = (w.beta - w.alpha) * k
        q_prev[1] = k            # t = k * T_1(t/k)
    elif s == 0:
        q_prev = np.array([1.0 + 0j])
    elif s == -1:
        q_prev = np.array([0.0 + 0j])
    else:
        raise DomainError(f"unsupported exponent sum {s}")
    out[:len(q_prev)] += coeffs[0] * q_prev
    if nmax >= 1:
        q_cur = addmul_x(q_prev)
        q_cur[0] += -(sin_a / np.pi) * mu[0] / k
        out[:len(q_cur)] += coeffs[1] * q_cur
        for n in range(1, nmax):
            q_next = 2.0 * addmul_x(q_cur)
            q_next[:len(q_prev)] -= q_prev
            q_next[0] += -(sin_a / np.pi) * 2.0 * mu[n] / k
            out[:len(q_next)] += coeffs[n + 1] * q_next
            q_prev, q_cur = q_cur, q_next
    return out
