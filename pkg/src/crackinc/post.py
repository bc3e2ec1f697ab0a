"""Physical outputs: stress intensity factors, contact tractions, boundary
traces, and endpoint reports.

The complex combination K_II + i K_I at each crack tip comes from one
weighted integral of the traction-jump density.  Two algebraically equal
routes are provided: the direct weighted integral of the density, and the
rearranged form with the logarithmic load term extracted.  Their agreement
(~1e-12 in practice) pins the sign conventions of the rearrangement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, EndpointError
from .params import DerivedConstants, Model, ProblemConfig, constants_for, \
    derive_constants
from .quadrature import (JacobiWeight, QuadratureConfig, cheb_eval,
                         cheb_fit_auto, pv_weighted_transforms,
                         weighted_series_integral)
from .solver import (DensitySolution, RecoveredTrace, RhsKind,
                     _assemble_bracket, _profile_pv_series, build_rhs_model1,
                     solve_model1)
from .special import radical_ratio


@dataclass(frozen=True)
class SifResult:
    """Stress intensity factors at the two crack tips.

    K1 opens the crack, K2 shears it; plus/minus refers to the tip at
    x = +a / x = -a.  ``normalized`` values are sqrt(a) K / P.
    """

    K1_plus: float
    K1_minus: float
    K2_plus: float
    K2_minus: float
    a: float
    P: float
    nu: float
    k: float
    route: str = "direct"
    route_residual: float = 0.0

    @property
    def normalized(self) -> tuple[float, float, float, float]:
        s = math.sqrt(self.a) / self.P
        return (self.K1_plus * s, self.K1_minus * s,
                self.K2_plus * s, self.K2_minus * s)


@dataclass
class TractionTrace:
    """Contact traction samples on the lower inclusion face.

    ``sig12`` and ``sig22`` are the shear and normal tractions at x = a t,
    y -> 0-; ``bounded_factor`` is the trace with the analytic endpoint
    weight divided out, which stays finite at the inclusion tips.
    """

    t: np.ndarray
    sig12: np.ndarray
    sig22: np.ndarray
    bounded_factor: np.ndarray
    endpoint_exponent: complex
    k: float
    nu: float
    P: float
    fingerprint: str = ""


def _density_weighted_integral(sol: DensitySolution, extra) -> complex:
    """int_{-kap}^{kap} extra(t) * density(t) dt through the bounded part."""
    u = sol.weight
    fit = cheb_fit_auto(
        lambda t: np.asarray(extra(t), dtype=complex) * sol.bounded_part(t),
        sol.kappa)
    return complex(weighted_series_integral(u, fit))


def _sigma_term(cfg: ProblemConfig, sign: int) -> complex:
    """2 int_{-a}^{a} ((a+x)/(a-x))^{sign/2} sigma(x) dx, or 0 without profile."""
    sb = cfg.profiles.sigma_background
    if sb is None:
        return 0.0 + 0.0j
    fit = cheb_fit_auto(lambda tau: np.asarray(sb(cfg.a * tau), dtype=complex),
                        1.0)
    w = JacobiWeight(k=1.0, alpha=-0.5 * sign, beta=0.5 * sign)
    return 2.0 * cfg.a * weighted_series_integral(w, fit)


def sif_general(psi: DensitySolution, cfg: ProblemConfig,
                qcfg: QuadratureConfig | None = None) -> SifResult:
    """Stress intensity factors from the density by direct weighted integrals.

    K_II^pm + i K_I^pm = (1/(2 sqrt(pi a))) [ int ((a+x)/(a-x))^{pm 1/2}
        psi dx + 2 int ((a+x)/(a-x))^{pm 1/2} sigma dx pm (1-nu) P*/2 ].
    """
    if psi.kind != "psi" or psi.kappa >= 1.0:
        raise DomainError("direct route needs the longer-crack traction jump")
    a, nu, pstar = cfg.a, cfg.nu, cfg.p_star
    out = {}
    for sign in (+1, -1):
        def ratio(t, sign=sign):
            return ((1.0 + t) / (1.0 - t)) ** (0.5 * sign)
        B = a * _density_weighted_integral(psi, ratio) \
            + _sigma_term(cfg, sign) + sign * (1.0 - nu) * pstar / 2.0
        out[sign] = B / (2.0 * math.sqrt(math.pi * a))
    return SifResult(K1_plus=out[+1].imag, K1_minus=out[-1].imag,
                     K2_plus=out[+1].real, K2_minus=out[-1].real,
                     a=a, P=cfg.P, nu=nu, k=psi.kappa, route="direct")


def sif_point_load(cfg: ProblemConfig,
                   qcfg: QuadratureConfig | None = None,
                   psi: DensitySolution | None = None) -> SifResult:
    """Point-load stress intensity factors by the rearranged route.

    K_II^pm + i K_I^pm = (1/(2 sqrt(pi a))) [ pm (1-nu) P / 2
        - i (1-nu)^2 P/(2 pi nu1) log((1+k)/(1-k))
        + int chi_pm(tau) dtau / sqrt(k^2 - tau^2) ],
    with the weighted integral split into its analytic-bracket part
    (exact moments) and the closed-form load part.
    """
    if not cfg.profiles.all_zero:
        raise DomainError("rearranged route is for the point-load case")
    if psi is None:
        psi = solve_model1(cfg, qcfg)
    a, nu = cfg.a, cfg.nu
    P = cfg.p_star
    k = psi.kappa
    g = psi.gamma
    consts = derive_constants(nu, k)
    meta = psi.meta
    a1, a2 = meta["pv_coeffs"]
    w_pv = meta["pv_weight"]
    psi1k, psi2k, C0 = meta["psi1_end"], meta["psi2_end"], meta["C0"]
    CE = 1.0 / (2.0 * math.pi * (nu + 1.0) * consts.e0 ** 2)
    cot = complex(np.cos(np.pi * w_pv.alpha) / np.sin(np.pi * w_pv.alpha))
    rhs = build_rhs_model1(cfg)
    c_amp = -2j * a / ((1.0 + nu) * math.sqrt(consts.nu0))

    def bracket_analytic(t):
        """A(t): the bracket with its weight-borne part removed."""
        t = np.asarray(t, dtype=float)
        psi1 = pv_weighted_transforms(w_pv, a1, t)
        psi2 = pv_weighted_transforms(w_pv, a2, t)
        H = _assemble_bracket(k, consts, psi1, psi2, psi1k, psi2k, C0, t)
        wpart = 2.0 * np.pi * cot * CE * w_pv(t) \
            * radical_ratio(t, k) ** (-0.25 + 1j * g) * rhs(t)
        return H - wpart

    log_term = math.log((1.0 + k) / (1.0 - k))
    u = JacobiWeight(k=k, alpha=-w_pv.alpha, beta=-w_pv.beta)
    out = {}
    for sign in (+1, -1):
        def f(t, sign=sign):
            t = np.asarray(t, dtype=float)
            return c_amp * ((1.0 + t) / (1.0 - t)) ** (0.5 * sign) \
                * radical_ratio(t, k) ** (0.25 - 1j * g) * bracket_analytic(t)
        fit = cheb_fit_auto(f, k)
        weighted = complex(weighted_series_integral(u, fit)) \
            + 1j * (1.0 - nu) ** 2 * P * log_term / (2.0 * math.pi * consts.nu1)
        B = sign * (1.0 - nu) * P / 2.0 \
            - 1j * (1.0 - nu) ** 2 * P * log_term / (2.0 * math.pi * consts.nu1) \
            + weighted
        out[sign] = B / (2.0 * math.sqrt(math.pi * a))
    return SifResult(K1_plus=out[+1].imag, K1_minus=out[-1].imag,
                     K2_plus=out[+1].real, K2_minus=out[-1].real,
                     a=a, P=cfg.P, nu=nu, k=k, route="rearranged")


def sif_both_routes(cfg: ProblemConfig,
                    qcfg: QuadratureConfig | None = None
                    ) -> tuple[SifResult, SifResult, float]:
    """Run both routes and report their normalized disagreement."""
    psi = solve_model1(cfg, qcfg)
    direct = sif_general(psi, cfg, qcfg)
    rearranged = sif_point_load(cfg, qcfg, psi=psi)
    d = max(abs(np.array(direct.normalized) - np.array(rearranged.normalized)))
    direct = SifResult(**{**direct.__dict__, "route_residual": d})
    return direct, rearranged, d


# ----------------------------------------------------------------------
# contact tractions

def contact_traction(psi: DensitySolution, cfg: ProblemConfig,
                     nodes: np.ndarray | None = None) -> TractionTrace:
    """Traction vector on the lower inclusion face, from the explicit form.

    sig12 + i sig22 at (a t, 0-) combines the load terms with the weighted
    bracket; the bounded factor (endpoint weight divided out) is assembled
    without forming the singular weight.
    """
    if psi.kind != "psi" or psi.kappa >= 1.0:
        raise DomainError("contact traction needs the longer-crack solution")
    a, nu = cfg.a, cfg.nu
    nu1 = (3.0 - nu) * (1.0 + nu)
    pstar = cfg.p_star
    k = psi.kappa
    g = psi.gamma
    consts = derive_constants(nu, k)
    if nodes is None:
        nodes = k * np.cos((2 * np.arange(73) + 1) * np.pi / 146)
    t = np.asarray(nodes, dtype=float)
    meta = psi.meta
    a1, a2 = meta["pv_coeffs"]
    w_pv = meta["pv_weight"]
    psi1, psi2 = (pv_weighted_transforms(w_pv, a1, t),
                  pv_weighted_transforms(w_pv, a2, t))
    H = _assemble_bracket(k, consts, psi1, psi2, meta["psi1_end"],
                          meta["psi2_end"], meta["C0"], t)

    prof = cfg.profiles
    sb = prof.sigma_background
    hp = prof.h_prime
    wb = prof.w_background
    if sb is not None:
        d = _profile_pv_series(lambda tau: np.asarray(sb(a * tau),
                                                      dtype=complex))
        s_series = cheb_eval(np.concatenate(([0j], d)), 1.0, t)
        sigma_t = np.asarray(sb(a * t), dtype=complex)
    else:
        s_series = np.zeros_like(t, dtype=complex)
        sigma_t = np.zeros_like(t, dtype=complex)
    hp_t = np.asarray(hp(a * t), dtype=complex) if hp is not None else 0.0
    wb_t = np.asarray(wb(a * t), dtype=complex) if wb is not None else 0.0

    s = np.sqrt(1.0 - t * t)
    smooth = -4.0 * sigma_t / nu1 + (1.0 - nu) / nu1 * (
        cfg.E * hp_t + 1j * cfg.E * wb_t
        + 2j * s_series / s
        + 1j * (1.0 - nu) * pstar / (2.0 * math.pi * a * s))
    chi = -2j / ((1.0 + nu) * math.sqrt(consts.nu0)) \
        * (k - t) ** (-0.5 - 2j * g) * (k + t) ** (-0.5 + 2j * g) \
        * radical_ratio(t, k) ** (0.25 - 1j * g)
    traction = smooth - chi * H
    w_t = (k - t) ** (0.5 + 2j * g) * (k + t) ** (0.5 - 2j * g)
    chi_w = -2j / ((1.0 + nu) * math.sqrt(consts.nu0)) \
        * radical_ratio(t, k) ** (0.25 - 1j * g)
    bounded = w_t * smooth - chi_w * H
    return TractionTrace(t=t, sig12=traction.real, sig22=traction.imag,
                         bounded_factor=bounded,
                         endpoint_exponent=-0.5 - 2j * g,
                         k=k, nu=nu, P=cfg.P, fingerprint=cfg.fingerprint())


def contact_traction_subtraction(psi: DensitySolution, phi: DensitySolution,
                                 cfg: ProblemConfig,
                                 nodes: np.ndarray) -> np.ndarray:
    """Traction by the subtraction route: upper-face trace minus the jump.

    sig12 + i sig22 at (x, 0-) = sigma_plus(x) - psi(x), with sigma_plus
    rebuilt from the boundary-value representation (no boundary condition
    assumed).  Agreement with :func:`contact_traction` certifies both the
    representation and the solved densities.
    """
    sp, _, _, _ = boundary_values(psi, phi, cfg, np.asarray(nodes) * cfg.a)
    return sp - psi.evaluate(np.asarray(nodes, dtype=float))


def boundary_values(psi: DensitySolution, phi: DensitySolution,
                    cfg: ProblemConfig, x) -> tuple:
    """Upper/lower traces (sigma_plus, sigma_minus, w_plus, w_minus) at x.

    Evaluation is restricted to the contact zone |x| < b where every
    transform is available in principal-value form:

        sigma_pm = pm psi/2 + (i(1-nu)/(4 pi)) C_psi + (1/(4 pi)) C_phi,
        E w_pm  = pm phi/2 - (i(1-nu)/(4 pi)) C_phi - (nu1/(4 pi)) C_psi,

    with C_rho the Cauchy principal-value transform of the density rho.
    """
    a, nu = cfg.a, cfg.nu
    nu1 = (3.0 - nu) * (1.0 + nu)
    t = np.atleast_1d(np.asarray(x, dtype=float)) / a
    k = psi.kappa
    if np.any(np.abs(t) >= k):
        raise EndpointError("boundary traces are evaluated in the contact zone")
    trace: RecoveredTrace = phi.meta["trace"]
    c_psi = pv_weighted_transforms(psi.weight, psi.bounded_coeffs, t)
    c_phi = np.array([trace.cauchy_pv(float(ti)) for ti in t])
    psi_t = psi.evaluate(t)
    phi_t = trace.evaluate(t)
    sigma_p = 0.5 * psi_t + 1j * (1.0 - nu) / (4.0 * np.pi) * c_psi \
        + c_phi / (4.0 * np.pi)
    sigma_m = sigma_p - psi_t
    ew_p = 0.5 * phi_t - 1j * (1.0 - nu) / (4.0 * np.pi) * c_phi \
        - nu1 / (4.0 * np.pi) * c_psi
    ew_m = ew_p - phi_t
    return sigma_p, sigma_m, ew_p / cfg.E, ew_m / cfg.E


# ----------------------------------------------------------------------
# endpoint report

@dataclass(frozen=True)
class EndpointReport:
    exponent_plus: complex
    exponent_minus: complex
    amplitude_plus: complex
    amplitude_minus: complex
    fitted_slope_plus: float
    fitted_slope_minus: float


def endpoint_report(phi: DensitySolution, cfg: ProblemConfig,
                    psi: DensitySolution | None = None) -> EndpointReport:
    """Crack-tip exponents and amplitudes of the slip-rate jump.

    Amplitudes come from the defining weighted integrals
    phi0_pm = -+ (1/pi) sqrt(2/a) [ int ((a+x)/(a-x))^{pm1/2} psi dx
              + 2 int (...) sigma dx pm (1-nu) P*/2 ];
    slopes are least-squares fits of log|phi| against log distance, a
    consistency check of the stated -1/2 exponents.
    """
    if phi.kind != "phi" or "trace" not in phi.meta:
        raise DomainError("endpoint report needs the recovered slip-rate jump")
    if psi is None:
        raise DomainError("the solved traction jump is required for amplitudes")
    a, nu, pstar = cfg.a, cfg.nu, cfg.p_star
    amps = {}
    for sign in (+1, -1):
        def ratio(t, sign=sign):
            return ((1.0 + t) / (1.0 - t)) ** (0.5 * sign)
        B = a * _density_weighted_integral(psi, ratio) \
            + _sigma_term(cfg, sign) + sign * (1.0 - nu) * pstar / 2.0
        amps[sign] = -sign * math.sqrt(2.0 / a) / math.pi * B

    trace: RecoveredTrace = phi.meta["trace"]
    slopes = {}
    for sign in (+1, -1):
        d = np.geomspace(1e-4, 1e-2, 9)
        tt = sign * (1.0 - d)
        vals = np.abs(trace.evaluate(tt))
        slope = np.polyfit(np.log(d), np.log(vals), 1)[0]
        slopes[sign] = float(slope)
    return EndpointReport(exponent_plus=-0.5, exponent_minus=-0.5,
                          amplitude_plus=amps[+1], amplitude_minus=amps[-1],
                          fitted_slope_plus=slopes[+1],
                          fitted_slope_minus=slopes[-1])


# ----------------------------------------------------------------------
# CSV emission (deterministic formatting)

SIF_HEADER = ["k", "nu", "K1p_norm", "K1m_norm", "K2p_norm", "K2m_norm",
              "residual"]
TRACE_HEADER = ["t", "sig12_over_P", "sig22_over_P", "bounded_factor_re",
                "bounded_factor_im"]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def sif_csv_rows(results: Iterable[SifResult]) -> list[list[str]]:
    rows = []
    for r in results:
        n = r.normalized
        rows.append([_fmt(r.k), _fmt(r.nu), _fmt(n[0]), _fmt(n[1]),
                     _fmt(n[2]), _fmt(n[3]), _fmt(r.route_residual)])
    return rows


def write_sif_csv(path, results: Sequence[SifResult], fingerprint: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# crackinc sif; normalized by sqrt(a)/P (dimensionless); "
                 f"config={fingerprint}\n")
        fh.write(",".join(SIF_HEADER) + "\n")
        for row in sif_csv_rows(results):
            fh.write(",".join(row) + "\n")


def write_trace_csv(path, trace: TractionTrace):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# crackinc trace; tractions normalized by P (1/length^2 "
                 f"scale cancels); config={trace.fingerprint}\n")
        fh.write(",".join(TRACE_HEADER) + "\n")
        for i in range(len(trace.t)):
            fh.write(",".join([
                _fmt(trace.t[i]),
                _fmt(trace.sig12[i] / trace.P),
                _fmt(trace.sig22[i] / trace.P),
                _fmt(trace.bounded_factor[i].real),
                _fmt(trace.bounded_factor[i].imag)]) + "\n")
