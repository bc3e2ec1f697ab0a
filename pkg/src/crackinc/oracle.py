"""Independent verification layer.

Nothing here reuses the closed-form assembly: densities are taken as sampled
values plus endpoint-exponent metadata, interpolated barycentrically after
the analytic weight is divided out, and plugged back into the governing
equation with pairing-form principal values over graded Gauss-Legendre
panels.  Matrix factorization and the classical Hilbert-transform identities
are checked directly against their defining statements.
"""

from __future__ import annotations

import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .params import DerivedConstants, Model, ProblemConfig, derive_constants
from .quadrature import QuadratureConfig, gauss_legendre_panels, pv_integral
from .solver import DensitySolution, RhsFunction, limit_k1_density
from .special import factor_matrices, matrix_coefficient

THETA_TOL = 1e-5          # iterated principal values are the most delicate
RESIDUAL_TOL = 1e-6
FACTORIZATION_TOL = 1e-10
IDENTITY_TOL = 1e-9
ALGEBRAIC_TOL = 1e-12


# ----------------------------------------------------------------------
# barycentric interpolation on the sampled bounded part

class _Barycentric:
    """Barycentric interpolant on a first-kind Chebyshev grid."""

    def __init__(self, nodes: np.ndarray, values: np.ndarray, k: float):
        self.x = np.asarray(nodes, dtype=float)
        self.y = np.asarray(values, dtype=complex)
        n = len(self.x)
        j = np.arange(n)
        # solver grids are k cos((2j+1)pi/2n); fall back to generic weights
        expected = k * np.cos((2 * j + 1) * np.pi / (2 * n))
        if np.allclose(self.x, expected, rtol=0, atol=1e-12 * k):
            self.w = (-1.0) ** j * np.sin((2 * j + 1) * np.pi / (2 * n))
        else:
            diff = self.x[:, None] - self.x[None, :]
            np.fill_diagonal(diff, 1.0)
            logs = np.sum(np.log(np.abs(diff)), axis=1)
            signs = np.prod(np.sign(diff), axis=1)
            self.w = signs * np.exp(-(logs - np.max(logs)))

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        num = np.zeros(t.shape, dtype=complex)
        den = np.zeros(t.shape, dtype=float)
        exact = np.full(t.shape, -1, dtype=int)
        d = t[:, None] - self.x[None, :]
        hit = np.abs(d) < 1e-15
        rows, cols = np.nonzero(hit)
        exact[rows] = cols[: len(rows)] if len(rows) else cols
        with np.errstate(divide="ignore", invalid="ignore"):
            c = self.w / d
        num = c @ self.y
        den = np.sum(c, axis=1)
        out = num / den
        for r, cidx in zip(rows, cols):
            out[r] = self.y[cidx]
        return out


def _interpolant(density: DensitySolution) -> tuple[Callable, complex, complex]:
    """Bounded-part interpolant from samples and exponent metadata only."""
    e = density.endpoint_exponents
    k = density.kappa
    t = density.nodes
    u = (k - t) ** e.at_plus_k * (k + t) ** e.at_minus_k
    bary = _Barycentric(t, density.values / u, k)
    return bary, e.at_plus_k, e.at_minus_k


# ----------------------------------------------------------------------
# residual of the governing equation

@dataclass
class ResidualReport:
    nodes: np.ndarray
    residuals: np.ndarray
    max_rel: float
    kappa: float
    nu: float
    label: str = ""

    def to_dict(self) -> dict:
        return {"label": self.label, "kappa": self.kappa, "nu": self.nu,
                "max_rel": self.max_rel,
                "nodes": [float(t) for t in self.nodes],
                "residual_abs": [float(abs(r)) for r in self.residuals]}


def residual_sie(density: DensitySolution, g: Callable, kappa: float,
                 qcfg: QuadratureConfig | None = None,
                 nodes: np.ndarray | None = None, nu: float | None = None,
                 label: str = "") -> ResidualReport:
    """Plug a sampled density back into the governing equation.

    Evaluates (1/pi) PV int (1 + sqrt((1-tau^2)/(1-t^2))) rho(tau) dtau/(tau-t)
    - i(1-nu) rho(t) against g(t) at interior nodes; the density is
    interpolated from its samples with the analytic weight divided out.
    """
    nu = density.nu if nu is None else nu
    if nodes is None:
        nodes = kappa * np.cos((2 * np.arange(20) + 1) * np.pi / 40) * 0.98
    bary, ep, em = _interpolant(density)
    k = kappa

    residuals = []
    gvals = []
    for t0 in np.asarray(nodes, dtype=float):
        p1 = pv_integral(lambda tau, sL, sR: bary(tau), float(t0), -k, k,
                         left_exp=em, right_exp=ep)
        p2 = pv_integral(lambda tau, sL, sR: np.sqrt(1.0 - tau * tau)
                         * bary(tau), float(t0), -k, k,
                         left_exp=em, right_exp=ep)
        rho_t = (k - t0) ** ep * (k + t0) ** em * bary(t0)[0]
        lhs = (p1 + p2 / math.sqrt(1.0 - t0 * t0)) / math.pi \
            - 1j * (1.0 - nu) * rho_t
        gt = complex(np.atleast_1d(g(t0))[0])
        residuals.append(lhs - gt)
        gvals.append(gt)
    residuals = np.array(residuals)
    scale = np.max(np.abs(gvals))
    return ResidualReport(nodes=np.asarray(nodes, dtype=float),
                          residuals=residuals,
                          max_rel=float(np.max(np.abs(residuals)) / scale),
                          kappa=kappa, nu=nu, label=label)


def residual_equal_closed_form(nu: float, P: float = 1.0, a: float = 1.0,
                               tpts: Sequence[float] = (-0.7, -0.3, 0.1, 0.5, 0.8)
                               ) -> float:
    """Residual of the equal-length explicit density, fully in closed form.

    Each principal value reduces to the two Hilbert-transform identities for
    power weights, so the result measures only the algebra of the explicit
    formula (float rounding apart).
    """
    c = derive_constants(nu, 1.0)
    g = c.gamma
    pref = -P / (2.0 * math.pi * a * (1.0 + nu) * math.sqrt(c.nu0))
    c1 = pref / c.e_minus
    c2 = -1j * pref / c.e_plus

    def cot(al):
        return np.cos(np.pi * al) / np.sin(np.pi * al)

    worst = 0.0
    for t in tpts:
        W1 = (1.0 - t) ** (-0.25 - 1j * g) * (1.0 + t) ** (-0.75 + 1j * g)
        W2 = (1.0 - t) ** (-0.75 - 1j * g) * (1.0 + t) ** (-0.25 + 1j * g)
        # plain transforms of the two weights
        pv1 = np.pi * cot(np.pi * 0 + (-0.25 - 1j * g)) * W1
        pv2 = np.pi * cot(-0.75 - 1j * g) * W2
        # transforms of sqrt(1-tau^2) * weight
        al1 = 0.25 - 1j * g
        r1 = np.pi * cot(al1) * ((1.0 - t) / (1.0 + t)) ** al1 \
            - np.pi / np.sin(np.pi * al1)
        al2 = -0.25 - 1j * g
        r2 = np.pi * cot(al2) * ((1.0 - t) / (1.0 + t)) ** al2 \
            - np.pi / np.sin(np.pi * al2)
        s = math.sqrt(1.0 - t * t)
        lhs = (c1 * (pv1 + r1 / s) + c2 * (pv2 + r2 / s)) / np.pi \
            - 1j * (1.0 - nu) * (c1 * W1 + c2 * W2)
        gt = (1.0 - nu) * P / (2.0 * math.pi * a * s)
        worst = max(worst, abs(lhs - gt) / abs(gt))
    return worst


# ----------------------------------------------------------------------
# matrix factorization

def verify_factorization(k: float, nu: float, sample_count: int = 50,
                         seed: int = 20240, gamma_scale: float = 1.0
                         ) -> tuple[float, float]:
    """Max deviations of the factorization and determinant identities.

    Returns (max ||X+ (X-)^{-1} - G||_inf, max relative det residual) over
    random interior points.  ``gamma_scale`` deliberately corrupts the
    oscillation index for self-tests of the verification machinery.
    """
    consts = derive_constants(nu, k)
    if gamma_scale != 1.0:
        consts = dataclasses.replace(consts, gamma=consts.gamma * gamma_scale)
    rng = np.random.default_rng(seed)
    ts = rng.uniform(-k, k, sample_count) * (1.0 - 1e-6)
    worst = 0.0
    worst_det = 0.0
    from .special import lambda_pm
    for t in ts:
        pair = factor_matrices(float(t), k, consts)
        G = matrix_coefficient(float(t), nu)
        dev = np.max(np.abs(pair.Xplus @ np.linalg.inv(pair.Xminus) - G))
        worst = max(worst, float(dev))
        lp, lm = lambda_pm(float(t), k, consts.gamma, consts.e0)
        for lam, X in ((lp, pair.Xplus), (lm, pair.Xminus)):
            det = np.linalg.det(X)
            worst_det = max(worst_det,
                            float(abs(det - lam * lam) / abs(lam * lam)))
    return worst, worst_det


# ----------------------------------------------------------------------
# iterated principal value (displacement-consistency identity)

def verify_theta_identity(psi: DensitySolution, cfg: ProblemConfig,
                          xpts: Sequence[float] = (0.0, 0.17, -0.31)
                          ) -> float:
    """Check the iterated-transform identity against its closed collapse.

    The double principal value
        Theta(t) = (1/(pi sqrt(1-t^2))) PV int sqrt(1-tau^2) S(tau) dtau/(tau-t),
        S(tau)   = (1/pi) PV int rho(sigma) dsigma/(sigma-tau)
    must equal -rho(t) + i P*/(pi a sqrt(1-t^2)).  Everything is computed by
    nested pairing quadrature from density samples alone.
    """
    k = psi.kappa
    a = cfg.a
    pstar = cfg.p_star
    bary, ep, em = _interpolant(psi)

    def S(tau_arr):
        tau_arr = np.atleast_1d(tau_arr)
        out = np.empty(tau_arr.shape, dtype=complex)
        for i, tau in enumerate(tau_arr):
            tau = float(tau)
            if abs(tau) < k:
                val = pv_integral(lambda s, sL, sR: bary(s), tau, -k, k,
                                  left_exp=em, right_exp=ep, n_gl=16)
            else:
                val = gauss_legendre_panels(
                    lambda s, sL, sR: bary(s) / (s - tau), -k, k,
                    left_exp=em, right_exp=ep, n_gl=16)
            out[i] = val / math.pi
        return out

    worst = 0.0
    scale = np.max(np.abs(psi.values))
    for x in xpts:
        t0 = float(x)
        # middle piece: PV at t0; the transform S carries integrable
        # inverse-sqrt growth at the segment tips, declared to the engine
        total = pv_integral(
            lambda tau, sL, sR: np.sqrt((1.0 - tau * tau) * sL * sR) * S(tau),
            t0, -k, k, left_exp=-0.5, right_exp=-0.5, n_gl=16)
        total += gauss_legendre_panels(
            lambda tau, sL, sR: np.sqrt((1.0 - tau * tau) * sL)
            * S(tau) / (tau - t0), k, 1.0,
            left_exp=-0.5, right_exp=0.0, n_gl=16, eps=1e-18)
        total += gauss_legendre_panels(
            lambda tau, sL, sR: np.sqrt((1.0 - tau * tau) * sR)
            * S(tau) / (tau - t0), -1.0, -k,
            left_exp=0.0, right_exp=-0.5, n_gl=16, eps=1e-18)
        s0 = math.sqrt(1.0 - t0 * t0)
        theta = total / (math.pi * s0)
        rho_t = (k - t0) ** ep * (k + t0) ** em * bary(t0)[0]
        rhs = -rho_t + 1j * pstar / (math.pi * a * s0)
        worst = max(worst, abs(theta - rhs) / scale)
    return worst


# ----------------------------------------------------------------------
# limit continuity

@dataclass
class ContinuityRow:
    k: float
    distance: float


def verify_limit_continuity(cfg_sequence: Sequence[ProblemConfig],
                            window: float = 0.9,
                            qcfg: QuadratureConfig | None = None
                            ) -> list[ContinuityRow]:
    """Distance of each solve to the relevant analytic limit.

    For ratios approaching 1 the distance is the sup norm over |t| <= window
    (nodes clamped strictly inside the segment) between the solved density
    and the equal-length closed form; for ratios approaching 0 it is the
    normalized stress-intensity distance to the shrinking-inclusion limits.
    """
    from .post import sif_general
    from .solver import limit_k0_sifs, solve_model1
    rows: list[ContinuityRow] = []
    for cfg in cfg_sequence:
        k = cfg.kappa
        if k >= 0.5:
            import warnings as _w
            with _w.catch_warnings():
                _w.simplefilter("ignore", RuntimeWarning)
                sol = solve_model1(cfg, qcfg)
            eq = limit_k1_density(
                ProblemConfig(model=Model.EQUAL, a=cfg.a, b=cfg.a, nu=cfg.nu,
                              P=cfg.P, sigma=cfg.sigma, E=cfg.E), qcfg)
            grid = np.linspace(-window, window, 181)
            grid = np.clip(grid, -k * (1.0 - 1e-6), k * (1.0 - 1e-6))
            grid = np.unique(grid)
            d = float(np.max(np.abs(sol.evaluate(grid)
                                    - eq.meta["evaluator"](grid))))
        else:
            sol = solve_model1(cfg, qcfg)
            sif = sif_general(sol, cfg, qcfg)
            lim = limit_k0_sifs(cfg.nu, cfg.P, cfg.a)
            d = float(np.max(np.abs(np.array(sif.normalized)
                                    - np.array(lim.normalized))))
        rows.append(ContinuityRow(k=k, distance=d))
    return rows


# ----------------------------------------------------------------------
# classical identity suite

def identity_suite(nu: float = 0.3, seed: int = 7, n_points: int = 10) -> dict:
    """Numerical verification of the closed-form transform identities.

    Each identity is checked at ``n_points`` random parameter points with the
    pairing principal-value engine; returns the max absolute error per
    identity, keyed by a short name.
    """
    rng = np.random.default_rng(seed)
    consts = derive_constants(nu, 0.5)
    g = consts.gamma
    one = lambda tau, sL, sR: np.ones_like(tau, dtype=complex)
    out = {}

    # vanishing transform of the inverse-sqrt weight
    worst = 0.0
    for t in rng.uniform(-0.95, 0.95, n_points):
        val = pv_integral(one, float(t), -1.0, 1.0, -0.5, -0.5)
        worst = max(worst, abs(val))
    out["invsqrt_vanishes"] = worst

    # interchange constant: (1/pi) int sqrt(1-x^2)/((x-a)(b-x))-type
    worst = 0.0
    for _ in range(n_points):
        xx, eta = rng.uniform(-0.9, 0.9, 2)
        if abs(xx - eta) < 0.05:
            eta = -eta if abs(xx + eta) > 0.05 else eta + 0.3
        p1 = pv_integral(one, float(xx), -1.0, 1.0, 0.5, 0.5)
        p2 = pv_integral(one, float(eta), -1.0, 1.0, 0.5, 0.5)
        got = (p1 - p2) / (eta - xx) / np.pi
        worst = max(worst, abs(got - 1.0))
    out["iterated_constant"] = worst

    # power-weight transform, antisymmetric exponents
    worst = 0.0
    alphas = [0.25, 0.25 + 1j * g, -0.25 - 1j * g, 0.1, 0.4 - 2j * g]
    for al in alphas:
        for t in rng.uniform(-0.9, 0.9, max(2, n_points // len(alphas))):
            got = pv_integral(one, float(t), -1.0, 1.0, -al, al)
            want = np.pi / np.tan(np.pi * al) * ((1 - t) / (1 + t)) ** al \
                - np.pi / np.sin(np.pi * al)
            worst = max(worst, abs(got - want))
    out["power_weight"] = worst

    # power-weight transform, shifted exponent (finite part when Re < -1)
    worst = 0.0
    alphas = [0.25, -0.25 + 2j * g, -0.75 - 1j * g, 0.35]
    for al in alphas:
        for t in rng.uniform(-0.9, 0.9, max(2, n_points // len(alphas))):
            got = pv_integral(one, float(t), -1.0, 1.0, -al - 1.0, al)
            want = np.pi / np.tan(np.pi * al) * (1 - t) ** al \
                * (1 + t) ** (-al - 1.0)
            worst = max(worst, abs(got - want))
    out["power_weight_shifted"] = worst

    # algebraic constant identities
    worst = 0.0
    for nu_i in np.linspace(0.02, 0.5, n_points):
        r = derive_constants(float(nu_i), 0.5).identity_residuals()
        worst = max(worst, max(r))
    out["constants_algebraic"] = worst
    return out


# ----------------------------------------------------------------------
# verification driver (consumed by the CLI)

@dataclass
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    seconds: float
    detail: dict = field(default_factory=dict)


def run_verification(cfg: ProblemConfig,
                     checks: Sequence[str] = ("residual", "factorization",
                                              "identities", "equilibrium"),
                     qcfg: QuadratureConfig | None = None,
                     gamma_scale: float = 1.0) -> list[CheckResult]:
    """Run the requested oracle checks for one configuration."""
    from .solver import build_rhs_model1, build_rhs_model2, solve_model1, \
        solve_model2
    results: list[CheckResult] = []
    k = cfg.kappa

    def record(name, value, tol, **detail):
        results.append(CheckResult(name=name, value=float(value),
                                   tolerance=tol, passed=bool(value < tol),
                                   seconds=round(time.time() - t0, 3),
                                   detail=detail))

    sol = None
    rhs = None
    if any(c in checks for c in ("residual", "equilibrium", "theta")):
        if cfg.model is Model.MODEL2:
            rhs = build_rhs_model2(cfg)
            sol = solve_model2(cfg, qcfg)
        else:
            rhs = build_rhs_model1(cfg)
            sol = solve_model1(cfg, qcfg)

    for name in checks:
        t0 = time.time()
        if name == "residual":
            rep = residual_sie(sol, rhs, sol.kappa, qcfg, nu=cfg.nu,
                               label=cfg.model.value)
            record("residual", rep.max_rel, RESIDUAL_TOL,
                   nodes=len(rep.nodes))
        elif name == "factorization":
            dev, det = verify_factorization(k if k < 1 else 0.5, cfg.nu,
                                            gamma_scale=gamma_scale)
            record("factorization", dev, FACTORIZATION_TOL, det_residual=det)
        elif name == "identities":
            ids = identity_suite(cfg.nu)
            worst = max(v for kk, v in ids.items()
                        if kk != "constants_algebraic")
            record("identities", worst, IDENTITY_TOL, **ids)
            t0 = time.time()
            record("identities_algebraic", ids["constants_algebraic"],
                   ALGEBRAIC_TOL)
        elif name == "equilibrium":
            target = rhs.moment
            scale = max(abs(target), abs(cfg.p_star) / cfg.a, 1e-30)
            record("equilibrium", abs(sol.moment - target) / scale, 1e-8)
        elif name == "theta":
            dev = verify_theta_identity(sol, cfg)
            record("theta", dev, THETA_TOL)
        else:
            raise DomainError(f"unknown check {name!r}")
    return results


def report_to_json(results: Sequence[CheckResult], cfg: ProblemConfig) -> str:
    payload = {
        "config": {"model": cfg.model.value, "a": cfg.a, "b": cfg.b,
                   "nu": cfg.nu, "P": cfg.P, "sigma": cfg.sigma},
        "fingerprint": cfg.fingerprint(),
        "passed": all(r.passed for r in results),
        "checks": [dataclasses.asdict(r) for r in results],
    }
    return json.dumps(payload, indent=2, sort_keys=True)
