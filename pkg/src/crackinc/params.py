"""Problem configuration, derived material constants, and validation.

Geometry: a rigid line inclusion of half-length ``b`` interacts with a
straight crack of half-length ``a`` on the same line.  Model 1 has the crack
longer (b < a), Model 2 has the inclusion longer (a < b), and the equal case
a = b is handled as the limit of either.  Plane stress throughout.
"""

from __future__ import annotations

import cmath
import enum
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import DomainError

# physical plane-stress bound for the Poisson ratio
NU_MAX = 0.5


class Model(enum.Enum):
    """Which of the two bodies is longer."""

    MODEL1 = "model1"   # crack longer, b < a
    MODEL2 = "model2"   # inclusion longer, a < b
    EQUAL = "equal"     # a = b

    @classmethod
    def parse(cls, text: str) -> "Model":
        text = str(text).strip().lower()
        aliases = {"1": cls.MODEL1, "model1": cls.MODEL1,
                   "2": cls.MODEL2, "model2": cls.MODEL2,
                   "equal": cls.EQUAL, "=": cls.EQUAL}
        try:
            return aliases[text]
        except KeyError:
            raise DomainError(f"unknown model {text!r}") from None


@dataclass(frozen=True)
class LoadProfiles:
    """Optional smooth load profiles.

    ``h_prime(x)``
        Slope of the inclusion profile on (-b, b).
    ``w_background(x)``
        Derivative of the background displacement combination on (-b, b).
    ``sigma_background(x)``
        Complex background traction sigma12 + i*sigma22 on (-a, a).

    Callables must accept numpy arrays.  ``None`` means identically zero.
    Profiles enter only through smooth integrands, so they must be smooth
    enough for Chebyshev interpolation to resolve them.
    """

    h_prime: Optional[Callable] = None
    w_background: Optional[Callable] = None
    sigma_background: Optional[Callable] = None

    @property
    def all_zero(self) -> bool:
        return (self.h_prime is None and self.w_background is None
                and self.sigma_background is None)


@dataclass(frozen=True)
class ProblemConfig:
    """Immutable problem description; safe to share across threads."""

    model: Model
    a: float                 # crack half-length, > 0
    b: float                 # inclusion half-length, > 0
    nu: float                # Poisson ratio, physical range (-1, 0.5]
    P: float = 1.0           # magnitude of the normal point load
    sigma: float = 0.0       # resultant of the background normal traction
    E: float = 1.0           # Young modulus scale (cancels in point-load output)
    profiles: LoadProfiles = field(default_factory=LoadProfiles)

    @property
    def kappa(self) -> float:
        """Segment ratio min(a, b) / max(a, b) in (0, 1]."""
        return min(self.a, self.b) / max(self.a, self.b)

    @property
    def p_star(self) -> float:
        """Total normal force P + Sigma."""
        return self.P + self.sigma

    def fingerprint(self) -> str:
        """Deterministic hash of the numeric configuration."""
        payload = json.dumps({
            "model": self.model.value, "a": self.a, "b": self.b,
            "nu": self.nu, "P": self.P, "sigma": self.sigma, "E": self.E,
            "profiles": "custom" if not self.profiles.all_zero else "none",
        }, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class DerivedConstants:
    """Scalar constants feeding the closed-form density.

    nu0 = (3 - nu) / (1 + nu) > 0
    nu1 = (3 - nu) * (1 + nu)
    gamma = ln(nu0) / (4 pi)         (oscillation index of the inclusion tips)
    e0 = exp(i pi/4 + pi gamma),  e_pm = (e0 +- 1/e0) / 2
    beta0 = (2 i gamma - 1/2) * arcsin(kappa)
    """

    nu: float
    kappa: float
    nu0: float
    nu1: float
    gamma: float
    e0: complex
    e_plus: complex
    e_minus: complex
    beta0: complex

    def identity_residuals(self) -> tuple[float, float, float]:
        """Residuals of the algebraic identities tying the constants together.

        Returns |e-/e+ + e+/e- - (1-nu)| and the two signed-variant residuals
        of (nu-1)/(nu1 e+-) - 2 i e+- / ((1+nu) sqrt(nu0)) = +-1/((1+nu) e0^2 e+-).
        """
        r1 = abs(self.e_minus / self.e_plus + self.e_plus / self.e_minus
                 - (1.0 - self.nu))
        res = []
        for sign, e in ((+1.0, self.e_plus), (-1.0, self.e_minus)):
            lhs = (self.nu - 1.0) / (self.nu1 * e) \
                - 2j * e / ((1.0 + self.nu) * math.sqrt(self.nu0))
            rhs = sign / ((1.0 + self.nu) * self.e0 ** 2 * e)
            res.append(abs(lhs - rhs))
        return r1, res[0], res[1]


def derive_constants(nu: float, kappa: float) -> DerivedConstants:
    """Compute the derived constants for Poisson ratio ``nu`` and ratio ``kappa``.

    ``nu`` only needs nu0 > 0 here (nu in (-1, 3)); the physical plane-stress
    bound nu <= 0.5 is enforced by :func:`validate_config`, not here, so that
    degenerate test values such as nu = 1 (gamma = 0) remain evaluable.
    """
    if not -1.0 < nu < 3.0:
        raise DomainError(f"nu={nu} outside (-1, 3); nu0 undefined or negative")
    if not 0.0 < kappa <= 1.0:
        raise DomainError(f"kappa={kappa} outside (0, 1]")
    nu0 = (3.0 - nu) / (1.0 + nu)
    nu1 = (3.0 - nu) * (1.0 + nu)
    gamma = math.log(nu0) / (4.0 * math.pi)
    e0 = cmath.exp(1j * math.pi / 4.0 + math.pi * gamma)
    e_plus = 0.5 * (e0 + 1.0 / e0)
    e_minus = 0.5 * (e0 - 1.0 / e0)
    beta0 = (2j * gamma - 0.5) * math.asin(kappa)
    return DerivedConstants(nu=nu, kappa=kappa, nu0=nu0, nu1=nu1, gamma=gamma,
                            e0=e0, e_plus=e_plus, e_minus=e_minus, beta0=beta0)


def constants_for(cfg: ProblemConfig) -> DerivedConstants:
    return derive_constants(cfg.nu, cfg.kappa)


def validate_config(cfg: ProblemConfig) -> list[str]:
    """Return a list of invariant violations; empty iff the config is valid."""
    problems: list[str] = []
    if cfg.a <= 0.0:
        problems.append(f"crack half-length a={cfg.a} must be positive")
    if cfg.b <= 0.0:
        problems.append(f"inclusion half-length b={cfg.b} must be positive")
    if not -1.0 < cfg.nu <= NU_MAX:
        problems.append(f"nu={cfg.nu} outside physical range (-1, {NU_MAX}]")
    if cfg.a > 0.0 and cfg.b > 0.0:
        if cfg.model is Model.MODEL1 and not cfg.b < cfg.a:
            problems.append(f"model1 requires b < a, got a={cfg.a} b={cfg.b}")
        if cfg.model is Model.MODEL2 and not cfg.a < cfg.b:
            problems.append(f"model2 requires a < b, got a={cfg.a} b={cfg.b}")
        if cfg.model is Model.EQUAL and cfg.a != cfg.b:
            problems.append(f"equal model requires a == b, got a={cfg.a} b={cfg.b}")
        kappa = cfg.kappa
        if not 0.0 < kappa <= 1.0:
            problems.append(f"segment ratio kappa={kappa} outside (0, 1]")
        if kappa == 1.0 and cfg.model is not Model.EQUAL:
            problems.append("kappa == 1 is only admissible for the equal model")
    if not math.isfinite(cfg.P) or not math.isfinite(cfg.sigma):
        problems.append("loads must be finite")
    if cfg.E <= 0.0:
        problems.append(f"modulus scale E={cfg.E} must be positive")
    return problems


def config_from_dict(data: dict) -> ProblemConfig:
    """Build a configuration from the JSON schema.

    Schema: {"model": "model1", "a": 1.0, "b": 0.5, "nu": 0.3,
             "P": 1.0, "sigma": 0.0}; "E" optional.
    """
    try:
        model = Model.parse(data["model"])
        cfg = ProblemConfig(model=model,
                            a=float(data["a"]), b=float(data["b"]),
                            nu=float(data["nu"]),
                            P=float(data.get("P", 1.0)),
                            sigma=float(data.get("sigma", 0.0)),
                            E=float(data.get("E", 1.0)))
    except KeyError as exc:
        raise DomainError(f"config missing required key {exc}") from None
    except (TypeError, ValueError) as exc:
        raise DomainError(f"malformed config value: {exc}") from None
    return cfg


def load_config(path) -> ProblemConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))
