"""Parameters, nondimensionalization and reproduction-number analysis.

The within-host model tracks uninfected hepatocytes, infected hepatocytes,
intracellular capsids and free virions.  Capsids are produced at rate ``a``,
recycled back into the replication cycle with fraction ``1 - alpha`` at rate
``gamma``, and exported as virions with volume fraction ``alpha`` at rate
``beta``.  The net capsid removal rate

    r_s = alpha*beta - gamma*(1 - alpha) + delta

must be positive for the capsid compartment to admit a decaying equilibrium;
validation rejects parameter sets where recycling overwhelms removal.

All functions here are pure; parameter values are immutable after
construction and safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

__all__ = [
    "DimensionalParams",
    "ValidatedParams",
    "ScaledParams",
    "EquilibriumPoint",
    "ElasticityReport",
    "ParameterError",
    "NonPositiveParameter",
    "ParameterOutOfRange",
    "NonPositiveRs",
    "StepTooLarge",
    "validate",
    "scale",
    "basic_reproduction_number",
    "basic_reproduction_number_dimensional",
    "equilibria",
    "elasticities",
    "elasticity_closed_form",
    "elasticity_fd",
    "R0_PARAMETERS",
]


class ParameterError(ValueError):
    """Base class for parameter validation failures."""


class NonPositiveParameter(ParameterError):
    def __init__(self, name: str, value: float):
        self.name = name
        self.value = value
        super().__init__(f"parameter {name!r} must be strictly positive, got {value!r}")


class ParameterOutOfRange(ParameterError):
    def __init__(self, name: str, value: float, constraint: str):
        self.name = name
        self.value = value
        super().__init__(f"parameter {name!r} {constraint}, got {value!r}")


class NonPositiveRs(ParameterError):
    def __init__(self, value: float):
        self.value = value
        super().__init__(
            "net capsid removal rate alpha*beta - gamma*(1-alpha) + delta must be "
            f"positive, got {value!r}"
        )


class StepTooLarge(ParameterError):
    def __init__(self, name: str, h: float, reason: str):
        self.name = name
        self.h = h
        super().__init__(f"relative step {h!r} on {name!r} leaves the valid domain: {reason}")


@dataclass(frozen=True)
class DimensionalParams:
    """Model parameters in per-day / concentration units.

    ``delta_v`` is the virus clearance rate (the wave-speed symbol ``c`` is
    reserved for the traveling-wave analysis, so clearance gets the name of
    the rate constant in the virion equation).
    """

    lambda_: float  # production of uninfected hepatocytes (cells/day)
    k: float        # infection rate (per virion per day)
    mu: float       # death rate of uninfected hepatocytes (1/day)
    delta: float    # death rate of infected hepatocytes (1/day)
    a: float        # capsid production rate (1/day)
    gamma: float    # capsid recycling rate (1/day)
    alpha: float    # volume fraction of capsids exported as virions, in (0, 1]
    beta: float     # virus production rate (1/day)
    delta_v: float  # virus clearance rate (1/day)
    d_v: float      # virus diffusion coefficient (length^2/day)

    def capsid_removal_rate(self) -> float:
        """Net removal rate of capsids: export + death minus recycling."""
        return self.alpha * self.beta - self.gamma * (1.0 - self.alpha) + self.delta


@dataclass(frozen=True)
class ValidatedParams:
    """A dimensional parameter set that passed validation, with r_s cached."""

    p: DimensionalParams
    r_s: float


@dataclass(frozen=True)
class ScaledParams:
    """Dimensionless parameters of the scaled system.

    rho1 = delta/mu, rho2 = a/mu, rho3 = r_s/mu, rho4 = k*alpha*beta*lambda/mu^3,
    rho5 = delta_v/mu and Dv = mu*d_v.  Dv = 0 is allowed so the no-diffusion
    experiments can run through the same code path.
    """

    rho1: float
    rho2: float
    rho3: float
    rho4: float
    rho5: float
    Dv: float

    def __post_init__(self):
        for name in ("rho1", "rho2", "rho3", "rho4", "rho5"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise NonPositiveParameter(name, v)
        if not (math.isfinite(self.Dv) and self.Dv >= 0.0):
            raise ParameterOutOfRange("Dv", self.Dv, "must be finite and >= 0")


@dataclass(frozen=True)
class EquilibriumPoint:
    """Spatially uniform steady state of the scaled system."""

    T1: float
    I1: float
    D1: float
    V1: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.T1, self.I1, self.D1, self.V1)


@dataclass(frozen=True)
class ElasticityReport:
    """Elasticities of the basic reproduction number.

    e_gamma is always >= 0: recycling feeds capsids back into virion
    production, so it can only push R0 up.
    """

    e_alpha: float
    e_beta: float
    e_gamma: float


_PARAM_NAMES = tuple(f.name for f in fields(DimensionalParams))

# Parameters R0 actually depends on (d_v only enters the spatial dynamics).
R0_PARAMETERS = ("lambda_", "k", "mu", "delta", "a", "gamma", "alpha", "beta", "delta_v")


def validate(p: DimensionalParams) -> ValidatedParams:
    """Check positivity, the alpha range and r_s > 0; cache r_s.

    Raises NonPositiveParameter / ParameterOutOfRange / NonPositiveRs.
    """
    for name in _PARAM_NAMES:
        v = getattr(p, name)
        if not (math.isfinite(v) and v > 0.0):
            raise NonPositiveParameter(name, v)
    if p.alpha > 1.0:
        raise ParameterOutOfRange("alpha", p.alpha, "must lie in (0, 1]")
    r_s = p.capsid_removal_rate()
    if not r_s > 0.0:
        raise NonPositiveRs(r_s)
    return ValidatedParams(p=p, r_s=r_s)


def scale(vp: ValidatedParams) -> ScaledParams:
    """Nondimensionalize a validated parameter set."""
    p = vp.p
    mu = p.mu
    return ScaledParams(
        rho1=p.delta / mu,
        rho2=p.a / mu,
        rho3=vp.r_s / mu,
        rho4=p.k * p.alpha * p.beta * p.lambda_ / mu**3,
        rho5=p.delta_v / mu,
        Dv=mu * p.d_v,
    )


def basic_reproduction_number(sp: ScaledParams) -> float:
    """R0 = rho2*rho4 / (rho1*rho3*rho5)."""
    return (sp.rho2 * sp.rho4) / (sp.rho1 * sp.rho3 * sp.rho5)


def basic_reproduction_number_dimensional(vp: ValidatedParams) -> float:
    """R0 evaluated directly from dimensional parameters.

    Agrees with the scaled form to relative 1e-12; used as a cross-check.
    """
    p = vp.p
    return (p.a * p.k * p.lambda_ * p.alpha * p.beta) / (vp.r_s * p.delta * p.delta_v * p.mu)


def equilibria(sp: ScaledParams) -> tuple[EquilibriumPoint, EquilibriumPoint | None]:
    """Disease-free point (1,0,0,0) and, iff R0 > 1, the endemic point.

    The endemic components satisfy T1* = 1/R0 and V1* = R0 - 1.  At the
    threshold R0 = 1 the two points coincide and only the disease-free one
    is reported.
    """
    disease_free = EquilibriumPoint(1.0, 0.0, 0.0, 0.0)
    num = sp.rho2 * sp.rho4 - sp.rho1 * sp.rho3 * sp.rho5
    if not num > 0.0:
        return disease_free, None
    endemic = EquilibriumPoint(
        T1=(sp.rho1 * sp.rho3 * sp.rho5) / (sp.rho2 * sp.rho4),
        I1=num / (sp.rho1 * sp.rho2 * sp.rho4),
        D1=num / (sp.rho1 * sp.rho3 * sp.rho4),
        V1=num / (sp.rho1 * sp.rho3 * sp.rho5),
    )
    return disease_free, endemic


def elasticities(vp: ValidatedParams) -> ElasticityReport:
    """Closed-form elasticities of R0 with respect to alpha, beta, gamma.

    These are computed in dimensional form because alpha, beta and gamma
    enter r_s nonlinearly.
    """
    p = vp.p
    r_s = vp.r_s
    return ElasticityReport(
        e_alpha=(p.delta - p.gamma) / r_s,
        e_beta=((p.alpha - 1.0) * p.gamma + p.delta) / r_s,
        e_gamma=p.gamma * (1.0 - p.alpha) / r_s,
    )


def elasticity_closed_form(vp: ValidatedParams, which: str) -> float:
    """Closed-form elasticity of R0 with respect to any single R0 parameter."""
    p = vp.p
    r_s = vp.r_s
    if which in ("lambda_", "k", "a"):
        return 1.0
    if which in ("mu", "delta_v"):
        return -1.0
    if which == "delta":
        return -(1.0 + p.delta / r_s)
    if which == "alpha":
        return (p.delta - p.gamma) / r_s
    if which == "beta":
        return ((p.alpha - 1.0) * p.gamma + p.delta) / r_s
    if which == "gamma":
        return p.gamma * (1.0 - p.alpha) / r_s
    raise ValueError(f"R0 does not depend on {which!r}; expected one of {R0_PARAMETERS}")


def elasticity_fd(vp: ValidatedParams, which: str, h: float = 1e-6) -> float:
    """Central-difference elasticity estimate (p/R0)*(R0(p+hp)-R0(p-hp))/(2hp).

    ``h`` is a relative step in (0, 1e-3].  Raises StepTooLarge when the
    perturbed parameters fail validation (e.g. alpha*(1+h) > 1).
    """
    if which not in R0_PARAMETERS:
        raise ValueError(f"R0 does not depend on {which!r}; expected one of {R0_PARAMETERS}")
    if not (0.0 < h <= 1e-3):
        raise ValueError(f"relative step must lie in (0, 1e-3], got {h!r}")
    base = getattr(vp.p, which)
    try:
        plus = validate(replace(vp.p, **{which: base * (1.0 + h)}))
        minus = validate(replace(vp.p, **{which: base * (1.0 - h)}))
    except ParameterError as exc:
        raise StepTooLarge(which, h, str(exc)) from exc
    r0_plus = basic_reproduction_number_dimensional(plus)
    r0_minus = basic_reproduction_number_dimensional(minus)
    r0 = basic_reproduction_number_dimensional(vp)
    return (r0_plus - r0_minus) / (2.0 * h * r0)
