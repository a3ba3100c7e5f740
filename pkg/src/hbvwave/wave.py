"""Traveling-wave analysis of the scaled reaction-diffusion system.

A front moving at speed c > 0 solves a five-dimensional ODE in the wave
variable s = x + c*t: the four scaled compartments plus the derivative of
the virion profile.  Front existence is certified numerically: the three
parameter inequalities of the sufficient condition, strict disjointness of
the Gershgorin disc groups of the reduced Jacobian, and an eigensolver
cross-check of the disc-based eigenvalue classification.  The heteroclinic
connection itself is attempted by shooting along the unstable direction of
the disease-free state.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import spectral
from .model import (
    EquilibriumPoint,
    NonPositiveParameter,
    ScaledParams,
    basic_reproduction_number,
    equilibria,
)
from .spectral import Disc, DiscPartition

__all__ = [
    "WaveParams",
    "Verdict",
    "WaveProfile",
    "ShootOptions",
    "ConditionCheck",
    "GroupClassification",
    "ConditionReport",
    "NoEndemicEquilibrium",
    "wave_rhs",
    "boundary_states",
    "jacobian_disease_free",
    "reduced_jacobian",
    "minimal_wave_speed",
    "check_existence",
    "shoot",
    "profile_metrics",
    "profile_to_csv",
]


class NoEndemicEquilibrium(RuntimeError):
    def __init__(self, r0: float):
        self.r0 = r0
        super().__init__(f"no endemic steady state: R0 = {r0!r} <= 1")


@dataclass(frozen=True)
class WaveParams:
    """Scaled parameters plus the wave speed; Dv must be positive here."""

    sp: ScaledParams
    c: float

    def __post_init__(self):
        if not self.c > 0.0:
            raise NonPositiveParameter("c", self.c)
        if not self.sp.Dv > 0.0:
            raise NonPositiveParameter("Dv", self.sp.Dv)


def wave_rhs(u: np.ndarray, wp: WaveParams) -> np.ndarray:
    """Right-hand side of the first-order traveling-wave system."""
    sp, c = wp.sp, wp.c
    u1, u2, u3, u4, u5 = u
    return np.array(
        [
            (1.0 - u1 - u1 * u4) / c,
            (u1 * u4 - sp.rho1 * u2) / c,
            (sp.rho2 * u2 - sp.rho3 * u3) / c,
            u5,
            (c * u5 - sp.rho4 * u3 + sp.rho5 * u4) / sp.Dv,
        ]
    )


def boundary_states(sp: ScaledParams) -> tuple[np.ndarray, np.ndarray]:
    """The two rest states of the wave system (with zero profile slope).

    Raises NoEndemicEquilibrium when R0 <= 1: a front needs two distinct
    steady states to connect.
    """
    disease_free, endemic = equilibria(sp)
    if endemic is None:
        raise NoEndemicEquilibrium(basic_reproduction_number(sp))
    e1 = np.array([*disease_free.as_tuple(), 0.0])
    e2 = np.array([*endemic.as_tuple(), 0.0])
    return e1, e2


def jacobian_disease_free(wp: WaveParams) -> np.ndarray:
    """Analytic Jacobian of wave_rhs at the disease-free state."""
    sp, c = wp.sp, wp.c
    return np.array(
        [
            [-1.0 / c, 0.0, 0.0, -1.0 / c, 0.0],
            [0.0, -sp.rho1 / c, 0.0, 1.0 / c, 0.0],
            [0.0, sp.rho2 / c, -sp.rho3 / c, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, -sp.rho4 / sp.Dv, sp.rho5 / sp.Dv, c / sp.Dv],
        ]
    )


def reduced_jacobian(wp: WaveParams) -> np.ndarray:
    """Disease-free Jacobian with the uninfected-cell row and column removed.

    The removed direction contributes the eigenvalue -1/c; the remaining
    four eigenvalues live in this submatrix.
    """
    J = jacobian_disease_free(wp)
    return J[1:, 1:].copy()


def minimal_wave_speed(sp: ScaledParams) -> float:
    """Sufficient lower bound c* = Dv + rho4 + rho5 on admissible wave speeds."""
    return sp.Dv + sp.rho4 + sp.rho5


@dataclass(frozen=True)
class ConditionCheck:
    holds: bool
    lhs: float
    rhs: float


@dataclass(frozen=True)
class GroupClassification:
    indices: tuple[int, ...]
    label: str
    eigenvalues: tuple[complex, ...]
    consistent: bool


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of the traveling-wave existence conditions at one wave speed.

    ``overall`` is the conjunction of the three inequalities and strict
    disjointness of the disc groups {G1, G2}, {G3}, {G4}; classification
    mismatches against the eigensolver are diagnostics, never silently
    dropped.
    """

    cond1: ConditionCheck  # rho1 > 1 + c
    cond2: ConditionCheck  # rho3 - rho2 > c
    cond3: ConditionCheck  # c > c*
    c_star: float
    discs: tuple[Disc, ...]
    partition: DiscPartition
    disjoint: bool
    classification: tuple[GroupClassification, ...]
    eigenvalues: tuple[complex, ...]
    determinant: float
    diagnostics: tuple[str, ...]
    overall: bool

    def to_dict(self) -> dict:
        return {
            "c_star": self.c_star,
            "conditions": {
                name: {"holds": c.holds, "lhs": c.lhs, "rhs": c.rhs}
                for name, c in (("cond1", self.cond1), ("cond2", self.cond2), ("cond3", self.cond3))
            },
            "discs": [{"center": d.center, "radius": d.radius} for d in self.discs],
            "partition": [list(g) for g in self.partition.groups],
            "disjoint": self.disjoint,
            "classification": [
                {
                    "discs": list(g.indices),
                    "label": g.label,
                    "eigenvalues": [{"re": z.real, "im": z.imag} for z in g.eigenvalues],
                    "consistent": g.consistent,
                }
                for g in self.classification
            ],
            "eigenvalues": [{"re": z.real, "im": z.imag} for z in self.eigenvalues],
            "determinant": self.determinant,
            "diagnostics": list(self.diagnostics),
            "overall": self.overall,
        }


_GROUPS = ((0, 1), (2,), (3,))
_LABELS = (
    "two eigenvalues, each real negative or a conjugate pair with negative real parts",
    "one nonzero real eigenvalue",
    "one positive real eigenvalue",
)


def _strictly_separated(discs: tuple[Disc, ...], g1: tuple[int, ...], g2: tuple[int, ...]) -> bool:
    return all(
        abs(discs[i].center - discs[j].center) > discs[i].radius + discs[j].radius
        for i in g1
        for j in g2
    )


def check_existence(wp: WaveParams) -> ConditionReport:
    """Evaluate the three sufficient inequalities and the disc geometry.

    The disc-based eigenvalue nature labels are cross-checked against the
    eigensolver; any mismatch lands in ``diagnostics``.
    """
    sp, c = wp.sp, wp.c
    c_star = minimal_wave_speed(sp)
    cond1 = ConditionCheck(sp.rho1 > 1.0 + c, sp.rho1, 1.0 + c)
    cond2 = ConditionCheck(sp.rho3 - sp.rho2 > c, sp.rho3 - sp.rho2, c)
    cond3 = ConditionCheck(c > c_star, c, c_star)

    sub = reduced_jacobian(wp)
    discs = tuple(spectral.gershgorin_discs(sub))
    partition = spectral.connected_components(list(discs))
    disjoint = all(
        _strictly_separated(discs, _GROUPS[a], _GROUPS[b])
        for a in range(3)
        for b in range(a + 1, 3)
    )

    eigs = tuple(complex(z) for z in spectral.eigenvalues(sub))
    det = float(np.real(spectral.determinant(sub)))
    scale = max(1.0, float(np.linalg.norm(sub)))
    tol = 1e-9 * scale

    diagnostics: list[str] = []
    assigned: list[list[complex]] = [[], [], []]
    for z in eigs:
        hits = [
            gi
            for gi, group in enumerate(_GROUPS)
            if any(discs[i].contains(z, tol=tol) for i in group)
        ]
        if len(hits) == 1:
            assigned[hits[0]].append(z)
        else:
            diagnostics.append(
                f"eigenvalue {z!r} lies in {len(hits)} disc groups; unambiguous "
                "assignment needs disjoint groups"
            )

    def consistent(gi: int, zs: list[complex]) -> bool:
        if gi == 2:
            return len(zs) == 1 and zs[0].imag == 0.0 and zs[0].real > 0.0
        if gi == 1:
            return len(zs) == 1 and zs[0].imag == 0.0 and zs[0].real != 0.0
        return len(zs) == 2 and all(z.real < 0.0 for z in zs)

    classification = []
    for gi, (group, label) in enumerate(zip(_GROUPS, _LABELS)):
        ok = consistent(gi, assigned[gi])
        if disjoint and not ok:
            diagnostics.append(
                f"ClassificationMismatch: discs {group} expected '{label}' but "
                f"eigensolver assigned {assigned[gi]!r}"
            )
        classification.append(
            GroupClassification(
                indices=group,
                label=label,
                eigenvalues=tuple(assigned[gi]),
                consistent=ok,
            )
        )
    if det == 0.0:
        diagnostics.append("reduced Jacobian is numerically singular (determinant 0)")

    overall = cond1.holds and cond2.holds and cond3.holds and disjoint
    return ConditionReport(
        cond1=cond1,
        cond2=cond2,
        cond3=cond3,
        c_star=c_star,
        discs=discs,
        partition=partition,
        disjoint=disjoint,
        classification=tuple(classification),
        eigenvalues=eigs,
        determinant=det,
        diagnostics=tuple(diagnostics),
        overall=overall,
    )


class Verdict(enum.Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass(frozen=True)
class ShootOptions:
    eps: float = 1e-6      # launch offset along the unstable unit direction
    tol: float = 1e-6      # sup-norm convergence tolerance on the four compartments
    blowup: float = 1e6    # sup-norm divergence threshold
    s_max: float = 200.0   # wave-variable budget
    stride: int = 1        # record every stride-th accepted step


@dataclass(frozen=True)
class WaveProfile:
    """Sampled trajectory of the wave system.

    ``terminal_distance`` is the sup-norm distance of the final state's
    first four components to the endemic rest state.
    """

    s: np.ndarray
    states: np.ndarray  # shape (len(s), 5)
    c: float
    terminal_distance: float
    verdict: Verdict
    detail: str = ""

    def component(self, i: int) -> np.ndarray:
        return self.states[:, i]


def shoot(wp: WaveParams, opts: ShootOptions = ShootOptions()) -> WaveProfile:
    """Integrate from the disease-free state nudged along the unstable direction.

    The launch direction is the +v orientation (virion component positive);
    -v exits the non-negative orthant immediately and is not attempted.
    Integration uses an adaptive embedded pair (rtol 1e-9, atol 1e-12) and
    stops on convergence to the endemic state, on blowup, or when the
    wave-variable budget s_max runs out.  Convergence requires the four
    compartments within ``tol`` of the endemic state in sup norm and
    |u5| <= 10*tol.
    """
    sp, c = wp.sp, wp.c
    e1, e2 = boundary_states(sp)
    lam, v = spectral.unstable_eigenvector(jacobian_disease_free(wp), positive_component=3)
    u0 = e1 + opts.eps * v
    target = e2[:4]
    rho1, rho2, rho3, rho4, rho5, dv = sp.rho1, sp.rho2, sp.rho3, sp.rho4, sp.rho5, sp.Dv

    def rhs(s, u):
        u1, u2, u3, u4, u5 = u
        return (
            (1.0 - u1 - u1 * u4) / c,
            (u1 * u4 - rho1 * u2) / c,
            (rho2 * u2 - rho3 * u3) / c,
            u5,
            (c * u5 - rho4 * u3 + rho5 * u4) / dv,
        )

    def converged(s, u):
        gap4 = float(np.max(np.abs(u[:4] - target)))
        return max(gap4 / opts.tol, abs(u[4]) / (10.0 * opts.tol)) - 1.0

    def blown_up(s, u):
        return float(np.max(np.abs(u))) - opts.blowup

    converged.terminal = True
    blown_up.terminal = True

    sol = solve_ivp(
        rhs,
        (0.0, opts.s_max),
        u0,
        method="RK45",
        rtol=1e-9,
        atol=1e-12,
        events=[converged, blown_up],
        dense_output=False,
    )

    if sol.status == 1:
        verdict = Verdict.CONVERGED if len(sol.t_events[0]) else Verdict.DIVERGED
        detail = ""
    elif sol.status == 0:
        verdict = Verdict.BUDGET_EXHAUSTED
        detail = ""
    else:
        verdict = Verdict.DIVERGED
        detail = f"integrator stopped early: {sol.message}"

    keep = np.arange(0, sol.t.size, max(1, opts.stride))
    if keep[-1] != sol.t.size - 1:
        keep = np.append(keep, sol.t.size - 1)
    s = sol.t[keep]
    states = sol.y.T[keep]
    terminal = float(np.max(np.abs(states[-1, :4] - target)))
    return WaveProfile(
        s=s, states=states, c=c, terminal_distance=terminal, verdict=verdict, detail=detail
    )


@dataclass(frozen=True)
class ComponentMetrics:
    minimum: float
    maximum: float
    monotone: bool


@dataclass(frozen=True)
class ProfileMetrics:
    """Per-component extrema/monotonicity plus the hump of the uninfected
    profile: the largest excursion beyond the envelope of its endpoint
    values, and where it occurs."""

    components: tuple[ComponentMetrics, ...]
    hump_height: float
    hump_s: float | None


def profile_metrics(profile: WaveProfile) -> ProfileMetrics:
    if profile.s.size == 0:
        raise ValueError("profile has no samples")
    comps = []
    for i in range(5):
        vals = profile.states[:, i]
        diffs = np.diff(vals)
        monotone = bool(np.all(diffs >= 0.0) or np.all(diffs <= 0.0))
        comps.append(ComponentMetrics(float(vals.min()), float(vals.max()), monotone))

    u1 = profile.states[:, 0]
    lo, hi = min(u1[0], u1[-1]), max(u1[0], u1[-1])
    deviation = np.maximum(u1 - hi, lo - u1)
    idx = int(np.argmax(deviation))
    height = float(max(deviation[idx], 0.0))
    return ProfileMetrics(
        components=tuple(comps),
        hump_height=height,
        hump_s=float(profile.s[idx]) if height > 0.0 else None,
    )


def profile_to_csv(profile: WaveProfile) -> str:
    """CSV serialization with full round-trip float precision."""
    lines = ["s,u1,u2,u3,u4,u5"]
    for s, row in zip(profile.s, profile.states):
        lines.append(",".join(repr(float(x)) for x in (s, *row)))
    return "\n".join(lines) + "\n"
