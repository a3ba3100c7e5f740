"""1-D method-of-lines solver for the scaled reaction-diffusion system.

Only the virion field diffuses; cells and capsids are spatially uncoupled.
Zero-flux walls enter the Laplacian stencil through ghost-node reflection,
which keeps second-order accuracy at the boundary and makes the implicit
diffusion matrix tridiagonal.

Two steppers are provided:

- ``rk4``   classical explicit Runge-Kutta on the full semi-discrete system,
            guarded by the diffusion stability bound dt <= 0.9*dx^2/(2*Dv);
- ``imex``  Strang splitting with Crank-Nicolson diffusion half-steps around
            an explicit RK4 reaction step (default; unconditionally stable
            in the diffusion term and second-order overall).

States stay non-negative: values below -1e-12 abort the step, round-off
undershoots in [-1e-12, 0) are clamped to zero and counted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import solve_banded

from .model import ScaledParams, equilibria

__all__ = [
    "Grid",
    "InitialConditionSpec",
    "FieldState",
    "SpaceTimeSeries",
    "StabilityViolation",
    "NegativeState",
    "FIELD_NAMES",
    "initial_state",
    "reaction_rhs",
    "diffusion_operator",
    "boundary_flux",
    "explicit_dt_bound",
    "default_dt",
    "step",
    "simulate",
    "half_max_width",
    "write_series",
]

FIELD_NAMES = ("T1", "I1", "D1", "V1")

_NEGATIVE_ABORT = -1e-12


class StabilityViolation(RuntimeError):
    def __init__(self, dt: float, dx: float, bound: float):
        self.dt = dt
        self.dx = dx
        self.bound = bound
        super().__init__(
            f"explicit step dt={dt!r} exceeds the diffusion stability bound "
            f"{bound!r} at dx={dx!r}"
        )


class NegativeState(RuntimeError):
    def __init__(self, node: int, field_name: str, value: float):
        self.node = node
        self.field = field_name
        self.value = value
        super().__init__(f"field {field_name} went negative at node {node}: {value!r}")


@dataclass(frozen=True)
class Grid:
    """Uniform nodes x_i = i*dx on [0, L] with dx = L/(nx-1)."""

    L: float
    nx: int

    def __post_init__(self):
        if not self.L > 0.0:
            raise ValueError(f"domain length must be positive, got {self.L!r}")
        if self.nx < 3:
            raise ValueError(f"grid needs at least 3 nodes, got {self.nx!r}")

    @property
    def dx(self) -> float:
        return self.L / (self.nx - 1)

    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.nx)


@dataclass(frozen=True)
class InitialConditionSpec:
    """Gaussian seed: the virion bump sits at x = 0 and the uninfected field
    carries the complementary profile."""

    T0: float = 1.0
    I0: float = 0.0
    D0: float = 0.0
    V0: float = 1.0
    epsilon: float = 0.02

    def __post_init__(self):
        for name in ("T0", "I0", "D0", "V0"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"amplitude {name} must be >= 0")
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be > 0")


@dataclass
class FieldState:
    t: float
    T1: np.ndarray
    I1: np.ndarray
    D1: np.ndarray
    V1: np.ndarray
    clamped: int = 0

    def stacked(self) -> np.ndarray:
        return np.stack([self.T1, self.I1, self.D1, self.V1])

    def copy(self) -> "FieldState":
        return FieldState(
            self.t, self.T1.copy(), self.I1.copy(), self.D1.copy(), self.V1.copy(), self.clamped
        )


@dataclass
class SpaceTimeSeries:
    grid: Grid
    params: ScaledParams
    scheme: str
    dt: float
    snapshots: list[FieldState] = field(default_factory=list)
    fluxes: list[tuple[float, float]] = field(default_factory=list)
    clamp_total: int = 0


def initial_state(grid: Grid, ic: InitialConditionSpec) -> FieldState:
    x = grid.x()
    bump = np.exp(-(x**2) / ic.epsilon)
    return FieldState(
        t=0.0,
        T1=ic.T0 * (1.0 - bump),
        I1=ic.I0 * bump,
        D1=ic.D0 * bump,
        V1=ic.V0 * bump,
    )


def _reaction(y: np.ndarray, sp: ScaledParams) -> np.ndarray:
    T, I, D, V = y
    VT = V * T
    return np.stack(
        [
            1.0 - T - VT,
            VT - sp.rho1 * I,
            sp.rho2 * I - sp.rho3 * D,
            sp.rho4 * D - sp.rho5 * V,
        ]
    )


def reaction_rhs(state: FieldState, sp: ScaledParams) -> FieldState:
    """Nodewise reaction terms, packaged as a derivative-valued state."""
    dT, dI, dD, dV = _reaction(state.stacked(), sp)
    return FieldState(t=state.t, T1=dT, I1=dI, D1=dD, V1=dV)


def diffusion_operator(V: np.ndarray, grid: Grid) -> np.ndarray:
    """Second-difference Laplacian with ghost-node reflection at both walls.

    Constants map to zero exactly.
    """
    if V.shape[0] != grid.nx:
        raise ValueError(f"vector length {V.shape[0]} does not match grid nx={grid.nx}")
    dx2 = grid.dx * grid.dx
    out = np.empty_like(V)
    out[1:-1] = (V[:-2] - 2.0 * V[1:-1] + V[2:]) / dx2
    out[0] = 2.0 * (V[1] - V[0]) / dx2
    out[-1] = 2.0 * (V[-2] - V[-1]) / dx2
    return out


def boundary_flux(state: FieldState, grid: Grid) -> tuple[float, float]:
    """One-sided second-order estimates of the virion slope at both walls."""
    V = state.V1
    dx = grid.dx
    left = (-3.0 * V[0] + 4.0 * V[1] - V[2]) / (2.0 * dx)
    right = (3.0 * V[-1] - 4.0 * V[-2] + V[-3]) / (2.0 * dx)
    return float(left), float(right)


def explicit_dt_bound(grid: Grid, Dv: float) -> float:
    """Stability guard for the explicit scheme; infinite when Dv = 0."""
    if Dv <= 0.0:
        return math.inf
    return 0.9 * grid.dx * grid.dx / (2.0 * Dv)


def default_dt(sp: ScaledParams, grid: Grid, scheme: str) -> float:
    """Conservative step size from Gershgorin bounds on the reaction Jacobian
    at both rest states, intersected with the diffusion guard for ``rk4``."""
    states = [(1.0, 0.0)]
    _, endemic = equilibria(sp)
    if endemic is not None:
        states.append((endemic.T1, endemic.V1))
    lam = 1.0
    for T, V in states:
        lam = max(
            lam,
            1.0 + V + T,
            V + sp.rho1 + T,
            sp.rho2 + sp.rho3,
            sp.rho4 + sp.rho5,
        )
    dt = 2.5 / lam
    if scheme == "rk4":
        dt = min(dt, 0.5 * explicit_dt_bound(grid, sp.Dv))
    return dt


def _rk4(f, t: float, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class _Stepper:
    """Single-step advancer; precomputes the Crank-Nicolson factorizable
    bands for a fixed dt so simulate() can reuse them."""

    def __init__(self, sp, grid, dt, scheme, forcing=None):
        if dt <= 0.0:
            raise ValueError(f"dt must be positive, got {dt!r}")
        if scheme not in ("rk4", "imex"):
            raise ValueError(f"unknown scheme {scheme!r}; expected 'rk4' or 'imex'")
        if scheme == "rk4" and dt > explicit_dt_bound(grid, sp.Dv):
            raise StabilityViolation(dt, grid.dx, explicit_dt_bound(grid, sp.Dv))
        self.sp = sp
        self.grid = grid
        self.dt = dt
        self.scheme = scheme
        self.forcing = forcing
        self.x = grid.x()
        if scheme == "imex" and sp.Dv > 0.0:
            nu = sp.Dv * dt / 4.0  # CN over dt/2
            dx2 = grid.dx * grid.dx
            nx = grid.nx
            ab = np.zeros((3, nx))
            ab[1, :] = 1.0 + 2.0 * nu / dx2
            ab[0, 1:] = -nu / dx2
            ab[2, :-1] = -nu / dx2
            ab[0, 1] = -2.0 * nu / dx2   # row 0 ghost reflection
            ab[2, nx - 2] = -2.0 * nu / dx2  # last row ghost reflection
            self._ab = ab
            self._nu = nu
        else:
            self._ab = None
            self._nu = 0.0

    def _rhs_full(self, t, y):
        f = _reaction(y, self.sp)
        if self.sp.Dv > 0.0:
            f[3] += self.sp.Dv * diffusion_operator(y[3], self.grid)
        if self.forcing is not None:
            f[3] += self.forcing(t, self.x)
        return f

    def _rhs_reaction(self, t, y):
        f = _reaction(y, self.sp)
        if self.forcing is not None:
            f[3] += self.forcing(t, self.x)
        return f

    def _cn_half(self, V):
        rhs = V + self._nu * diffusion_operator(V, self.grid)
        return solve_banded((1, 1), self._ab, rhs)

    def advance(self, t: float, y: np.ndarray) -> np.ndarray:
        if self.scheme == "rk4":
            return _rk4(self._rhs_full, t, y, self.dt)
        y = y.copy()
        if self._ab is not None:
            y[3] = self._cn_half(y[3])
        y = _rk4(self._rhs_reaction, t, y, self.dt)
        if self._ab is not None:
            y[3] = self._cn_half(y[3])
        return y


def _postprocess(y: np.ndarray) -> int:
    m = float(y.min())
    if m < _NEGATIVE_ABORT:
        fi, node = np.unravel_index(int(np.argmin(y)), y.shape)
        raise NegativeState(int(node), FIELD_NAMES[fi], m)
    clamped = int(np.count_nonzero(y < 0.0))
    if clamped:
        np.maximum(y, 0.0, out=y)
    return clamped


def step(
    state: FieldState,
    sp: ScaledParams,
    grid: Grid,
    dt: float,
    scheme: str = "imex",
    forcing=None,
) -> FieldState:
    """Advance all four fields by one time step."""
    stepper = _Stepper(sp, grid, dt, scheme, forcing)
    y = stepper.advance(state.t, state.stacked())
    clamped = _postprocess(y)
    return FieldState(state.t + dt, y[0], y[1], y[2], y[3], clamped)


def simulate(
    sp: ScaledParams,
    grid: Grid,
    ic: InitialConditionSpec,
    tmax: float,
    out_every: float,
    scheme: str = "imex",
    dt: float | None = None,
    forcing=None,
) -> SpaceTimeSeries:
    """Run to tmax, recording snapshots every out_every time units.

    Snapshot times are k*out_every plus tmax itself when it is not a
    multiple; boundary-flux diagnostics are recorded per snapshot and
    clamping events are accumulated.  dt defaults to ``default_dt`` and is
    refined so that every output time is hit exactly.
    """
    if tmax < 0.0:
        raise ValueError(f"tmax must be >= 0, got {tmax!r}")
    if tmax > 0.0 and not out_every > 0.0:
        raise ValueError(f"out_every must be positive, got {out_every!r}")

    dt_target = default_dt(sp, grid, scheme) if dt is None else dt
    state = initial_state(grid, ic)
    series = SpaceTimeSeries(grid=grid, params=sp, scheme=scheme, dt=dt_target)
    series.snapshots.append(state.copy())
    series.fluxes.append(boundary_flux(state, grid))
    if tmax == 0.0:
        return series

    n_whole = int(math.floor(tmax / out_every + 1e-9))
    times = [k * out_every for k in range(1, n_whole + 1)]
    if not times or times[-1] < tmax * (1.0 - 1e-12):
        times.append(tmax)

    y = state.stacked()
    t_prev = 0.0
    stepper_cache: dict[float, _Stepper] = {}
    for t_out in times:
        span = t_out - t_prev
        nsteps = max(1, int(math.ceil(span / dt_target - 1e-9)))
        h = span / nsteps
        stepper = stepper_cache.get(h)
        if stepper is None:
            stepper = _Stepper(sp, grid, h, scheme, forcing)
            stepper_cache[h] = stepper
        for i in range(nsteps):
            y = stepper.advance(t_prev + i * h, y)
            series.clamp_total += _postprocess(y)
        t_prev = t_out
        snap = FieldState(t_out, y[0].copy(), y[1].copy(), y[2].copy(), y[3].copy())
        series.snapshots.append(snap)
        series.fluxes.append(boundary_flux(snap, grid))
    return series


def half_max_width(V: np.ndarray, grid: Grid) -> float:
    """Measure of the region where the virion field exceeds half its max."""
    vmax = float(V.max())
    if vmax <= 0.0:
        return 0.0
    return float(np.count_nonzero(V > 0.5 * vmax)) * grid.dx


def write_series(series: SpaceTimeSeries, outdir) -> dict:
    """Write one CSV per field (columns t,x0,x1,...) plus meta.json content.

    Returns the meta dict (the caller decides how to serialize it, so the
    CLI can inject diagnostics on failure paths).
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    nx = series.grid.nx
    header = "t," + ",".join(f"x{i}" for i in range(nx))
    for name in FIELD_NAMES:
        lines = [header]
        for snap in series.snapshots:
            vals = getattr(snap, name)
            lines.append(",".join(repr(float(v)) for v in (snap.t, *vals)))
        (outdir / f"{name}.csv").write_text("\n".join(lines) + "\n")

    flux_left = max(abs(f[0]) for f in series.fluxes)
    flux_right = max(abs(f[1]) for f in series.fluxes)
    meta = {
        "grid": {"L": series.grid.L, "nx": series.grid.nx, "dx": series.grid.dx},
        "scheme": series.scheme,
        "dt": series.dt,
        "params": {
            "rho1": series.params.rho1,
            "rho2": series.params.rho2,
            "rho3": series.params.rho3,
            "rho4": series.params.rho4,
            "rho5": series.params.rho5,
            "Dv": series.params.Dv,
        },
        "snapshots": len(series.snapshots),
        "times": [snap.t for snap in series.snapshots],
        "clamp_count": series.clamp_total,
        "boundary_flux_max": {"left": flux_left, "right": flux_right},
        "fields": [f"{name}.csv" for name in FIELD_NAMES],
    }
    (outdir / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return meta
