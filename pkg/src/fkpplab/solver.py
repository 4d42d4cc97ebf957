"""Explicit finite-difference integration of the (scaled) FKPP equation.

The scaled form advanced here is

    rho_t = eps*D rho_xx + (U/eps) rho (1 - rho),

which is the original equation at eps = 1 and the dimensionless equation
``rho_t = rho_xx + rho(1 - rho)`` at D = U = eps = 1. Forward Euler in time,
second-order central differences in space, Dirichlet boundary nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .errors import InstabilityError, NonpositiveParameterError, NoCrossingError
from .exact import az_profile
from .model import Grid1D, PhysicalParams, ScalarField, check_epsilon


@dataclass(frozen=True)
class BoundaryCondition:
    """Dirichlet values at the two end nodes.

    ``None`` freezes that node at its initial value instead.
    """

    left: float | None = 1.0
    right: float | None = 0.0


@dataclass(frozen=True)
class SolverConfig:
    params: PhysicalParams
    grid: Grid1D
    t_end: float
    epsilon: float = 1.0
    dt: float | None = None
    safety: float = 0.9
    bc: BoundaryCondition = field(default_factory=BoundaryCondition)
    output_every: float = 1.0
    snapshot_times: tuple[float, ...] | None = None
    diffusion: bool = True  # test hook: False isolates the reaction term

    def __post_init__(self):
        object.__setattr__(self, "epsilon", check_epsilon(self.epsilon))
        if not self.t_end > 0:
            raise NonpositiveParameterError(f"t_end must be > 0, got {self.t_end}")
        if not self.output_every > 0:
            raise NonpositiveParameterError(f"output_every must be > 0, got {self.output_every}")
        if not 0 < self.safety <= 1:
            raise NonpositiveParameterError(f"safety must be in (0, 1], got {self.safety}")
        if self.params.U < 0:
            raise NonpositiveParameterError(f"U must be >= 0 for simulation, got {self.params.U}")
        if self.dt is not None and not self.dt > 0:
            raise NonpositiveParameterError(f"dt must be > 0, got {self.dt}")
        if self.snapshot_times is not None:
            ts = tuple(float(s) for s in self.snapshot_times)
            if any(b <= a for a, b in zip(ts, ts[1:])) or ts[0] <= 0 or ts[-1] > self.t_end:
                raise ValueError("snapshot_times must be increasing within (0, t_end]")
            object.__setattr__(self, "snapshot_times", ts)

    @property
    def diffusivity(self) -> float:
        return self.epsilon * self.params.D

    @property
    def reaction_rate(self) -> float:
        return self.params.U / self.epsilon


def stable_dt(config: SolverConfig) -> float:
    """safety * min(dx**2 / (2 eps D), eps / (4 U)); the reaction bound drops out at U = 0."""
    limits = [config.grid.dx**2 / (2.0 * config.diffusivity)] if config.diffusion else []
    if config.params.U > 0:
        limits.append(1.0 / (4.0 * config.reaction_rate))
    if not limits:
        raise NonpositiveParameterError("no diffusion and no reaction: nothing to integrate")
    return config.safety * min(limits)


def effective_dt(config: SolverConfig) -> float:
    limit = stable_dt(config)
    if config.dt is None:
        return limit
    if config.dt > limit * (1 + 1e-12):
        raise InstabilityError(f"dt={config.dt} exceeds the stable step {limit}")
    return config.dt


@dataclass(frozen=True)
class InitialCondition:
    """Initial data on the grid.

    kinds:
      ``step``     rho = 1 for x <= x0, else 0
      ``exp_tail`` rho = min(1, exp(-lam (x - x0)))
      ``az``       AZ kink centred at x0, in dimensionless coordinates
      ``tanh``     rho = (1 - tanh((x - x0)/width)) / 2, a smooth steep step
    """

    kind: Literal["step", "exp_tail", "az", "tanh"] = "step"
    x0: float = 0.0
    lam: float | None = None
    width: float | None = None

    def __post_init__(self):
        if self.kind == "exp_tail" and not (self.lam and self.lam > 0):
            raise NonpositiveParameterError("exp_tail needs lam > 0")
        if self.kind == "tanh" and not (self.width and self.width > 0):
            raise NonpositiveParameterError("tanh needs width > 0")
        if self.kind not in ("step", "exp_tail", "az", "tanh"):
            raise ValueError(f"unknown initial condition {self.kind!r}")

    def evaluate(self, grid: Grid1D, params: PhysicalParams, epsilon: float = 1.0) -> np.ndarray:
        x = grid.x
        if self.kind == "step":
            return np.where(x <= self.x0, 1.0, 0.0)
        if self.kind == "exp_tail":
            return np.exp(-self.lam * np.maximum(x - self.x0, 0.0))
        if self.kind == "tanh":
            return 0.5 * (1.0 - np.tanh((x - self.x0) / self.width))
        params.require_reacting()
        x_scale = math.sqrt(params.U / params.D) / epsilon
        return az_profile((x - self.x0) * x_scale)


@dataclass(frozen=True)
class Trajectory:
    snapshots: tuple[ScalarField, ...]
    config: SolverConfig
    dt_used: float
    n_steps: int
    front_hit_boundary: bool = False

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    def values(self) -> np.ndarray:
        """(n_snapshots, n) array of rho."""
        return np.stack([s.values for s in self.snapshots])


def _apply_bc(rho: np.ndarray, bc: BoundaryCondition, initial: np.ndarray) -> None:
    rho[0] = initial[0] if bc.left is None else bc.left
    rho[-1] = initial[-1] if bc.right is None else bc.right


def _check(rho: np.ndarray) -> None:
    lo, hi = rho.min(), rho.max()
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo < -0.5 or hi > 1.5:
        raise InstabilityError(f"solution left [-0.5, 1.5] (min={lo}, max={hi})")


def _advance(rho: np.ndarray, n_steps: int, dt: float, config: SolverConfig, initial: np.ndarray):
    """In-place forward Euler; boundary nodes are rewritten after every step."""
    r = dt * config.diffusivity / config.grid.dx**2 if config.diffusion else 0.0
    k = dt * config.reaction_rate
    interior = rho[1:-1]
    lap = np.empty_like(interior)
    for _ in range(n_steps):
        if r:
            np.subtract(rho[:-2], 2.0 * interior, out=lap)
            lap += rho[2:]
            lap *= r
        else:
            lap.fill(0.0)
        if k:
            lap += k * interior * (1.0 - interior)
        interior += lap
        _apply_bc(rho, config.bc, initial)
    _check(rho)


def step_explicit(field_: ScalarField, config: SolverConfig, dt: float) -> ScalarField:
    """One forward Euler step of the scaled equation."""
    if field_.grid != config.grid:
        raise ValueError("field is not on the configured grid")
    effective_dt(replace(config, dt=dt))
    rho = np.array(field_.values, dtype=float)
    _advance(rho, 1, dt, config, field_.values)
    return ScalarField(config.grid, rho, field_.time + dt)


def _output_times(config: SolverConfig) -> list[float]:
    if config.snapshot_times is not None:
        return list(config.snapshot_times)
    n_full = int(math.floor(config.t_end / config.output_every + 1e-9))
    times = [k * config.output_every for k in range(1, n_full + 1)]
    if not times or config.t_end - times[-1] > 1e-9 * config.t_end:
        times.append(config.t_end)
    return times


def simulate(ic: InitialCondition, config: SolverConfig) -> Trajectory:
    """Integrate from t = 0 and record snapshots.

    Each inter-snapshot interval is split into equal steps no larger than the
    stable step, so snapshot times are hit exactly.
    """
    dt_max = effective_dt(config)
    initial = ic.evaluate(config.grid, config.params, config.epsilon).astype(float)
    rho = initial.copy()
    _apply_bc(rho, config.bc, initial)
    snapshots = [ScalarField(config.grid, rho.copy(), 0.0)]
    t = 0.0
    total_steps = 0
    for t_next in _output_times(config):
        span = t_next - t
        n = max(1, int(math.ceil(span / dt_max - 1e-9)))
        _advance(rho, n, span / n, config, initial)
        total_steps += n
        t = t_next
        snapshots.append(ScalarField(config.grid, rho.copy(), t))
    return Trajectory(
        tuple(snapshots),
        config,
        dt_used=dt_max,
        n_steps=total_steps,
        front_hit_boundary=_front_near_boundary(snapshots, config),
    )


def _front_near_boundary(snapshots, config: SolverConfig, level: float = 0.5, margin_cells: int = 10) -> bool:
    """True once the front comes within max(10 cells, 2 front widths) of x_max.

    A Dirichlet-0 wall halts the front about one width eps*sqrt(D/U) short of
    x_max, so a margin in cells alone can miss a pinned front on fine grids.
    """
    from .front import front_position

    grid = config.grid
    p = config.params
    margin = margin_cells * grid.dx
    if p.U > 0:
        margin = max(margin, 2.0 * config.epsilon * math.sqrt(p.D / p.U))
    limit = grid.x_max - margin
    for snap in snapshots:
        try:
            if front_position(snap, level) > limit:
                return True
        except NoCrossingError:
            continue
    return False
