"""Hyperbolic-scaling analysis: actions G = -eps ln rho and their residuals.

Residual arrays have shape ``(n_snapshots - 2, n)``: row k belongs to the
middle snapshot ``k + 1``. Nodes where the stencil is unavailable (grid ends,
floored values) hold NaN.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InsufficientSamplesError, NoCrossingError, OrderingError
from .exact import action_value
from .front import _rightmost_crossing
from .model import (
    RHO_FLOOR,
    ActionField,
    ActionFunctionalSpec,
    Grid1D,
    PhysicalParams,
    ScalarField,
    check_epsilon,
    grid_from_spacing,
)
from .solver import BoundaryCondition, InitialCondition, SolverConfig, simulate, stable_dt

LEADING_EDGE = (1e-12, 1e-2)
RESOLVED = (1e-12, np.inf)


def action_from_field(field: ScalarField, epsilon: float) -> ActionField:
    eps = check_epsilon(epsilon)
    rho = np.asarray(field.values)
    if np.any(rho < 0):
        raise ValueError("rho must be nonnegative for the log transform")
    floored = rho < RHO_FLOOR
    G = -eps * np.log(np.maximum(rho, RHO_FLOOR))
    return ActionField(field.grid, G, eps, field.time, floored)


def sample_action(spec: ActionFunctionalSpec, grid: Grid1D, t: float, epsilon: float = 1.0) -> ActionField:
    """Closed-form action evaluated on a grid (no floor)."""
    return ActionField(grid, action_value(spec, grid.x, t), check_epsilon(epsilon), t)


def _stack(actions):
    actions = list(actions)
    if len(actions) < 3:
        raise InsufficientSamplesError(f"need >= 3 snapshots, got {len(actions)}")
    grid = actions[0].grid
    if any(a.grid != grid for a in actions):
        raise ValueError("all snapshots must share one grid")
    times = np.array([a.time for a in actions])
    if np.any(np.diff(times) <= 0):
        raise OrderingError("snapshot times must be strictly increasing")
    G = np.stack([a.values for a in actions])
    floor = np.stack([a.floor_applied for a in actions])
    return grid, times, G, floor


def _differences(actions):
    grid, times, G, floor = _stack(actions)
    dx = grid.dx
    mid = G[1:-1]
    dt2 = (times[2:] - times[:-2])[:, None]
    g_t = np.full_like(mid, np.nan)
    g_x = np.full_like(mid, np.nan)
    g_xx = np.full_like(mid, np.nan)
    g_t[:, 1:-1] = (G[2:, 1:-1] - G[:-2, 1:-1]) / dt2
    g_x[:, 1:-1] = (mid[:, 2:] - mid[:, :-2]) / (2.0 * dx)
    g_xx[:, 1:-1] = (mid[:, 2:] - 2.0 * mid[:, 1:-1] + mid[:, :-2]) / dx**2
    bad = floor[1:-1] | floor[2:] | floor[:-2]
    bad[:, 1:] |= floor[1:-1, :-1]
    bad[:, :-1] |= floor[1:-1, 1:]
    for arr in (g_t, g_x, g_xx):
        arr[bad] = np.nan
    return mid, g_t, g_x, g_xx


def g_equation_residual(actions, params: PhysicalParams, epsilon: float) -> np.ndarray:
    """G_t - eps D G_xx + D G_x**2 + U (1 - exp(-G/eps)), central differences."""
    eps = check_epsilon(epsilon)
    G, g_t, g_x, g_xx = _differences(actions)
    D, U = params.D, params.U
    return g_t - eps * D * g_xx + D * g_x**2 + U * (-np.expm1(-G / eps))


def hj_limit_residual(actions, params: PhysicalParams) -> np.ndarray:
    """G_t + D G_x**2 + U, central differences; vanishes only as eps -> 0."""
    _, g_t, g_x, _ = _differences(actions)
    return g_t + params.D * g_x**2 + params.U


def region_mask(actions, rho_range=LEADING_EDGE) -> np.ndarray:
    """Boolean mask (middle snapshots) of nodes with rho in ``rho_range``, floor excluded."""
    acts = list(actions)[1:-1]
    lo, hi = rho_range
    rho = np.stack([a.rho for a in acts])
    floor = np.stack([a.floor_applied for a in acts])
    return (rho >= lo) & (rho <= hi) & ~floor


def masked_stat(residual: np.ndarray, mask: np.ndarray, stat=np.median) -> float:
    vals = np.abs(residual[mask & np.isfinite(residual)])
    if vals.size == 0:
        raise InsufficientSamplesError("no valid residual nodes in the requested region")
    return float(stat(vals))


def zero_level(action: ActionField, level: float = 0.0) -> float:
    """Rightmost crossing of G = ``level`` (G rising through it), linearly interpolated.

    With ``level = 0`` this is the front condition G(t, x(t)) = 0 for the
    closed-form actions.
    """
    s = np.asarray(action.values) - level
    try:
        return _rightmost_crossing(action.grid.x, s, downward=False)
    except NoCrossingError:
        raise NoCrossingError(f"action never crosses {level}") from None


def action_front(action: ActionField, rho_level: float = 0.5) -> float:
    """Front of a simulated action: the G = -eps ln(rho_level) crossing.

    G^eps = -eps ln rho is nonnegative, so its zero set is only reached in the
    limit; the threshold -eps ln(rho_level) -> 0 with eps.
    """
    return zero_level(action, -action.epsilon * math.log(rho_level))


# -- epsilon sweep ------------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    """Base configuration for an epsilon sweep, in scaled coordinates.

    Each row uses ``dx = eps * cell`` and an IC width of ``ic_width_cells * dx``,
    so every row is the same unscaled problem viewed at a different eps.
    """

    params: PhysicalParams = field(default_factory=PhysicalParams)
    x_min: float = -2.0
    x_max: float = 10.0
    cell: float = 0.05
    t_star: float = 1.0
    safety: float = 0.9
    ic_width_cells: float = 5.0
    x0: float = 0.0
    dt_probe_steps: int = 20


@dataclass
class SweepRow:
    epsilon: float
    front_error: float = math.nan
    hj_residual_median: float = math.nan
    g_eq_residual_median: float = math.nan
    x_front: float = math.nan
    n_leading_edge: int = 0
    error: str | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def _row_config(eps: float, base: SweepConfig):
    grid = grid_from_spacing(base.x_min, base.x_max, eps * base.cell)
    probe = SolverConfig(base.params, grid, t_end=base.t_star, epsilon=eps, safety=base.safety)
    delta = base.dt_probe_steps * stable_dt(probe)
    cfg = SolverConfig(
        base.params,
        grid,
        t_end=base.t_star + delta,
        epsilon=eps,
        safety=base.safety,
        bc=BoundaryCondition(1.0, 0.0),
        snapshot_times=(base.t_star - delta, base.t_star, base.t_star + delta),
    )
    ic = InitialCondition("tanh", x0=base.x0, width=base.ic_width_cells * grid.dx)
    return ic, cfg


def sweep_row(eps: float, base: SweepConfig) -> SweepRow:
    row = SweepRow(epsilon=eps)
    try:
        ic, cfg = _row_config(eps, base)
        traj = simulate(ic, cfg)
        acts = [action_from_field(s, eps) for s in traj.snapshots[1:]]
        p = base.params
        row.x_front = action_front(acts[1])
        row.front_error = abs(row.x_front - 2.0 * math.sqrt(p.D * p.U) * base.t_star)
        edge = region_mask(acts, LEADING_EDGE)
        row.n_leading_edge = int(edge.sum())
        row.hj_residual_median = masked_stat(hj_limit_residual(acts, p), edge)
        row.g_eq_residual_median = masked_stat(g_equation_residual(acts, p, eps), edge)
    except Exception as exc:  # rows are independent; record and move on
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def max_workers(n_tasks: int) -> int:
    """Worker count, capped by FKPPLAB_MAX_WORKERS when set."""
    cap = os.environ.get("FKPPLAB_MAX_WORKERS")
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, min(n, n_tasks))


def epsilon_sweep(eps_list, base: SweepConfig | None = None, workers: int | None = None) -> list[SweepRow]:
    eps_list = [check_epsilon(e) for e in eps_list]
    if not eps_list:
        raise ValueError("eps_list is empty")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise OrderingError(f"eps_list must be strictly decreasing, got {eps_list}")
    base = base or SweepConfig()
    workers = workers or max_workers(len(eps_list))
    if workers == 1:
        return [sweep_row(e, base) for e in eps_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(sweep_row, eps_list, [base] * len(eps_list)))


def _strictly_decreasing(values) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def sweep_verdict(rows: list[SweepRow]) -> dict:
    """Trend flags for a sweep; 'n/a' when there is nothing to compare."""
    failed = [r.epsilon for r in rows if r.error]
    if len(rows) < 2 or failed:
        na = "n/a"
        return {
            "front_error_decreasing": na,
            "hj_residual_decreasing": na,
            "g_eq_residual_decreasing": na,
            "monotone": na,
            "failed_rows": failed,
        }
    fe = _strictly_decreasing([r.front_error for r in rows])
    hj = _strictly_decreasing([r.hj_residual_median for r in rows])
    geq = _strictly_decreasing([r.g_eq_residual_median for r in rows])
    return {
        "front_error_decreasing": fe,
        "hj_residual_decreasing": hj,
        "g_eq_residual_decreasing": geq,
        "monotone": fe and hj,
        "failed_rows": failed,
    }
