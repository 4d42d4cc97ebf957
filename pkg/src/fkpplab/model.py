"""Core value types shared by the solver, exact-solution and measurement code.

Everything here is an immutable value object: dataclasses are frozen and the
numpy arrays they carry are marked read-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import (
    InvalidBetaError,
    InvalidBoundsError,
    NonpositiveParameterError,
    SubcriticalSpeedError,
)

RHO_FLOOR = 1e-290
"""Lower clamp applied to rho before taking logs (keeps -eps*ln(rho) finite)."""

TOL_MAX_PRINCIPLE = 1e-9


def _readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class PhysicalParams:
    """Diffusion constant ``D`` and reaction rate ``U``.

    Negative ``U`` is representable (the G_AZ audit needs it) but every
    front-speed routine calls :meth:`require_reacting` first.
    """

    D: float = 1.0
    U: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.D) and self.D > 0):
            raise NonpositiveParameterError(f"D must be finite and > 0, got {self.D}")
        if not math.isfinite(self.U):
            raise NonpositiveParameterError(f"U must be finite, got {self.U}")

    def require_reacting(self) -> None:
        if self.U <= 0:
            raise NonpositiveParameterError(f"U must be > 0 here, got {self.U}")

    @property
    def mass_constant(self) -> float:
        """``1/(2D)``, reported alongside the double momentum root."""
        return 1.0 / (2.0 * self.D)


@dataclass(frozen=True)
class ScalingParam:
    epsilon: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and 0 < self.epsilon <= 1):
            raise NonpositiveParameterError(
                f"epsilon must satisfy 0 < epsilon <= 1, got {self.epsilon}"
            )


def check_epsilon(epsilon) -> float:
    """Return epsilon as a validated float (accepts a float or ScalingParam)."""
    if isinstance(epsilon, ScalingParam):
        return epsilon.epsilon
    return ScalingParam(float(epsilon)).epsilon


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise InvalidBoundsError("grid bounds must be finite")
        if not self.x_max > self.x_min:
            raise InvalidBoundsError(f"need x_max > x_min, got [{self.x_min}, {self.x_max}]")
        if int(self.n) != self.n or self.n < 3:
            raise InvalidBoundsError(f"need an integer n >= 3, got {self.n}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return _readonly(np.linspace(self.x_min, self.x_max, self.n))


def make_grid(x_min: float, x_max: float, n: int) -> Grid1D:
    return Grid1D(float(x_min), float(x_max), int(n))


def grid_from_spacing(x_min: float, x_max: float, dx: float) -> Grid1D:
    """Uniform grid starting at ``x_min`` with spacing ``dx``.

    ``x_max`` is moved outward to the nearest whole number of cells.
    """
    if not dx > 0:
        raise InvalidBoundsError(f"dx must be > 0, got {dx}")
    if not x_max > x_min:
        raise InvalidBoundsError(f"need x_max > x_min, got [{x_min}, {x_max}]")
    cells = max(2, int(math.ceil((x_max - x_min) / dx - 1e-9)))
    return Grid1D(float(x_min), float(x_min + cells * dx), cells + 1)


@dataclass(frozen=True)
class ScalarField:
    grid: Grid1D
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        vals = _readonly(self.values)
        if vals.shape != (self.grid.n,):
            raise ValueError(f"values shape {vals.shape} does not match grid n={self.grid.n}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x


@dataclass(frozen=True)
class ActionField:
    """G = -eps * ln(max(rho, RHO_FLOOR)) on a grid, with the floor mask."""

    grid: Grid1D
    values: np.ndarray
    epsilon: float
    time: float = 0.0
    floor_applied: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        mask = self.floor_applied
        if mask is None:
            mask = np.zeros(self.grid.n, dtype=bool)
        mask = np.array(mask, dtype=bool)
        mask.flags.writeable = False
        object.__setattr__(self, "floor_applied", mask)
        if self.values.shape != (self.grid.n,) or mask.shape != (self.grid.n,):
            raise ValueError("action values/mask do not match the grid")

    @property
    def rho(self) -> np.ndarray:
        """Inverse transform exp(-G/eps)."""
        return np.exp(-self.values / self.epsilon)


@dataclass(frozen=True)
class TravelingFrame:
    v: float
    origin: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.v):
            raise ValueError("frame speed must be finite")

    def z(self, x, t):
        return np.asarray(x) - self.v * np.asarray(t) - self.origin


@dataclass(frozen=True)
class DimensionlessMap:
    """(x, t) -> (sqrt(U/D) x / eps, U t / eps)."""

    epsilon: float
    params: PhysicalParams

    def __post_init__(self):
        eps = float(getattr(self.epsilon, "epsilon", self.epsilon))
        if not (math.isfinite(eps) and eps > 0):
            raise NonpositiveParameterError(f"epsilon must be > 0, got {eps}")
        object.__setattr__(self, "epsilon", eps)
        self.params.require_reacting()

    @property
    def x_scale(self) -> float:
        return math.sqrt(self.params.U / self.params.D) / self.epsilon

    @property
    def t_scale(self) -> float:
        return self.params.U / self.epsilon

    def forward(self, x, t):
        return x * self.x_scale, t * self.t_scale

    def inverse(self, x_tilde, t_tilde):
        return x_tilde / self.x_scale, t_tilde / self.t_scale


def to_dimensionless(dmap: DimensionlessMap, x, t):
    return dmap.forward(x, t)


def from_dimensionless(dmap: DimensionlessMap, x_tilde, t_tilde):
    return dmap.inverse(x_tilde, t_tilde)


@dataclass(frozen=True)
class AnsatzParams:
    """Constants of the trial action G = c x**a t**b - alpha t."""

    c: float
    a: float
    b: float
    alpha: float

    @classmethod
    def solved(cls, params: PhysicalParams) -> AnsatzParams:
        return cls(c=1.0 / (4.0 * params.D), a=2.0, b=-1.0, alpha=params.U)


@dataclass(frozen=True)
class FrontTrace:
    """Front positions x*(t) at a fixed crossing level, optionally with a fitted speed."""

    level: float
    times: np.ndarray
    positions: np.ndarray
    fitted_speed: float | None = None
    fit_stderr: float | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.shape != np.shape(self.positions):
            raise ValueError("times and positions differ in length")
        if np.any(np.diff(t) <= 0):
            raise ValueError("front samples must be strictly increasing in t")


@dataclass(frozen=True)
class MomentumRoots:
    p_minus: float
    p_plus: float

    def __post_init__(self):
        if self.p_minus > self.p_plus:
            raise ValueError("p_minus must not exceed p_plus")


Variant = Literal["G1", "G2", "G3", "G_AZ"]


@dataclass(frozen=True)
class ActionFunctionalSpec:
    """A closed-form Hamilton-Jacobi action.

    ``beta`` is used by G2, ``v`` and ``branch`` by G3. G1 is the quadratic
    action; the other three are linear in x and t.
    """

    variant: Variant
    params: PhysicalParams = field(default_factory=PhysicalParams)
    beta: float | None = None
    v: float | None = None
    branch: Literal["plus", "minus"] = "plus"

    def __post_init__(self):
        p = self.params
        if self.variant == "G2":
            if self.beta is None or not self.beta > p.U:
                raise InvalidBetaError(
                    f"G2 needs beta > U (got beta={self.beta}, U={p.U})"
                )
        elif self.variant == "G3":
            if self.v is None:
                raise SubcriticalSpeedError("G3 needs a frame speed v")
            if self.branch not in ("plus", "minus"):
                raise ValueError(f"branch must be 'plus' or 'minus', got {self.branch!r}")
            from .exact import momentum_roots

            momentum_roots(self.v, p)
        elif self.variant == "G_AZ":
            p.require_reacting()
        elif self.variant != "G1":
            raise ValueError(f"unknown action variant {self.variant!r}")

    @property
    def is_linear(self) -> bool:
        return self.variant != "G1"

    @property
    def slope(self) -> float | None:
        """Constant dG/dx of the linear variants (None for G1)."""
        p = self.params
        if self.variant == "G2":
            return math.sqrt((self.beta - p.U) / p.D)
        if self.variant == "G3":
            from .exact import momentum_roots

            roots = momentum_roots(self.v, p)
            return roots.p_plus if self.branch == "plus" else roots.p_minus
        if self.variant == "G_AZ":
            return math.sqrt(2.0 * p.U / (3.0 * p.D))
        return None
