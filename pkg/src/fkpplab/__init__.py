"""Numerical laboratory for FKPP fronts under hyperbolic scaling."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .model import (  # noqa: F401
    ActionField,
    ActionFunctionalSpec,
    AnsatzParams,
    DimensionlessMap,
    FrontTrace,
    Grid1D,
    MomentumRoots,
    PhysicalParams,
    ScalarField,
    ScalingParam,
    TravelingFrame,
    make_grid,
    to_dimensionless,
)
