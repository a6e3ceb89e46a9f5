"""Radial laboratory for the combined focusing-defocusing NLS with
inverse-square potential: ground states, variational classification,
virial/modulation monitors, and conservative time evolution."""

from .params import PhysParams, Regime, admissibility, make_params
from .grid import RadialField, RadialGrid, make_grid
from .groundstate import GroundStateBundle, build_bundle, eval_W1a, eval_Wa
from .functionals import EnergyReport, report, scale_H1inv, scale_L2inv
from .classify import ClassifierVerdict, Region, classify

__version__ = "0.1.0"

__all__ = [
    "PhysParams", "Regime", "admissibility", "make_params",
    "RadialField", "RadialGrid", "make_grid",
    "GroundStateBundle", "build_bundle", "eval_Wa", "eval_W1a",
    "EnergyReport", "report", "scale_L2inv", "scale_H1inv",
    "ClassifierVerdict", "Region", "classify",
    "__version__",
]
