"""Solver library for second-order evolution inclusions
u'' + dPsi(u') + B(t, u) ∋ f via proximal implicit Euler and Picard iteration."""

__version__ = "0.1.0"

from .coupling import (CubicCoupling, CustomCoupling, GlobalLipschitz,
                       LinearCoupling, LocalLipschitz, NemytskiiCoupling,
                       ZeroCoupling, lipschitz_budget, make_coupling)
from .picard import (ContinuationResult, PicardReport, ProblemSpec,
                     SolverConfig, apply_F, continue_maximal, horizon_local,
                     picard_solve)
from .potentials import (AbsValue, ExpPower, ExpXLogX, PowerPlusAbs,
                         ProxResult, Quadratic, Radial1DTable, Separable,
                         XExpX, XLogX, ZeroPotential, catalog, make_potential)
from .resolvent import (ContractionReport, SelectionTrajectory, TimeGrid,
                        Trajectory, contraction_estimate, solve_auxiliary)

__all__ = [
    "AbsValue", "ContinuationResult", "ContractionReport", "CubicCoupling",
    "CustomCoupling", "ExpPower", "ExpXLogX", "GlobalLipschitz",
    "LinearCoupling", "LocalLipschitz", "NemytskiiCoupling", "PicardReport",
    "PowerPlusAbs", "ProblemSpec", "ProxResult", "Quadratic", "Radial1DTable",
    "SelectionTrajectory", "Separable", "SolverConfig", "TimeGrid",
    "Trajectory", "XExpX", "XLogX", "ZeroCoupling", "ZeroPotential",
    "apply_F", "catalog", "continue_maximal", "contraction_estimate",
    "horizon_local", "lipschitz_budget", "make_coupling", "make_potential",
    "picard_solve", "solve_auxiliary",
]
