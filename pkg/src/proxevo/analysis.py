"""Quantitative verification toolkit.

Discrete Gronwall envelopes, the continuous-dependence (stability) estimate,
convergence-order fitting, and the independent brute-force prox oracle used to
cross-check the catalog implementations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DegenerateInput
from .picard import ProblemSpec, SolverConfig, picard_solve
from .resolvent import TimeGrid

_trapz = getattr(np, "trapezoid", np.trapz)


@dataclass
class GronwallCheck:
    nodes: np.ndarray
    bound: np.ndarray
    violations: np.ndarray

    @property
    def ok(self) -> bool:
        return not bool(self.violations.any())


def gronwall_bound(a_samples, b: float, lam_samples, grid: TimeGrid,
                   slack: float = 0.0) -> GronwallCheck:
    """From a(t) <= b + int_0^t lam a follows a(t) <= b e^{int_0^t lam}.

    Returns the per-node envelope and flags nodes where a exceeds it beyond
    the multiplicative slack.
    """
    nodes = grid.nodes
    a = np.asarray(a_samples, float)
    lam = np.asarray(lam_samples, float)
    if np.any(lam < 0):
        raise ValueError("lambda must be nonnegative")
    h = grid.h
    cum = np.concatenate(([0.0], np.cumsum(0.5 * h * (lam[:-1] + lam[1:]))))
    bound = b * np.exp(cum)
    violations = a > bound * (1.0 + slack) + 1e-14
    return GronwallCheck(nodes=nodes, bound=bound, violations=violations)


@dataclass
class StabilityReport:
    sup_diff_sq: float
    data_gap: float
    fitted_M: float
    bound_ok: bool


def stability_check(spec1: ProblemSpec, spec2: ProblemSpec, cfg: SolverConfig,
                    m_max: float = None) -> StabilityReport:
    """Continuous dependence on the data: solve both problems and compare

        ||u1 - u2||_sup^2  vs  M e^{int alpha} (|du0|^2 + |dv0|^2 + ||f-g||_L2^2).

    The specs must share potential, grid, and a global coupling; M is fitted
    as the measured ratio and, if m_max is given, checked against it.
    """
    if spec1.potential is not spec2.potential:
        raise ValueError("specs must share the potential")
    if not spec1.coupling.is_global:
        raise ValueError("stability estimate requires a global modulus")
    u1, _, _, _ = picard_solve(spec1, cfg)
    u2, _, _, _ = picard_solve(spec2, cfg)
    grid = u1.grid
    nodes = grid.nodes
    sup_diff_sq = float(np.max(np.sum((u1.values - u2.values) ** 2, axis=1)))
    f_gap_sq = np.array([
        np.sum((np.atleast_1d(spec1.forcing(t)) - np.atleast_1d(spec2.forcing(t))) ** 2)
        for t in nodes])
    data_gap = (float(np.sum((spec1.u0 - spec2.u0) ** 2))
                + float(np.sum((spec1.v0 - spec2.v0) ** 2))
                + float(_trapz(f_gap_sq, nodes)))
    alpha = np.array([spec1.coupling.modulus_at(t) for t in nodes])
    growth = float(np.exp(_trapz(alpha, nodes)))
    fitted = sup_diff_sq / (growth * data_gap) if data_gap > 0 else 0.0
    if m_max is None:
        bound_ok = True
    else:
        bound_ok = sup_diff_sq <= m_max * growth * data_gap + 1e-16
    return StabilityReport(sup_diff_sq=sup_diff_sq, data_gap=data_gap,
                           fitted_M=fitted, bound_ok=bound_ok)


def convergence_order(errors) -> float:
    """Average observed order from a sequence of (h, error) pairs.

    For halving step sizes this is the mean of log2(e_i / e_{i+1})."""
    pairs = list(errors)
    if len(pairs) < 2:
        raise DegenerateInput("need at least two (h, error) pairs")
    orders = []
    for (h0, e0), (h1, e1) in zip(pairs, pairs[1:]):
        if e0 == 0.0 or e1 == 0.0:
            raise DegenerateInput("zero error makes the order undefined")
        orders.append(np.log(e0 / e1) / np.log(h0 / h1))
    return float(np.mean(orders))


def brute_force_prox_1d(potential, lam: float, z: float,
                        n_grid: int = 2001) -> float:
    """Independent 1-D prox oracle: dense grid scan of the prox objective on
    [0, |z|] followed by golden-section refinement of the bracketing triple.

    Deliberately ignorant of the stationarity equation used by the catalog
    implementation.
    """
    a = abs(float(z))
    if a == 0.0:
        return 0.0
    rs = np.linspace(0.0, a, n_grid)
    obj_vals = np.asarray(potential.psi(rs), float) + (rs - a) ** 2 / (2.0 * lam)
    k = int(np.argmin(obj_vals))

    def objective(r):
        return float(potential.psi(abs(r))) + (r - a) ** 2 / (2.0 * lam)

    if 0 < k < n_grid - 1 and obj_vals[k] < obj_vals[k - 1] and obj_vals[k] < obj_vals[k + 1]:
        res = optimize.minimize_scalar(
            objective, bracket=(rs[k - 1], rs[k], rs[k + 1]), method="golden",
            options={"xtol": 1e-12})
    else:
        lo = rs[max(k - 1, 0)]
        hi = rs[min(k + 1, n_grid - 1)]
        res = optimize.minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-12})
    r_star = float(np.clip(res.x, 0.0, a))
    if objective(0.0) <= objective(r_star):
        r_star = 0.0
    return float(np.sign(z)) * r_star
