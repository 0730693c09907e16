"""Backward-Euler realization of the auxiliary flow v' + dPsi(v) ∋ f - B(., u).

Given a frozen trajectory u, each time step is a single proximal evaluation:

    v_{k+1} = prox_{h Psi}( v_k + h * (f(t_{k+1}) - B(t_{k+1}, u_k)) )

which is unconditionally stable by monotonicity of the subdifferential.  The
implied subgradient selection eta_k = (v_k + h f~_k - v_{k+1}) / h is recorded
alongside the solution.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_PROX_TOL = 1e-12


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k h on [0, T]."""

    horizon: float
    n_steps: int

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.n_steps < 1:
            raise ValueError("n_steps must be at least 1")

    @property
    def h(self) -> float:
        return self.horizon / self.n_steps

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)


@dataclass
class Trajectory:
    """Sampled vector values, one per grid node (n_steps + 1 entries)."""

    grid: TimeGrid
    values: np.ndarray  # shape (n_steps + 1, dim)

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, float))
        if self.values.shape[0] != self.grid.n_steps + 1:
            raise ValueError("trajectory length must be n_steps + 1")

    @classmethod
    def constant(cls, grid: TimeGrid, x0) -> "Trajectory":
        x0 = np.atleast_1d(np.asarray(x0, float))
        return cls(grid, np.tile(x0, (grid.n_steps + 1, 1)))

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def node_norms(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=1)

    def sup_norm(self) -> float:
        return float(self.node_norms().max())

    def chi_norm(self, rate: float) -> float:
        """Exponentially weighted sup-norm sup_k e^{-rate t_k} |x_k|."""
        return float((np.exp(-rate * self.grid.nodes) * self.node_norms()).max())


@dataclass
class SelectionTrajectory:
    """Per-step subgradient selections eta_k in dPsi(v_{k+1})."""

    grid: TimeGrid
    eta_values: np.ndarray  # shape (n_steps, dim)

    def __post_init__(self):
        self.eta_values = np.atleast_2d(np.asarray(self.eta_values, float))
        if self.eta_values.shape[0] != self.grid.n_steps:
            raise ValueError("selection length must be n_steps")


def solve_auxiliary(potential, coupling, forcing, u: Trajectory, v0,
                    prox_tol: float = DEFAULT_PROX_TOL):
    """Proximal implicit Euler for the auxiliary problem with frozen u.

    Forcing is sampled at the right endpoint (fully implicit); the coupling is
    evaluated at the frozen trajectory's left node, so each step is a single
    prox.  Returns the velocity trajectory and the subgradient selection.
    """
    grid = u.grid
    h = grid.h
    nodes = grid.nodes
    n = grid.n_steps
    v0 = np.atleast_1d(np.asarray(v0, float))
    v = np.empty((n + 1, v0.size))
    eta = np.empty((n, v0.size))
    v[0] = v0
    for k in range(n):
        t_next = nodes[k + 1]
        f_tilde = np.atleast_1d(np.asarray(forcing(t_next), float)) \
            - coupling.eval(t_next, u.values[k])
        w = v[k] + h * f_tilde
        res = potential.prox(h, w, tol=prox_tol)
        v[k + 1] = res.point
        eta[k] = (w - v[k + 1]) / h
    return Trajectory(grid, v), SelectionTrajectory(grid, eta)


@dataclass
class ContractionReport:
    """Per-node check of |J(u1) - J(u2)|^2 against the Gronwall envelope
    e^t * int_0^t alpha |u1 - u2|^2."""

    nodes: np.ndarray
    left: np.ndarray
    right: np.ndarray
    violations: np.ndarray = field(repr=False)

    @property
    def ok(self) -> bool:
        return not bool(self.violations.any())


def contraction_estimate(v1: Trajectory, v2: Trajectory,
                         u1: Trajectory, u2: Trajectory,
                         coupling, radius=None, slack: float = 0.05) -> ContractionReport:
    """Check the resolvent contraction envelope node by node.

    All four trajectories must share a grid.  ``slack`` is the multiplicative
    allowance for discretization error; a tiny absolute floor keeps exact-zero
    cases from flagging on roundoff.
    """
    grid = v1.grid
    if not (v2.grid == grid and u1.grid == grid and u2.grid == grid):
        raise ValueError("all trajectories must share a grid")
    nodes = grid.nodes
    alpha = np.array([coupling.modulus_at(t, radius) for t in nodes])
    du_sq = np.sum((u1.values - u2.values) ** 2, axis=1)
    integrand = alpha * du_sq
    h = grid.h
    cumulative = np.concatenate(
        ([0.0], np.cumsum(0.5 * h * (integrand[:-1] + integrand[1:]))))
    left = np.sum((v1.values - v2.values) ** 2, axis=1)
    right = np.exp(nodes) * cumulative
    violations = left > right * (1.0 + slack) + 1e-12
    return ContractionReport(nodes=nodes, left=left, right=right,
                             violations=violations)
