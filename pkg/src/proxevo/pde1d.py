"""Desk-scale 1-D instantiation: u_tt - d/dx p + b(t, x, u) = f with
p in dpsi(d/dx u_t), Dirichlet boundary values.

The dissipation potential acts on difference quotients of the velocity field:
Psi(v) = sum_e h_x psi((v_i - v_{i-1}) / h_x) over the n_cells edges, with the
boundary velocity pinned to zero (the Dirichlet data is time-independent).
The result is a ProblemSpec of dimension n_cells - 1 consumable by the
fixed-point engine.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded

from .coupling import NemytskiiCoupling, ZeroCoupling
from .errors import BoundaryMismatch, NonConvergence
from .picard import ProblemSpec
from .potentials import Potential, ProxResult, Quadratic, RadialPotential

_SPLIT_MAX_ITER = 100_000
_FALLBACK_MAX_ITER = 20000


def _solve_spd_banded(ab, rhs):
    # LAPACK ptsv rejects 1x1 systems; fall back to the scalar division
    if ab.shape[1] == 1:
        return rhs / ab[1, 0]
    return solveh_banded(ab, rhs)


@dataclass(frozen=True)
class Mesh1D:
    n_cells: int
    length: float
    left_value: float = 0.0
    right_value: float = 0.0

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValueError("need at least 2 cells")
        if self.length <= 0:
            raise ValueError("length must be positive")

    @property
    def h_x(self) -> float:
        return self.length / self.n_cells

    @property
    def interior_dim(self) -> int:
        return self.n_cells - 1

    @property
    def interior_nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.n_cells + 1)[1:-1]


class DiscretePotentialPsi(Potential):
    """Psi(v) = sum over edges of h_x * psi(difference quotient).

    Convex as a composition of the convex radial psi with the linear
    difference map; the Dirichlet rows are eliminated, so the vector v holds
    interior values only.
    """

    kind = "discrete_gradient"

    def __init__(self, mesh: Mesh1D, psi: RadialPotential):
        self.mesh = mesh
        self.psi = psi
        n = mesh.interior_dim
        h_x = mesh.h_x
        # second-difference operator D^T D on interior nodes, upper banded form
        self._dtd_banded = np.zeros((2, n))
        self._dtd_banded[0, 1:] = -1.0 / h_x ** 2
        self._dtd_banded[1, :] = 2.0 / h_x ** 2

    def _quotients(self, v):
        v = np.atleast_1d(np.asarray(v, float))
        padded = np.concatenate(([0.0], v, [0.0]))
        return np.diff(padded) / self.mesh.h_x

    def value(self, x):
        d = self._quotients(x)
        return float(self.mesh.h_x * np.sum(self.psi.psi(np.abs(d))))

    def subdiff(self, x):
        # chain rule with the minimal-norm edge selection; for each edge the
        # scalar subgradient is slope(|d|) sign(d), zero at kinks
        d = self._quotients(x)
        s = np.where(d == 0.0, 0.0,
                     np.sign(d) * np.asarray(self.psi.slope(np.abs(d)), float))
        return -np.diff(s)

    def prox(self, lam, z, tol=1e-10):
        z = np.atleast_1d(np.asarray(z, float))
        if isinstance(self.psi, Quadratic):
            return self._prox_quadratic(lam, z)
        try:
            return self._prox_splitting(lam, z, tol)
        except NonConvergence:
            return self._prox_fallback(lam, z, tol)

    def _prox_quadratic(self, lam, z):
        # (I + lam * scale * h_x * D^T D) v = z, SPD tridiagonal
        n = self.mesh.interior_dim
        coeff = lam * self.psi.scale * self.mesh.h_x
        ab = np.zeros((2, n))
        ab[0] = coeff * self._dtd_banded[0]
        ab[1] = 1.0 + coeff * self._dtd_banded[1]
        v = _solve_spd_banded(ab, z)
        return ProxResult(point=v, inner_iterations=1, residual=0.0)

    def _prox_splitting(self, lam, z, tol):
        """Operator splitting (ADMM) on w = Dv: alternating per-edge scalar
        prox of h_x psi with a banded consensus solve."""
        mesh = self.mesh
        h_x = mesh.h_x
        n = mesh.interior_dim
        n_edges = mesh.n_cells
        rho = 1.0 / lam
        # (1/lam) I + rho D^T D in upper banded storage, assembled once
        ab = np.zeros((2, n))
        ab[0] = rho * self._dtd_banded[0]
        ab[1] = 1.0 / lam + rho * self._dtd_banded[1]
        w = self._quotients(z)
        dual = np.zeros(n_edges)
        v = z.copy()
        edge_lam = h_x / rho
        for it in range(1, _SPLIT_MAX_ITER + 1):
            rhs = z / lam + rho * self._apply_dt(w - dual)
            v_new = _solve_spd_banded(ab, rhs)
            d = self._quotients(v_new)
            q = d + dual
            w_new = np.array([
                float(self.psi.prox(edge_lam, qe).point[0]) for qe in q])
            dual = dual + d - w_new
            primal = float(np.linalg.norm(d - w_new))
            dual_res = rho * float(np.linalg.norm(self._apply_dt(w_new - w)))
            w = w_new
            v = v_new
            if max(primal, dual_res) <= tol:
                return ProxResult(point=v, inner_iterations=it,
                                  residual=max(primal, dual_res))
        raise NonConvergence("splitting prox did not converge",
                             residual=max(primal, dual_res))

    def _apply_dt(self, edge_vals):
        # adjoint of the difference-quotient map, restricted to interior nodes
        return -np.diff(edge_vals) / self.mesh.h_x

    def _prox_fallback(self, lam, z, tol):
        """Guaranteed-descent fallback: proximal gradient on the objective with
        psi replaced by its Moreau envelope (smoothing mu), mu driven down."""
        h_x = self.mesh.h_x
        v = z.copy()
        mu = 1e-2
        step_scale = 1.0
        for it in range(1, _FALLBACK_MAX_ITER + 1):
            d = self._quotients(v)
            prox_d = np.array([float(self.psi.prox(mu, de).point[0]) for de in d])
            grad_edges = h_x * (d - prox_d) / mu
            grad = self._apply_dt(grad_edges) + (v - z) / lam
            lip = h_x * (2.0 / h_x ** 2) * 2.0 / mu + 1.0 / lam
            v = v - step_scale / lip * grad
            gnorm = float(np.linalg.norm(grad))
            if gnorm <= 0.1 * tol * (1.0 + mu):
                if mu <= tol:
                    return ProxResult(point=v, inner_iterations=it, residual=gnorm)
                mu = max(mu * 0.1, tol)
        raise NonConvergence("fallback prox did not converge", residual=gnorm)


def prox_discrete_psi(dpsi: DiscretePotentialPsi, lam, z, tol=1e-10) -> ProxResult:
    return dpsi.prox(lam, z, tol=tol)


def assemble_problem(mesh: Mesh1D, psi: RadialPotential, b=None, c_b: float = 0.0,
                     f=None, u0=None, v0=None, horizon: float = 1.0) -> ProblemSpec:
    """Build the finite-dimensional ProblemSpec for the interval problem.

    ``f`` maps (t, x) to a scalar; ``u0`` and ``v0`` map x to scalars and must
    match the Dirichlet data (u at the boundary values, v at zero).  ``b`` is
    the Caratheodory integrand b(t, x, u) with global modulus ``c_b``.
    """
    xs = mesh.interior_nodes
    u0 = u0 or (lambda x: 0.0)
    v0 = v0 or (lambda x: 0.0)
    f = f or (lambda t, x: 0.0)
    for x_b, target in ((0.0, mesh.left_value), (mesh.length, mesh.right_value)):
        if abs(u0(x_b) - target) > 1e-12:
            raise BoundaryMismatch(f"u0({x_b}) = {u0(x_b)} != boundary value {target}")
        if abs(v0(x_b)) > 1e-12:
            raise BoundaryMismatch(f"v0({x_b}) must vanish on the boundary")
    potential = DiscretePotentialPsi(mesh, psi)
    if b is None:
        coupling = ZeroCoupling()
    else:
        coupling = NemytskiiCoupling(b, c_b, sites=xs)
    forcing = lambda t: np.array([f(t, x) for x in xs])
    return ProblemSpec(dim=mesh.interior_dim, potential=potential,
                       coupling=coupling, forcing=forcing,
                       u0=np.array([u0(x) for x in xs]),
                       v0=np.array([v0(x) for x in xs]),
                       horizon=horizon)
