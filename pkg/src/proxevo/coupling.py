"""Nonlinear coupling operators B(t, u) with Lipschitz metadata.

Each coupling carries either a global modulus alpha(t) or a local family
alpha_R(R, t), plus a bound g(t) on |B(t, 0)|.  Evaluation must be pure and
deterministic in (t, u).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ModulusUnavailable

_trapz = getattr(np, "trapezoid", np.trapz)


@dataclass(frozen=True)
class GlobalLipschitz:
    alpha: Callable[[float], float]


@dataclass(frozen=True)
class LocalLipschitz:
    alpha_R: Callable[[float, float], float]  # (radius, t) -> modulus


class Coupling:
    kind = "abstract"
    lipschitz = None

    def eval(self, t, u) -> np.ndarray:
        raise NotImplementedError

    def zero_bound(self, t) -> float:
        """The g(t) bounding |B(t, 0)|."""
        return float(np.linalg.norm(self.eval(t, np.zeros(1))))

    def modulus_at(self, t, radius=None) -> float:
        """Lipschitz modulus at time t, resolved for the given radius."""
        if isinstance(self.lipschitz, GlobalLipschitz):
            return float(self.lipschitz.alpha(t))
        if radius is None:
            raise ModulusUnavailable(
                f"coupling {self.kind!r} has only a local modulus; a radius is required")
        return float(self.lipschitz.alpha_R(radius, t))

    @property
    def is_global(self) -> bool:
        return isinstance(self.lipschitz, GlobalLipschitz)


class ZeroCoupling(Coupling):
    kind = "zero"
    lipschitz = GlobalLipschitz(alpha=lambda t: 0.0)

    def eval(self, t, u):
        return np.zeros_like(np.asarray(u, float))

    def zero_bound(self, t):
        return 0.0


class LinearCoupling(Coupling):
    """B(t, u) = K u for a constant matrix K; alpha = ||K||_2."""

    kind = "linear"

    def __init__(self, matrix):
        K = np.asarray(matrix, float)
        if K.ndim == 0:
            K = K.reshape(1, 1)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValueError("matrix must be square")
        self.matrix = K
        self.operator_norm = float(np.linalg.norm(K, 2))
        self.lipschitz = GlobalLipschitz(alpha=lambda t, a=self.operator_norm: a)

    def eval(self, t, u):
        return self.matrix @ np.asarray(u, float)

    def zero_bound(self, t):
        return 0.0


class CubicCoupling(Coupling):
    """B(t, u) = sign * coeff * u^3 componentwise; locally Lipschitz with
    exact ball modulus 3 coeff R^2 (componentwise cubic, sup over the ball)."""

    kind = "cubic"

    def __init__(self, sign=-1.0, coeff=1.0):
        if coeff <= 0:
            raise ValueError("coeff must be positive")
        self.sign = float(np.sign(sign)) or 1.0
        self.coeff = float(coeff)
        self.lipschitz = LocalLipschitz(
            alpha_R=lambda R, t, c=self.coeff: 3.0 * c * R * R)

    def eval(self, t, u):
        u = np.asarray(u, float)
        return self.sign * self.coeff * u ** 3

    def zero_bound(self, t):
        return 0.0


class NemytskiiCoupling(Coupling):
    """Coordinatewise B(t, u)_i = b(t, site_i, u_i) with global modulus C_b."""

    kind = "nemytskii"

    def __init__(self, b, c_b, sites):
        self.b = b
        self.c_b = float(c_b)
        self.sites = np.asarray(sites, float)
        self.lipschitz = GlobalLipschitz(alpha=lambda t, c=self.c_b: c)

    def eval(self, t, u):
        u = np.asarray(u, float)
        return np.array([self.b(t, x, ui) for x, ui in zip(self.sites, u)])

    def zero_bound(self, t):
        return float(np.linalg.norm([self.b(t, x, 0.0) for x in self.sites]))


class CustomCoupling(Coupling):
    kind = "custom"

    def __init__(self, eval_fn, lipschitz, zero_bound_fn=lambda t: 0.0):
        self._eval_fn = eval_fn
        self.lipschitz = lipschitz
        self._zero_bound_fn = zero_bound_fn

    def eval(self, t, u):
        return np.asarray(self._eval_fn(t, np.asarray(u, float)), float)

    def zero_bound(self, t):
        return float(self._zero_bound_fn(t))


def lipschitz_budget(coupling: Coupling, grid, radius=None) -> float:
    """Discrete L^1(0, T) norm of the applicable modulus, by composite
    trapezoid on the grid nodes.  This is the L-tilde / 2 of the fixed-point
    engine."""
    nodes = grid.nodes
    vals = np.array([coupling.modulus_at(t, radius) for t in nodes])
    return float(_trapz(vals, nodes))


def make_coupling(kind, **params):
    if kind == "zero":
        return ZeroCoupling()
    if kind == "linear":
        return LinearCoupling(params["matrix"])
    if kind == "cubic":
        return CubicCoupling(sign=params.get("sign", -1.0),
                             coeff=params.get("coeff", 1.0))
    if kind == "nemytskii":
        return NemytskiiCoupling(params["b"], params["c_b"], params["sites"])
    raise ValueError(f"unknown coupling kind {kind!r}")
