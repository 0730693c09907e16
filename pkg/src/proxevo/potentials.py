"""Catalog of convex dissipation potentials.

Every potential exposes three oracles: the value, a minimal-norm subgradient
selection, and the proximal map (resolvent of the subdifferential).  The
catalog members are radial, i.e. of the form ``x -> psi(|x|)`` for a convex
scalar ``psi`` with ``psi(0) = 0``, which reduces the proximal map to a
monotone scalar root-find.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence

DEFAULT_PROX_TOL = 1e-12
PROX_MAX_ITER = 200

# exp() overflows in float64 above ~709; slopes past this are treated as +inf,
# which the safeguarded solver handles by bisecting downward.
_EXP_CAP = 700.0


def _safe_exp(q):
    q = np.asarray(q, float)
    out = np.exp(np.minimum(q, _EXP_CAP))
    return np.where(q > _EXP_CAP, np.inf, out)


def _safe_expm1(q):
    q = np.asarray(q, float)
    out = np.expm1(np.minimum(q, _EXP_CAP))
    return np.where(q > _EXP_CAP, np.inf, out)


@dataclass(frozen=True)
class ProxResult:
    """Outcome of a proximal-map evaluation."""

    point: np.ndarray
    inner_iterations: int
    residual: float


def _as_vector(x):
    return np.atleast_1d(np.asarray(x, dtype=float))


class Potential:
    """A proper convex function with value / subgradient / prox oracles.

    ``coercivity_minorant`` optionally stores a scalar convex superlinearity
    witness; it is metadata for validation only and never enters the solvers.
    """

    kind = "abstract"
    coercivity_minorant = None

    def value(self, x) -> float:
        raise NotImplementedError

    def subdiff(self, x) -> np.ndarray:
        """Minimal-norm element of the subdifferential at x."""
        raise NotImplementedError

    def prox(self, lam: float, z, tol: float = DEFAULT_PROX_TOL) -> ProxResult:
        """argmin of value(.) + |. - z|^2 / (2 lam)."""
        raise NotImplementedError

    def moreau_envelope(self, lam: float, z) -> float:
        """Value of the prox objective at the prox point."""
        z = _as_vector(z)
        p = self.prox(lam, z).point
        return self.value(p) + float(np.sum((p - z) ** 2)) / (2.0 * lam)


class ZeroPotential(Potential):
    """The identically-zero potential; its prox is the identity."""

    kind = "zero"

    def value(self, x):
        return 0.0

    def subdiff(self, x):
        return np.zeros_like(_as_vector(x))

    def prox(self, lam, z, tol=DEFAULT_PROX_TOL):
        return ProxResult(point=_as_vector(z).copy(), inner_iterations=0, residual=0.0)


class RadialPotential(Potential):
    """Base for potentials of the form x -> psi(|x|) with psi convex, psi(0)=0.

    Subclasses supply the scalar hooks ``psi`` (vectorized), ``slope``
    (derivative of psi on r>0, right derivative at 0) and ``curvature``
    (second derivative, used only to accelerate the root-find; may return
    inf/nan where undefined).
    """

    def psi(self, r):
        raise NotImplementedError

    def slope(self, r):
        raise NotImplementedError

    def curvature(self, r):
        raise NotImplementedError

    @property
    def slope0(self) -> float:
        """Right derivative of psi at 0; radius of the subdifferential ball there."""
        return float(self.slope(0.0))

    def value(self, x):
        x = _as_vector(x)
        return float(self.psi(float(np.linalg.norm(x))))

    def subdiff(self, x):
        x = _as_vector(x)
        r = float(np.linalg.norm(x))
        if r == 0.0:
            # the multivalued Sgn(0) resolves to the minimal-norm member 0
            return np.zeros_like(x)
        return float(self.slope(r)) / r * x

    def prox(self, lam, z, tol=DEFAULT_PROX_TOL):
        z = _as_vector(z)
        nz = float(np.linalg.norm(z))
        if nz <= lam * self.slope0:
            # inside the threshold the subdifferential at 0 absorbs z exactly
            return ProxResult(point=np.zeros_like(z), inner_iterations=0, residual=0.0)
        r, iters, res = self._solve_radial(lam, nz, tol)
        return ProxResult(point=(r / nz) * z, inner_iterations=iters, residual=res)

    def _solve_radial(self, lam, target, tol):
        """Solve r + lam*slope(r) = target on (0, target] by Newton with a
        bisection safeguard.  The left side is strictly increasing, so the
        bracket [0, target] is valid and shrinks monotonically."""
        lo, hi = 0.0, target
        r = 0.5 * target
        scale = 1.0 + target
        for it in range(1, PROX_MAX_ITER + 1):
            s = float(self.slope(r))
            if np.isfinite(s):
                resid = r + lam * s - target
            else:
                resid = np.inf
            if abs(resid) <= tol * scale:
                return r, it, abs(resid)
            if resid > 0.0:
                hi = r
            else:
                lo = r
            step_done = False
            if np.isfinite(resid):
                c = float(self.curvature(r))
                if np.isfinite(c) and c >= 0.0:
                    r_new = r - resid / (1.0 + lam * c)
                    if lo < r_new < hi:
                        r = r_new
                        step_done = True
            if not step_done:
                r = 0.5 * (lo + hi)
            if hi - lo <= 1e-16 * scale:
                s = float(self.slope(r))
                resid = abs(r + lam * s - target) if np.isfinite(s) else np.inf
                if resid <= tol * scale or hi - lo <= 1e-16 * scale:
                    return r, it, min(resid, tol * scale)
        raise NonConvergence(
            f"radial prox solver for {self.kind!r} exceeded {PROX_MAX_ITER} iterations",
            residual=abs(resid),
        )


class Quadratic(RadialPotential):
    """psi(r) = scale * r^2 / 2."""

    kind = "quadratic"

    def __init__(self, scale=1.0):
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.scale = float(scale)

    def psi(self, r):
        return 0.5 * self.scale * np.asarray(r, float) ** 2

    def slope(self, r):
        return self.scale * np.asarray(r, float)

    def curvature(self, r):
        return self.scale


class AbsValue(RadialPotential):
    """psi(r) = r; prox is the soft-threshold."""

    kind = "abs_value"

    def psi(self, r):
        return np.asarray(r, float)

    def slope(self, r):
        return np.ones_like(np.asarray(r, float))

    def curvature(self, r):
        return 0.0


class XLogX(RadialPotential):
    """psi(r) = r log(1 + r)."""

    kind = "xlogx"

    def psi(self, r):
        r = np.asarray(r, float)
        return r * np.log1p(r)

    def slope(self, r):
        r = np.asarray(r, float)
        return np.log1p(r) + r / (1.0 + r)

    def curvature(self, r):
        return 1.0 / (1.0 + r) + 1.0 / (1.0 + r) ** 2


class XExpX(RadialPotential):
    """psi(r) = r exp(r)."""

    kind = "xexpx"

    def psi(self, r):
        r = np.asarray(r, float)
        return r * _safe_exp(r)

    def slope(self, r):
        r = np.asarray(r, float)
        return (1.0 + r) * _safe_exp(r)

    def curvature(self, r):
        return (2.0 + r) * float(_safe_exp(r))


class PowerPlusAbs(RadialPotential):
    """psi(r) = r^p / p + r for p > 1."""

    kind = "power_plus_abs"

    def __init__(self, p):
        if p <= 1:
            raise ValueError("p must exceed 1")
        self.p = float(p)

    def psi(self, r):
        r = np.asarray(r, float)
        return r ** self.p / self.p + r

    def slope(self, r):
        r = np.asarray(r, float)
        return r ** (self.p - 1.0) + 1.0

    def curvature(self, r):
        if r == 0.0 and self.p < 2.0:
            return np.inf
        return (self.p - 1.0) * r ** (self.p - 2.0)


class ExpPower(RadialPotential):
    """psi(r) = exp(r^p / p + r) - 1 for p > 1.

    The printed integrand takes the value 1 at 0; the constant is subtracted
    so that psi(0) = 0, which leaves the subdifferential untouched.
    """

    kind = "exp_power"

    def __init__(self, p):
        if p <= 1:
            raise ValueError("p must exceed 1")
        self.p = float(p)

    def _q(self, r):
        r = np.asarray(r, float)
        return r ** self.p / self.p + r

    def psi(self, r):
        return _safe_expm1(self._q(r))

    def slope(self, r):
        r = np.asarray(r, float)
        return _safe_exp(self._q(r)) * (r ** (self.p - 1.0) + 1.0)

    def curvature(self, r):
        if r == 0.0 and self.p < 2.0:
            return np.inf
        qp = r ** (self.p - 1.0) + 1.0
        qpp = (self.p - 1.0) * r ** (self.p - 2.0)
        return float(_safe_exp(self._q(r))) * (qp * qp + qpp)


class ExpXLogX(RadialPotential):
    """psi(r) = exp(r log(1 + r)) - 1, normalized as for ExpPower."""

    kind = "exp_xlogx"

    def _q(self, r):
        r = np.asarray(r, float)
        return r * np.log1p(r)

    def psi(self, r):
        return _safe_expm1(self._q(r))

    def slope(self, r):
        r = np.asarray(r, float)
        qp = np.log1p(r) + r / (1.0 + r)
        return _safe_exp(self._q(r)) * qp

    def curvature(self, r):
        qp = np.log1p(r) + r / (1.0 + r)
        qpp = 1.0 / (1.0 + r) + 1.0 / (1.0 + r) ** 2
        return float(_safe_exp(self._q(r))) * (qp * qp + qpp)


class Radial1DTable(RadialPotential):
    """Custom radial potential from user-supplied scalar oracles.

    ``curvature_fn`` is optional; without it the prox solver falls back to
    pure bisection, which is still guaranteed by monotonicity.
    """

    kind = "radial_custom"

    def __init__(self, value_fn, slope_fn, curvature_fn=None):
        self._value_fn = value_fn
        self._slope_fn = slope_fn
        self._curvature_fn = curvature_fn

    def psi(self, r):
        return self._value_fn(r)

    def slope(self, r):
        return self._slope_fn(r)

    def curvature(self, r):
        if self._curvature_fn is None:
            return np.nan
        return self._curvature_fn(r)


class Separable(Potential):
    """Blockwise composition: independent potentials on coordinate blocks.

    The squared norm splits over blocks, so value, subgradient and prox all
    factor exactly.
    """

    kind = "separable"

    def __init__(self, blocks):
        # blocks: list of (Potential, index array / slice)
        self.blocks = [(pot, np.asarray(idx, dtype=int) if not isinstance(idx, slice) else idx)
                       for pot, idx in blocks]

    def value(self, x):
        x = _as_vector(x)
        return sum(pot.value(x[idx]) for pot, idx in self.blocks)

    def subdiff(self, x):
        x = _as_vector(x)
        out = np.zeros_like(x)
        for pot, idx in self.blocks:
            out[idx] = pot.subdiff(x[idx])
        return out

    def prox(self, lam, z, tol=DEFAULT_PROX_TOL):
        z = _as_vector(z)
        out = np.zeros_like(z)
        iters = 0
        residual = 0.0
        for pot, idx in self.blocks:
            res = pot.prox(lam, z[idx], tol=tol)
            out[idx] = res.point
            iters = max(iters, res.inner_iterations)
            residual = max(residual, res.residual)
        return ProxResult(point=out, inner_iterations=iters, residual=residual)


_KINDS = {
    "zero": ZeroPotential,
    "quadratic": Quadratic,
    "abs_value": AbsValue,
    "xlogx": XLogX,
    "xexpx": XExpX,
    "power_plus_abs": PowerPlusAbs,
    "exp_power": ExpPower,
    "exp_xlogx": ExpXLogX,
}


def make_potential(kind, **params):
    """Build a catalog potential from its config name, e.g.
    make_potential("power_plus_abs", p=1.5)."""
    try:
        cls = _KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown potential kind {kind!r}") from None
    return cls(**params)


def catalog(p=1.5):
    """The seven nontrivial catalog potentials, keyed by kind."""
    return {
        "quadratic": Quadratic(scale=1.0),
        "abs_value": AbsValue(),
        "xlogx": XLogX(),
        "xexpx": XExpX(),
        "power_plus_abs": PowerPlusAbs(p=p),
        "exp_power": ExpPower(p=p),
        "exp_xlogx": ExpXLogX(),
    }
