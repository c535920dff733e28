"""Implicit midpoint map for a frozen stream function.

For a stream function ``psi`` the map ``Phi_t`` solves

    y = x + t * J grad psi((x + y) / 2)

pointwise. It is solved by Picard iteration seeded with an explicit Euler step;
convergence is certified beforehand by a contraction margin computed from the
Hessian of ``psi`` on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import torus
from .errors import NoConvergence, NonContractive
from .torus import GridSpec, TrigInterpolant

_GRAD = ((1, 0), (0, 1))
_HESS = ((2, 0), (1, 1), (0, 2))


@dataclass(frozen=True)
class FixedPointConfig:
    fp_tol: float = 1e-12
    max_iter: int = 50

    def __post_init__(self):
        if not self.fp_tol > 0:
            raise ValueError("fp_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


class VelocitySampler:
    """Evaluates ``J grad psi`` and ``Hess psi`` anywhere on the torus."""

    def __init__(self, psi_hat: np.ndarray):
        self.psi_hat = np.asarray(psi_hat, dtype=complex)
        self.spec = GridSpec.of(self.psi_hat)
        self.interp = TrigInterpolant(self.psi_hat)
        self._margin_sup = None

    @classmethod
    def from_stream(cls, psi: np.ndarray) -> "VelocitySampler":
        return cls(torus.forward_transform(psi))

    @classmethod
    def from_vorticity(cls, omega: np.ndarray, mean_tol: float = torus.MEAN_TOL) -> "VelocitySampler":
        return cls.from_stream(torus.poisson_inverse(omega, mean_tol))

    def velocity(self, points: np.ndarray) -> np.ndarray:
        """``(d2 psi, -d1 psi)`` at ``points`` of shape ``(..., 2)``."""
        d1, d2 = self.interp.evaluate_many(points, _GRAD)
        return np.stack([d2, -d1], axis=-1)

    def hessian(self, points: np.ndarray) -> np.ndarray:
        """Hessian of psi, shape ``(..., 2, 2)``."""
        h11, h12, h22 = self.interp.evaluate_many(points, _HESS)
        return np.stack([np.stack([h11, h12], -1), np.stack([h12, h22], -1)], -2)

    def velocity_on_grid(self) -> np.ndarray:
        """Grid velocity from spectral derivatives, shape ``(2, n, n)``."""
        P = self.psi_hat
        return np.stack([torus.real_part(torus.derivative_spectrum(P, (0, 1))),
                         -torus.real_part(torus.derivative_spectrum(P, (1, 0)))])

    def hessian_sup(self) -> float:
        """Max over grid nodes of the Frobenius norm of Hess psi."""
        if self._margin_sup is None:
            P = self.psi_hat
            h11, h12, h22 = (torus.real_part(P * _full_multiplier(self.spec, o))
                             for o in _HESS)
            self._margin_sup = float(np.max(np.sqrt(h11**2 + 2 * h12**2 + h22**2)))
        return self._margin_sup


def _full_multiplier(spec: GridSpec, order) -> np.ndarray:
    # even-order derivatives keep the Nyquist mode
    k1, k2 = spec.k_grid
    return (1j * k1) ** order[0] * (1j * k2) ** order[1]


def contraction_margin(sampler: VelocitySampler, t: float) -> float:
    return 1.0 - 0.5 * abs(t) * sampler.hessian_sup()


def _require_margin(sampler, t):
    margin = contraction_margin(sampler, t)
    if margin <= 0:
        raise NonContractive(t, margin)
    return margin


def _picard(update, seed, cfg: FixedPointConfig):
    """Iterate ``y <- update(y)`` pointwise until ``|update(y) - y| <= fp_tol``.

    Returns the accepted iterates, their residuals and the number of map
    evaluations used per point (including the seed evaluation).
    """
    y = np.array(seed, dtype=float)
    m = y.shape[0]
    residual = np.full(m, np.inf)
    iters = np.zeros(m, dtype=int)
    active = np.arange(m)
    for it in range(1, cfg.max_iter + 1):
        ya = y[active]
        fy = update(ya, active)
        r = np.max(np.abs(fy - ya), axis=-1)
        done = r <= cfg.fp_tol
        residual[active] = r
        iters[active] = it
        # converged points keep the iterate whose residual was measured
        y[active[~done]] = fy[~done]
        active = active[~done]
        if active.size == 0:
            break
    return y, residual, iters


def _batched(x):
    x = np.asarray(x, dtype=float)
    return x.reshape(-1, 2), x.shape


def solve_midpoint(sampler: VelocitySampler, t: float, x, cfg: FixedPointConfig = FixedPointConfig()):
    """Solve the implicit midpoint equation at one or many points.

    ``x`` has shape ``(..., 2)``. Returns ``(y, residual, iters)`` with ``y`` of
    the same shape as ``x``; ``y`` is not wrapped back onto ``[0, 2pi)``.
    """
    _require_margin(sampler, t)
    xb, shape = _batched(x)
    if t == 0:
        return xb.reshape(shape).copy(), np.zeros(shape[:-1]), np.ones(shape[:-1], dtype=int)
    seed = xb + t * sampler.velocity(xb)

    def update(y, idx):
        return xb[idx] + t * sampler.velocity(0.5 * (xb[idx] + y))

    y, res, iters = _picard(update, seed, cfg)
    _check_converged(res, iters, cfg, xb)
    return y.reshape(shape), res.reshape(shape[:-1]), iters.reshape(shape[:-1])


def _check_converged(res, iters, cfg, xb):
    bad = ~(res <= cfg.fp_tol)
    if np.any(bad):
        worst = int(np.argmax(np.where(bad, res, -np.inf)))
        raise NoConvergence(float(res[worst]), cfg.max_iter, tuple(xb[worst]))


@dataclass
class FlowMap:
    """Image of every grid node under ``Phi_t``, stored as displacements."""

    spec: GridSpec
    t: float
    disp: np.ndarray          # (n, n, 2)
    residuals: np.ndarray     # (n, n)
    iterations: np.ndarray = field(repr=False, default=None)

    @property
    def points(self) -> np.ndarray:
        return self.spec.nodes + self.disp

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals))

    @property
    def max_iterations(self) -> int:
        return int(np.max(self.iterations)) if self.iterations is not None else 0


def flow_map(sampler: VelocitySampler, t: float, spec: GridSpec | None = None,
             cfg: FixedPointConfig = FixedPointConfig()) -> FlowMap:
    spec = spec or sampler.spec
    nodes = spec.nodes
    y, res, iters = solve_midpoint(sampler, t, nodes, cfg)
    return FlowMap(spec, t, y - nodes, res, iters)


def jacobian(sampler: VelocitySampler, t: float, x, cfg: FixedPointConfig = FixedPointConfig()) -> np.ndarray:
    """``D_x Phi_t`` from ``A_t(JY) D = A_{-t}(JY)`` with ``Y`` the midpoint Hessian."""
    y, _, _ = solve_midpoint(sampler, t, x, cfg)
    mid = 0.5 * (np.asarray(x, dtype=float) + y)
    JY = torus.J @ sampler.hessian(mid)
    eye = np.eye(2)
    lhs = eye - 0.5 * t * JY
    rhs = eye + 0.5 * t * JY
    return np.linalg.solve(lhs, rhs)


def euler_forward(sampler: VelocitySampler, t: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x + 0.5 * t * sampler.velocity(x)


def euler_backward(sampler: VelocitySampler, t: float, x, cfg: FixedPointConfig = FixedPointConfig()) -> np.ndarray:
    """Solve ``y = x + (t/2) J grad psi(y)``, the inverse of ``euler_forward(-t)``."""
    _require_margin(sampler, t)
    xb, shape = _batched(x)
    if t == 0:
        return xb.reshape(shape).copy()
    seed = xb + 0.5 * t * sampler.velocity(xb)

    def update(y, idx):
        return xb[idx] + 0.5 * t * sampler.velocity(y)

    y, res, iters = _picard(update, seed, cfg)
    _check_converged(res, iters, cfg, xb)
    return y.reshape(shape)


def backflow_velocity_defect(sampler: VelocitySampler, t: float, x,
                             cfg: FixedPointConfig = FixedPointConfig()) -> np.ndarray:
    """``|V(t, x) + J grad psi(x)|`` where ``V = d/dt Phi_{-t}`` evaluated at ``Phi_t(x)``.

    The time derivative is a centred difference with step ``t / 100``.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    h = t / 100.0
    x = np.asarray(x, dtype=float)
    y, _, _ = solve_midpoint(sampler, t, x, cfg)
    ahead, _, _ = solve_midpoint(sampler, -(t + h), y, cfg)
    behind, _, _ = solve_midpoint(sampler, -(t - h), y, cfg)
    v = (ahead - behind) / (2 * h)
    return np.linalg.norm(v + sampler.velocity(x), axis=-1)


def wrap_distance(a, b) -> np.ndarray:
    """Componentwise max distance between points on the torus."""
    d = np.mod(np.asarray(a) - np.asarray(b) + np.pi, torus.TWO_PI) - np.pi
    return np.max(np.abs(d), axis=-1)
