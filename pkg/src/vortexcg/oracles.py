"""Reference solutions used as ground truth by the error sweeps.

``exact_flow`` integrates the Euler vorticity equation
``d_t w = U(w) . grad w`` by pseudo-spectral method of lines, classical RK4 and
2/3-rule dealiasing of the advection product. ``frozen_flow`` integrates the
characteristics of the velocity induced by the *initial* vorticity and composes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import torus
from .errors import BlowUp
from .midpoint import VelocitySampler
from .torus import GridSpec, TrigInterpolant


@dataclass(frozen=True)
class ReferenceConfig:
    dt_ref: float
    dealias: bool = True
    blowup_factor: float = 2.0

    def __post_init__(self):
        if not self.dt_ref > 0:
            raise ValueError("dt_ref must be positive")

    @classmethod
    def for_taus(cls, taus, **kw) -> "ReferenceConfig":
        return cls(dt_ref=min(taus) / 100.0, **kw)

    def check_against(self, tau: float) -> None:
        if self.dt_ref > tau / 10 * (1 + 1e-12):
            raise ValueError(f"dt_ref={self.dt_ref:g} too coarse to judge tau={tau:g}")


def _substeps(t: float, dt: float) -> tuple[int, float]:
    if t == 0:
        return 0, 0.0
    m = max(1, math.ceil(abs(t) / dt - 1e-9))
    return m, t / m


class _EulerRHS:
    def __init__(self, spec: GridSpec, dealias: bool):
        k1, k2 = spec.nyquist_free
        self.ik1, self.ik2 = 1j * k1, 1j * k2
        ksq = spec.k_squared.copy()
        ksq[0, 0] = 1.0
        self.inv_lap = -1.0 / ksq
        self.inv_lap[0, 0] = 0.0
        if dealias:
            kk1, kk2 = spec.k_grid
            self.mask = (np.maximum(np.abs(kk1), np.abs(kk2)) <= spec.n / 3).astype(float)
        else:
            self.mask = None

    def __call__(self, W: np.ndarray) -> np.ndarray:
        # W holds unnormalized fft2 coefficients; only linear maps act on it
        P = self.inv_lap * W
        ifft = np.fft.ifft2
        u1 = ifft(self.ik2 * P).real
        u2 = ifft(-self.ik1 * P).real
        w1 = ifft(self.ik1 * W).real
        w2 = ifft(self.ik2 * W).real
        N = np.fft.fft2(u1 * w1 + u2 * w2)
        if self.mask is not None:
            N *= self.mask
        return N


def exact_flow(omega0: np.ndarray, t: float, cfg: ReferenceConfig, times=None):
    """Approximate the Euler solution at time ``t`` (or at each of ``times``).

    Raises ``BlowUp`` when the sup norm exceeds ``blowup_factor`` times its
    initial value.
    """
    omega0 = np.asarray(omega0, dtype=float)
    spec = GridSpec.of(omega0)
    rhs = _EulerRHS(spec, cfg.dealias)
    W = np.fft.fft2(omega0)
    sup0 = float(np.max(np.abs(omega0)))
    targets = [t] if times is None else sorted(times)
    out = []
    now = 0.0
    for target in targets:
        m, dt = _substeps(target - now, cfg.dt_ref)
        for i in range(m):
            k1 = rhs(W)
            k2 = rhs(W + 0.5 * dt * k1)
            k3 = rhs(W + 0.5 * dt * k2)
            k4 = rhs(W + dt * k3)
            W = W + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if i % 16 == 15 and np.max(np.abs(np.fft.ifft2(W).real)) > cfg.blowup_factor * sup0:
                raise BlowUp(f"sup norm more than doubled by t={now + (i + 1) * dt:.4g}")
        now = target
        out.append(omega0.copy() if target == 0 else np.fft.ifft2(W).real)
    if times is None:
        return out[0]
    order = np.argsort(np.argsort(list(times)))
    return [out[i] for i in order]


def characteristics(sampler: VelocitySampler, x: np.ndarray, t: float, dt_ref: float) -> np.ndarray:
    """RK4 integration of ``dX/ds = J grad psi(X)`` from ``X(0) = x`` up to ``s = t``."""
    X = np.array(x, dtype=float)
    m, dt = _substeps(t, dt_ref)
    v = sampler.velocity
    for _ in range(m):
        k1 = v(X)
        k2 = v(X + 0.5 * dt * k1)
        k3 = v(X + 0.5 * dt * k2)
        k4 = v(X + dt * k3)
        X = X + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return X


def frozen_flow(omega0: np.ndarray, t: float, cfg: ReferenceConfig, times=None):
    """``omega0 o Psi_t`` with ``Psi`` the exact flow of the frozen velocity."""
    omega0 = np.asarray(omega0, dtype=float)
    spec = GridSpec.of(omega0)
    sampler = VelocitySampler.from_vorticity(omega0)
    interp = TrigInterpolant.from_values(omega0)
    targets = [t] if times is None else sorted(times)
    X = spec.nodes.copy()
    now = 0.0
    out = []
    for target in targets:
        X = characteristics(sampler, X, target - now, cfg.dt_ref)
        now = target
        out.append(omega0.copy() if target == 0 else interp(X))
    if times is None:
        return out[0]
    order = np.argsort(np.argsort(list(times)))
    return [out[i] for i in order]
