"""Library of zero-mean, band-limited initial vorticities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .torus import GridSpec

NAMES = ("zero", "shear", "eigen_pair", "perturbed_eigen", "random_band")


@dataclass(frozen=True)
class InitialCondition:
    """Named initial vorticity.

    ``amplitude`` scales every generator. ``epsilon`` is the weight of the
    ``cos(2 x1) cos(x2)`` perturbation for ``perturbed_eigen``. ``cutoff`` and
    ``s`` control ``random_band``: modes with ``max(|k1|, |k2|) <= cutoff`` get
    Gaussian coefficients scaled by ``(1 + |k|^2)^(-(s + 1)/2)``, and the field is
    normalized to L2 norm ``amplitude``.
    """

    name: str = "perturbed_eigen"
    amplitude: float = 1.0
    epsilon: float = 0.1
    cutoff: int = 4
    s: float = 6.0
    seed: int = 7

    def __post_init__(self):
        if self.name not in NAMES:
            raise ValueError(f"unknown initial condition {self.name!r}; expected one of {NAMES}")

    def band_limit(self) -> int:
        return {"zero": 0, "shear": 1, "eigen_pair": 1, "perturbed_eigen": 2}.get(self.name, self.cutoff)

    def generate(self, grid: GridSpec) -> np.ndarray:
        return generate_initial(self, grid)


def generate_initial(ic: InitialCondition, grid: GridSpec) -> np.ndarray:
    if ic.band_limit() > grid.n // 4:
        raise ValueError(f"band limit {ic.band_limit()} exceeds n/4 = {grid.n // 4}")
    x1, x2 = grid.nodes[..., 0], grid.nodes[..., 1]
    a = ic.amplitude
    if ic.name == "zero":
        return np.zeros((grid.n, grid.n))
    if ic.name == "shear":
        return a * np.cos(x1)
    if ic.name == "eigen_pair":
        return a * (np.cos(x1) + np.cos(x2))
    if ic.name == "perturbed_eigen":
        return a * (np.cos(x1) + np.cos(x2) + ic.epsilon * np.cos(2 * x1) * np.cos(x2))
    return _random_band(ic, grid)


def _random_band(ic: InitialCondition, grid: GridSpec) -> np.ndarray:
    rng = np.random.default_rng(ic.seed)
    c = ic.cutoff
    ks = np.arange(-c, c + 1)
    k1, k2 = np.meshgrid(ks, ks, indexing="ij")
    coeff = rng.standard_normal(k1.shape) + 1j * rng.standard_normal(k1.shape)
    coeff *= (1.0 + k1**2 + k2**2) ** (-(ic.s + 1) / 2)
    coeff[c, c] = 0.0
    x1, x2 = grid.nodes[..., 0], grid.nodes[..., 1]
    phase = np.exp(1j * (k1.ravel()[:, None, None] * x1 + k2.ravel()[:, None, None] * x2))
    field = np.real(np.tensordot(coeff.ravel(), phase, axes=1))
    field -= field.mean()
    norm = np.sqrt(np.mean(field**2))
    if norm == 0:
        return field
    return ic.amplitude * field / norm
