"""Spectral calculus on the flat torus (R/2piZ)^2.

Fields are plain ``(n, n)`` float arrays with ``f[i, j] = f(2*pi*i/n, 2*pi*j/n)``,
so axis 0 is x1 and axis 1 is x2. Spectra are complex ``(n, n)`` arrays in
numpy FFT order, normalized so that the ``(0, 0)`` coefficient is the grid mean.
Wavenumbers therefore run over ``{-n/2, ..., n/2 - 1}`` on each axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import MeanNotZero

TWO_PI = 2.0 * np.pi
MEAN_TOL = 1e-10
HERMITIAN_TOL = 1e-12

J = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class GridSpec:
    """Uniform square grid with ``n`` points per direction."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 8 or self.n % 2:
            raise ValueError(f"grid size must be an even integer >= 8, got {self.n!r}")

    @classmethod
    def of(cls, field: np.ndarray) -> "GridSpec":
        field = np.asarray(field)
        if field.ndim < 2 or field.shape[-1] != field.shape[-2]:
            raise ValueError(f"expected square trailing axes, got shape {field.shape}")
        return cls(int(field.shape[-1]))

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n

    @cached_property
    def axis(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n) / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        """Node coordinates, shape ``(n, n, 2)``."""
        x1, x2 = np.meshgrid(self.axis, self.axis, indexing="ij")
        return np.stack([x1, x2], axis=-1)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Integer wavenumbers along one axis in FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).round().astype(int)

    @cached_property
    def k_grid(self) -> tuple[np.ndarray, np.ndarray]:
        k1, k2 = np.meshgrid(self.wavenumbers, self.wavenumbers, indexing="ij")
        return k1, k2

    @cached_property
    def k_squared(self) -> np.ndarray:
        k1, k2 = self.k_grid
        return (k1**2 + k2**2).astype(float)

    @cached_property
    def nyquist_free(self) -> tuple[np.ndarray, np.ndarray]:
        """Wavenumbers for odd derivatives with the -n/2 mode zeroed."""
        k = self.wavenumbers.astype(float)
        k[self.n // 2] = 0.0
        k1, k2 = np.meshgrid(k, k, indexing="ij")
        return k1, k2

    def bracket(self, sigma: float) -> np.ndarray:
        """Sobolev weights (1 + |k|^2)^sigma."""
        return (1.0 + self.k_squared) ** sigma


def grid_mean(f: np.ndarray) -> float:
    return float(np.mean(f))


def forward_transform(f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    GridSpec.of(f)
    if not np.all(np.isfinite(f)):
        raise ValueError("field contains non-finite values")
    n = f.shape[-1]
    return np.fft.fft2(f) / (n * n)


def hermitian_defect(F: np.ndarray) -> float:
    """Largest ``|F_{-k} - conj(F_k)|`` relative to ``max |F|``."""
    n = F.shape[-1]
    neg = (-np.arange(n)) % n
    mirrored = np.conj(F[np.ix_(neg, neg)])
    scale = max(float(np.max(np.abs(F))), np.finfo(float).tiny)
    return float(np.max(np.abs(F - mirrored))) / scale


def inverse_transform(F: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    F = np.asarray(F, dtype=complex)
    n = GridSpec.of(F).n
    defect = hermitian_defect(F)
    if defect > tol:
        raise ValueError(f"spectrum is not Hermitian (relative defect {defect:.2e})")
    return np.real(np.fft.ifft2(F)) * (n * n)


def real_part(F: np.ndarray) -> np.ndarray:
    """Inverse transform without the Hermitian check, for derived spectra."""
    n = F.shape[-1]
    return np.real(np.fft.ifft2(F)) * (n * n)


def derivative_spectrum(F: np.ndarray, order: tuple[int, int]) -> np.ndarray:
    """Spectral derivative d^a/dx1^a d^b/dx2^b; the Nyquist mode is dropped."""
    spec = GridSpec.of(F)
    a, b = order
    k1, k2 = spec.nyquist_free
    return F * (1j * k1) ** a * (1j * k2) ** b


def gradient(f: np.ndarray) -> np.ndarray:
    """Spectral gradient, shape ``(2, n, n)``."""
    F = forward_transform(f)
    return np.stack([real_part(derivative_spectrum(F, (1, 0))),
                     real_part(derivative_spectrum(F, (0, 1)))])


def divergence(X: np.ndarray) -> np.ndarray:
    d1 = derivative_spectrum(forward_transform(X[0]), (1, 0))
    d2 = derivative_spectrum(forward_transform(X[1]), (0, 1))
    return real_part(d1 + d2)


def laplacian(f: np.ndarray) -> np.ndarray:
    spec = GridSpec.of(f)
    return real_part(-spec.k_squared * forward_transform(f))


def poisson_spectrum(F: np.ndarray) -> np.ndarray:
    """Zero-mean solution of Lap u = f in spectral space (no mean check)."""
    spec = GridSpec.of(F)
    k2 = spec.k_squared.copy()
    k2[0, 0] = 1.0
    U = -F / k2
    U[0, 0] = 0.0
    return U


def poisson_inverse(f: np.ndarray, mean_tol: float = MEAN_TOL) -> np.ndarray:
    """Solve Lap u = f with zero-mean u; ``f`` must itself have zero mean."""
    mean = grid_mean(f)
    if abs(mean) > mean_tol:
        raise MeanNotZero(mean, mean_tol)
    return real_part(poisson_spectrum(forward_transform(f)))


def velocity_spectra(W: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Spectra of U = J grad(Lap^-1 w) = (d2 psi, -d1 psi)."""
    P = poisson_spectrum(W)
    return derivative_spectrum(P, (0, 1)), -derivative_spectrum(P, (1, 0))


def velocity(omega: np.ndarray, mean_tol: float = MEAN_TOL) -> np.ndarray:
    """Divergence-free velocity induced by the vorticity, shape ``(2, n, n)``."""
    psi = poisson_inverse(omega, mean_tol)
    P = forward_transform(psi)
    return np.stack([real_part(derivative_spectrum(P, (0, 1))),
                     -real_part(derivative_spectrum(P, (1, 0)))])


def sobolev_norm(f: np.ndarray, sigma: float) -> float:
    """Discrete H^sigma norm: sqrt(sum |f_k|^2 (1 + |k|^2)^sigma)."""
    F = forward_transform(f)
    w = GridSpec.of(F).bracket(sigma)
    return float(np.sqrt(np.sum(np.abs(F) ** 2 * w)))


def dealias_two_thirds(F: np.ndarray) -> np.ndarray:
    spec = GridSpec.of(F)
    k1, k2 = spec.k_grid
    keep = np.maximum(np.abs(k1), np.abs(k2)) <= spec.n / 3
    return np.where(keep, F, 0.0)


class TrigInterpolant:
    """Off-grid evaluation of the trigonometric interpolant of a spectrum.

    The Nyquist row and column are split evenly between -n/2 and +n/2, so real
    grid data gives a real interpolant whose derivatives vanish on the Nyquist
    mode at the nodes, which matches ``derivative_spectrum``.

    Evaluation is separable and uses Hermitian symmetry to keep only k1 >= 0,
    costing ``O(M n^2)`` for ``M`` points.
    """

    def __init__(self, F: np.ndarray):
        F = np.asarray(F, dtype=complex)
        self.spec = GridSpec.of(F)
        n = self.spec.n
        h = n // 2
        G = np.zeros((n + 1, n + 1), dtype=complex)
        G[:n, :n] = np.fft.fftshift(F)
        G[n, :] = G[0, :]
        G[[0, n], :] *= 0.5
        G[:, n] = G[:, 0]
        G[:, [0, n]] *= 0.5
        self.coeffs = G
        self.k = np.arange(-h, h + 1).astype(float)
        # fold k1 < 0 onto k1 > 0: the summand at -k is the conjugate of the one at k
        fold = np.full(h + 1, 2.0)
        fold[0] = 1.0
        self._half = G[h:, :] * fold[:, None]
        self._k1 = self.k[h:]
        self._stacks: dict[tuple, np.ndarray] = {}

    @classmethod
    def from_values(cls, f: np.ndarray) -> "TrigInterpolant":
        return cls(forward_transform(f))

    def _weighted(self, order: tuple[int, int]) -> np.ndarray:
        a, b = order
        return self._half * np.outer((1j * self._k1) ** a, (1j * self.k) ** b)

    def _powers(self, theta: np.ndarray) -> np.ndarray:
        # e^{i j theta} for j = 0..n/2 by repeated multiplication
        h = self.spec.n // 2
        base = np.exp(1j * theta)
        out = np.empty((theta.size, h + 1), dtype=complex)
        out[:, 0] = 1.0
        out[:, 1:] = base[:, None]
        np.cumprod(out[:, 1:], axis=1, out=out[:, 1:])
        return out

    def evaluate_many(self, points: np.ndarray, orders) -> np.ndarray:
        """Evaluate several derivatives at once.

        ``points`` has shape ``(..., 2)``; the result has shape
        ``(len(orders), ...)``.
        """
        points = np.asarray(points, dtype=float)
        lead = points.shape[:-1]
        p = np.mod(points.reshape(-1, 2), TWO_PI)
        key = tuple(tuple(o) for o in orders)
        stack = self._stacks.get(key)
        if stack is None:
            stack = self._stacks[key] = np.stack([self._weighted(o) for o in key])
        e1 = self._powers(p[:, 0])
        pos = self._powers(p[:, 1])
        e2 = np.concatenate([np.conj(pos[:, :0:-1]), pos], axis=1)
        vals = np.einsum("mb,dmb->dm", e2, e1 @ stack).real
        return vals.reshape((len(orders),) + lead)

    def __call__(self, points: np.ndarray, order: tuple[int, int] = (0, 0)) -> np.ndarray:
        return self.evaluate_many(points, [order])[0]
