"""Semi-discrete Crouch-Grossman stepping: freeze the velocity, then compose.

One step maps ``omega`` to ``omega o Phi_tau`` where ``Phi_tau`` is the implicit
midpoint map of the stream function of the *current* vorticity. The new grid
values are the trigonometric interpolant of ``omega`` evaluated at the mapped
nodes.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import torus
from .errors import MeanNotZero, NoConvergence, NonContractive, StepRejected
from .midpoint import FixedPointConfig, VelocitySampler, contraction_margin, flow_map
from .torus import GridSpec, TrigInterpolant

MONITOR_COLUMNS = ("step", "time", "mean_drift", "l2", "h1", "h2", "hs",
                   "fp_max_iters", "fp_max_residual")


@dataclass(frozen=True)
class SchemeConfig:
    tau: float
    t_final: float
    grid: GridSpec
    fixed_point: FixedPointConfig = FixedPointConfig()
    recenter: bool = True
    norm_indices: tuple[float, ...] = (0.0, 1.0, 2.0, 3.0)
    mean_tol: float = torus.MEAN_TOL

    def __post_init__(self):
        if not 0 < self.tau < 1:
            raise ValueError(f"tau must lie in (0, 1), got {self.tau}")
        if self.t_final < self.tau:
            raise ValueError("t_final must be >= tau")
        if not self.norm_indices:
            raise ValueError("norm_indices must not be empty")

    @property
    def n_steps(self) -> int:
        return max(1, math.ceil(self.t_final / self.tau - 1e-9))

    @property
    def hs_index(self) -> float:
        return max(self.norm_indices)


@dataclass(frozen=True)
class SchemeState:
    omega: np.ndarray
    step_index: int = 0
    tau: float = 0.0
    monitors: tuple[dict, ...] = ()

    @property
    def time(self) -> float:
        return self.step_index * self.tau


def eval_field_offgrid(F: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Trigonometric interpolant of the spectrum ``F`` at ``points`` (``(..., 2)``)."""
    if torus.hermitian_defect(F) > 1e-10:
        raise ValueError("spectrum is not Hermitian")
    return TrigInterpolant(F)(points)


def stream_function(omega: np.ndarray, mean_tol: float = torus.MEAN_TOL) -> np.ndarray:
    return torus.poisson_inverse(omega, mean_tol)


def monitor_row(omega: np.ndarray, cfg: SchemeConfig, step_index: int, drift: float = 0.0,
                fp_iters: int = 0, fp_residual: float = 0.0) -> dict:
    norms = {s: torus.sobolev_norm(omega, s) for s in sorted(set(cfg.norm_indices) | {0.0, 1.0, 2.0})}
    return {
        "step": step_index,
        "time": step_index * cfg.tau,
        "mean_drift": drift,
        "l2": norms[0.0],
        "h1": norms[1.0],
        "h2": norms[2.0],
        "hs": norms[cfg.hs_index],
        "fp_max_iters": fp_iters,
        "fp_max_residual": fp_residual,
        "norms": norms,
    }


def initial_state(omega0: np.ndarray, cfg: SchemeConfig) -> SchemeState:
    omega0 = np.asarray(omega0, dtype=float)
    if GridSpec.of(omega0) != cfg.grid:
        raise ValueError("initial field does not match the configured grid")
    mean = torus.grid_mean(omega0)
    if abs(mean) > cfg.mean_tol:
        raise MeanNotZero(mean, cfg.mean_tol)
    return SchemeState(omega0, 0, cfg.tau, (monitor_row(omega0, cfg, 0),))


def step(state: SchemeState, cfg: SchemeConfig) -> SchemeState:
    """Advance one step of size ``cfg.tau``."""
    omega = state.omega
    try:
        psi = stream_function(omega, cfg.mean_tol)
        sampler = VelocitySampler.from_stream(psi)
        if contraction_margin(sampler, cfg.tau) <= 0:
            raise NonContractive(cfg.tau, contraction_margin(sampler, cfg.tau))
        fm = flow_map(sampler, cfg.tau, cfg.grid, cfg.fixed_point)
    except (NonContractive, NoConvergence, MeanNotZero) as exc:
        raise StepRejected(state.step_index + 1, exc) from exc
    new = TrigInterpolant.from_values(omega)(fm.points)
    drift = torus.grid_mean(new)
    if cfg.recenter:
        new = new - drift
    index = state.step_index + 1
    row = monitor_row(new, cfg, index, drift, fm.max_iterations, fm.max_residual)
    return SchemeState(new, index, cfg.tau, state.monitors + (row,))


@dataclass
class RunResult:
    final: SchemeState
    trajectory: list[dict]
    snapshots: list[tuple[int, np.ndarray]] = field(default_factory=list)


def run(omega0: np.ndarray, cfg: SchemeConfig, snapshot_every: int = 0,
        on_step: Callable[[SchemeState], None] | None = None) -> RunResult:
    """Iterate ``step`` until ``t_n >= t_final``.

    ``StepRejected`` propagates with the failing step index.
    """
    state = initial_state(omega0, cfg)
    snapshots = [(0, state.omega)] if snapshot_every else []
    for _ in range(cfg.n_steps):
        state = step(state, cfg)
        if snapshot_every and state.step_index % snapshot_every == 0:
            snapshots.append((state.step_index, state.omega))
        if on_step is not None:
            on_step(state)
    return RunResult(state, list(state.monitors), snapshots)


def single_step(omega0: np.ndarray, t: float, grid: GridSpec | None = None,
                fixed_point: FixedPointConfig = FixedPointConfig(), recenter: bool = False) -> np.ndarray:
    """``S_t(omega0)`` for one step of size ``t``."""
    grid = grid or GridSpec.of(omega0)
    cfg = SchemeConfig(tau=t, t_final=t, grid=grid, fixed_point=fixed_point, recenter=recenter,
                       norm_indices=(0.0,))
    return step(initial_state(omega0, cfg), cfg).omega


def monitors_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MONITOR_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in MONITOR_COLUMNS])
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def with_tau(cfg: SchemeConfig, tau: float) -> SchemeConfig:
    return replace(cfg, tau=tau)
