"""Error norms, tau-sweeps and empirical order fitting."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import oracles, scheme, torus
from .initial import InitialCondition
from .midpoint import (FixedPointConfig, VelocitySampler, euler_backward, euler_forward,
                       jacobian, solve_midpoint, wrap_distance)
from .torus import GridSpec

LAWS = ("global", "local_freeze", "local_midpoint", "stationarity")
TARGET_ORDER = {"global": 1, "local_freeze": 2, "local_midpoint": 3, "stationarity": 2}


def default_slope_tol(order: float) -> float:
    return 0.4 if order >= 3 else 0.2


def error_norm(a: np.ndarray, b: np.ndarray, sigma: float) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"grid mismatch: {a.shape} vs {b.shape}")
    GridSpec.of(a)
    return torus.sobolev_norm(a - b, sigma)


def fit_order(pairs: Sequence[tuple[float, float]]) -> tuple[float, float, float]:
    """Least-squares fit of log(error) = slope * log(tau) + intercept.

    Returns ``(slope, intercept, residual)`` where ``residual`` is the RMS of the
    log-space misfit.
    """
    if len(pairs) < 3:
        raise ValueError("need at least 3 (tau, error) pairs")
    taus = np.array([p[0] for p in pairs], dtype=float)
    errs = np.array([p[1] for p in pairs], dtype=float)
    if np.any(taus <= 0) or np.any(errs <= 0) or not np.all(np.isfinite(errs)):
        raise ValueError("tau and error values must be positive and finite")
    x, y = np.log(taus), np.log(errs)
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    residual = float(np.sqrt(np.mean((A @ [slope, intercept] - y) ** 2)))
    return float(slope), float(intercept), residual


def richardson_ratios(errors: Sequence[float]) -> list[float]:
    return [float(errors[i] / errors[i + 1]) for i in range(len(errors) - 1)]


@dataclass
class OrderReport:
    law: str
    sigma: float
    pairs: list[tuple[float, float]]
    target_order: float
    slope_tol: float
    floor: float
    slope: float | None = None
    intercept: float | None = None
    residual: float | None = None
    passed: bool = False
    flags: list[str] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def build(cls, law: str, sigma: float, pairs, target_order: float,
              slope_tol: float | None = None, floor: float = 1e-10,
              diagnostics: dict | None = None) -> "OrderReport":
        pairs = [(float(t), float(e)) for t, e in pairs]
        slope_tol = default_slope_tol(target_order) if slope_tol is None else slope_tol
        rep = cls(law, float(sigma), pairs, target_order, slope_tol, floor,
                  diagnostics=dict(diagnostics or {}))
        errors = [e for _, e in pairs]
        if any(errors[i + 1] >= errors[i] for i in range(len(errors) - 1)):
            rep.flags.append("non-monotone")
        usable = [(t, e) for t, e in pairs if e >= floor]
        if len(usable) < len(pairs):
            rep.flags.append(f"degenerate: below floor {floor:g}")
        if len(usable) >= 3:
            rep.slope, rep.intercept, rep.residual = fit_order(usable)
            rep.passed = abs(rep.slope - target_order) <= slope_tol
        if all(e > 0 for e in errors):
            rep.diagnostics.setdefault("ratios", richardson_ratios(errors))
        return rep

    def to_dict(self) -> dict:
        return {
            "law": self.law,
            "sigma": self.sigma,
            "pairs": [[t, e] for t, e in self.pairs],
            "slope": self.slope,
            "target_order": self.target_order,
            "pass": self.passed,
            "flags": list(self.flags),
            "slope_tol": self.slope_tol,
            "intercept": self.intercept,
            "residual": self.residual,
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tau", "error"])
        for t, e in self.pairs:
            w.writerow([repr(t), repr(e)])
        return buf.getvalue()


@dataclass(frozen=True)
class ExperimentSpec:
    law: str
    initial: InitialCondition = InitialCondition()
    sigma: float = 2.0
    tau_list: tuple[float, ...] = (0.1, 0.05, 0.025, 0.0125)
    t_final: float = 0.5
    n: int = 64
    fixed_point: FixedPointConfig = FixedPointConfig()
    dt_ref: float | None = None
    slope_tol: float | None = None
    floor: float | None = None
    workers: int = 1

    def __post_init__(self):
        if self.law not in LAWS:
            raise ValueError(f"unknown law {self.law!r}")
        taus = list(self.tau_list)
        if len(taus) < 3:
            raise ValueError("tau_list needs at least 3 entries")
        if any(not 0 < t < 1 for t in taus):
            raise ValueError("every tau must lie in (0, 1)")
        for a, b in zip(taus, taus[1:]):
            if not math.isclose(b, a / 2, rel_tol=1e-9):
                raise ValueError("tau_list must halve at every entry")
        if self.law in ("global", "stationarity"):
            for t in taus:
                ratio = self.t_final / t
                if abs(ratio - round(ratio)) > 1e-9 * ratio:
                    raise ValueError(f"t_final={self.t_final} is not a multiple of tau={t}")
        GridSpec(self.n)
        if self.dt_ref is not None and self.dt_ref > min(taus) / 10:
            raise ValueError("dt_ref must be <= min(tau)/10")

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.n)

    @property
    def target_order(self) -> int:
        return TARGET_ORDER[self.law]

    @property
    def reference(self) -> oracles.ReferenceConfig:
        if self.dt_ref is None:
            return oracles.ReferenceConfig.for_taus(self.tau_list)
        return oracles.ReferenceConfig(self.dt_ref)

    @property
    def error_floor(self) -> float:
        return 100 * self.fixed_point.fp_tol if self.floor is None else self.floor

    def omega0(self) -> np.ndarray:
        return self.initial.generate(self.grid)

    def scheme_config(self, tau: float) -> scheme.SchemeConfig:
        return scheme.SchemeConfig(tau=tau, t_final=self.t_final, grid=self.grid,
                                   fixed_point=self.fixed_point,
                                   norm_indices=tuple(sorted({0.0, 1.0, 2.0, float(self.sigma)})))


def _map(fn: Callable, items, workers: int) -> list:
    # results keep input order regardless of completion order
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _report(spec: ExperimentSpec, errors, diagnostics=None) -> OrderReport:
    return OrderReport.build(spec.law, spec.sigma, list(zip(spec.tau_list, errors)),
                             spec.target_order, spec.slope_tol, spec.error_floor, diagnostics)


def global_error_sweep(spec: ExperimentSpec, omega0: np.ndarray | None = None,
                       keep_runs: bool = False):
    """Scheme at each tau vs the reference Euler solution at ``t_final``.

    With ``keep_runs`` the per-tau ``RunResult`` objects are returned as well.
    """
    omega0 = spec.omega0() if omega0 is None else omega0
    exact = oracles.exact_flow(omega0, spec.t_final, spec.reference)

    def one(tau):
        return scheme.run(omega0, spec.scheme_config(tau))

    runs = _map(one, spec.tau_list, spec.workers)
    errors = [error_norm(r.final.omega, exact, spec.sigma) for r in runs]
    diag = {"max_h2_ratio": [stability_monitor_report(r.trajectory)["ratios"][2.0] for r in runs]}
    rep = _report(spec, errors, diag)
    return (rep, runs) if keep_runs else rep


def stationarity_sweep(spec: ExperimentSpec, omega0: np.ndarray | None = None) -> OrderReport:
    """Drift ``|omega_N - omega0|`` over ``t_final`` for data that the Euler flow keeps fixed."""
    omega0 = spec.omega0() if omega0 is None else omega0

    def one(tau):
        return error_norm(scheme.run(omega0, spec.scheme_config(tau)).final.omega, omega0, spec.sigma)

    errors = _map(one, spec.tau_list, spec.workers)
    per_step = [error_norm(scheme.single_step(omega0, t, spec.grid, spec.fixed_point), omega0, spec.sigma)
                for t in spec.tau_list]
    diag = {"per_step_drift": per_step}
    if all(e > 0 for e in per_step):
        diag["per_step_ratios"] = richardson_ratios(per_step)
    return _report(spec, errors, diag)


def local_freeze_sweep(spec: ExperimentSpec, omega0: np.ndarray | None = None,
                       scaling_probe: bool = True) -> OrderReport:
    """Reference Euler flow vs frozen-velocity flow after a single time ``t``."""
    omega0 = spec.omega0() if omega0 is None else omega0
    ref = spec.reference
    taus = list(spec.tau_list)
    exact = oracles.exact_flow(omega0, None, ref, times=taus)
    frozen = oracles.frozen_flow(omega0, None, ref, times=taus)
    errors = [error_norm(a, b, spec.sigma) for a, b in zip(exact, frozen)]
    diag = {}
    if scaling_probe:
        t = taus[-1]
        doubled = 2.0 * omega0
        e2 = error_norm(oracles.exact_flow(doubled, t, ref), oracles.frozen_flow(doubled, t, ref), spec.sigma)
        diag["norm_doubling_ratio"] = e2 / errors[-1] if errors[-1] > 0 else None
    return _report(spec, errors, diag)


def local_midpoint_sweep(spec: ExperimentSpec, omega0: np.ndarray | None = None) -> OrderReport:
    """Frozen-velocity flow vs one midpoint step of size ``t``."""
    omega0 = spec.omega0() if omega0 is None else omega0
    taus = list(spec.tau_list)
    frozen = oracles.frozen_flow(omega0, None, spec.reference, times=taus)
    steps = _map(lambda t: scheme.single_step(omega0, t, spec.grid, spec.fixed_point), taus, spec.workers)
    errors = [error_norm(a, b, spec.sigma) for a, b in zip(frozen, steps)]
    return _report(spec, errors)


SWEEPS = {
    "global": global_error_sweep,
    "local_freeze": local_freeze_sweep,
    "local_midpoint": local_midpoint_sweep,
    "stationarity": stationarity_sweep,
}


def run_sweep(spec: ExperimentSpec) -> OrderReport:
    return SWEEPS[spec.law](spec)


def stability_monitor_report(trajectory: Sequence[dict], bound: float = 2.0,
                             sigmas: Sequence[float] | None = None) -> dict:
    """Max over steps of ``|omega_n|_{H^s} / |omega_0|_{H^s}`` for each monitored ``s``."""
    first = trajectory[0]["norms"]
    sigmas = sorted(first) if sigmas is None else sigmas
    ratios = {}
    for s in sigmas:
        base = first[s]
        if base == 0:
            ratios[s] = 1.0 if all(row["norms"][s] == 0 for row in trajectory) else math.inf
            continue
        ratios[s] = max(row["norms"][s] / base for row in trajectory)
    return {"ratios": ratios, "bound": bound, "pass": all(r <= bound for r in ratios.values())}


@dataclass
class InvariantCheck:
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tol)


def structural_invariants(omega0: np.ndarray, tau: float,
                          fixed_point: FixedPointConfig = FixedPointConfig(),
                          n_points: int = 100, seed: int = 0) -> list[InvariantCheck]:
    """Symplecticity, inverse, factorization, mean drift and shear fixed point.

    Geometric checks use ``n_points`` uniform random points drawn from ``seed``.
    """
    grid = GridSpec.of(omega0)
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, torus.TWO_PI, size=(n_points, 2))
    sampler = VelocitySampler.from_vorticity(omega0)
    tol = 10 * fixed_point.fp_tol

    G = jacobian(sampler, tau, x, fixed_point)
    det_defect = float(np.max(np.abs(np.linalg.det(G) - 1.0)))
    GtJG = np.swapaxes(G, -1, -2) @ torus.J @ G
    sympl_defect = float(np.max(np.linalg.norm(GtJG - torus.J, ord=2, axis=(-2, -1))))

    y, _, _ = solve_midpoint(sampler, tau, x, fixed_point)
    back, _, _ = solve_midpoint(sampler, -tau, y, fixed_point)
    inverse_defect = float(np.max(wrap_distance(back, x)))
    split = euler_forward(sampler, tau, euler_backward(sampler, tau, x, fixed_point))
    split_defect = float(np.max(wrap_distance(split, y)))

    stepped = scheme.single_step(omega0, tau, grid, fixed_point, recenter=False)
    l2 = torus.sobolev_norm(omega0, 0)
    drift = abs(torus.grid_mean(stepped))
    drift_rel = drift / l2 if l2 > 0 else drift

    shear = np.cos(grid.nodes[..., 0])
    shear_defect = float(np.max(np.abs(scheme.single_step(shear, tau, grid, fixed_point) - shear)))

    return [
        InvariantCheck("symplectic_det", det_defect, 1e-10),
        InvariantCheck("symplectic_form", sympl_defect, 1e-9),
        InvariantCheck("inverse", inverse_defect, tol),
        InvariantCheck("factorization", split_defect, tol),
        InvariantCheck("mean_drift", drift_rel, 1e-8),
        InvariantCheck("shear_fixed_point", shear_defect, 1e-9),
    ]
