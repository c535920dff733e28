"""Acceptance criteria on the shipped configuration (configs/acceptance.yaml).

Each test prints one ``criterion N: PASS|FAIL`` line to the terminal.
"""

from pathlib import Path

import numpy as np
import pytest

from vortexcg import analysis, oracles, scheme, torus
from vortexcg.analysis import ExperimentSpec, fit_order
from vortexcg.config import RunConfig
from vortexcg.initial import InitialCondition
from vortexcg.midpoint import FixedPointConfig
from vortexcg.torus import GridSpec

pytestmark = pytest.mark.slow

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "acceptance.yaml"


@pytest.fixture(scope="module")
def cfg():
    return RunConfig.load(CONFIG)


def spec_for(cfg, law, **kw):
    base = dict(law=law, initial=cfg.initial, sigma=cfg.sigma, tau_list=cfg.tau_list,
                t_final=cfg.t_final, n=cfg.n, fixed_point=FixedPointConfig(cfg.fp_tol, cfg.max_iter),
                dt_ref=cfg.dt_ref)
    base.update(kw)
    return ExperimentSpec(**base)


@pytest.fixture(scope="module")
def global_sweep(cfg):
    return analysis.global_error_sweep(spec_for(cfg, "global"), keep_runs=True)


@pytest.fixture(scope="module")
def freeze_report(cfg):
    return analysis.run_sweep(spec_for(cfg, "local_freeze"))


@pytest.fixture(scope="module")
def midpoint_report(cfg):
    return analysis.run_sweep(spec_for(cfg, "local_midpoint"))


@pytest.fixture(scope="module")
def omega0(cfg):
    return cfg.initial.generate(GridSpec(cfg.n))


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return emit


def slope_without_largest(rep):
    return fit_order(rep.pairs[1:])[0]


def test_criterion_1_global_first_order(global_sweep, report):
    rep, _ = global_sweep
    drop = abs(slope_without_largest(rep) - rep.slope)
    errors = [e for _, e in rep.pairs]
    ok = 0.8 <= rep.slope <= 1.2 and drop <= 0.2 and all(a > b for a, b in zip(errors, errors[1:]))
    report(1, ok, f"slope {rep.slope:.4f} in [0.8, 1.2]; drop-largest shift {drop:.4f}; "
                  f"errors {', '.join(f'{e:.3e}' for e in errors)}")
    assert ok


def test_criterion_2_freezing_second_order(freeze_report, report):
    rep = freeze_report
    drop = abs(slope_without_largest(rep) - rep.slope)
    ok = rep.slope is not None and 1.7 <= rep.slope <= 2.3 and drop <= 0.2
    probe = rep.diagnostics.get("norm_doubling_ratio")
    report(2, ok, f"slope {rep.slope:.4f} in [1.7, 2.3]; drop-largest shift {drop:.4f}; "
                  f"norm-doubling ratio {probe:.2f} (diagnostic)")
    assert ok


def test_criterion_3_midpoint_third_order(midpoint_report, report):
    rep = midpoint_report
    ratios = rep.diagnostics["ratios"]
    drop = abs(slope_without_largest(rep) - rep.slope)
    ok = 2.6 <= rep.slope <= 3.4 and all(6 <= r <= 10 for r in ratios) and drop <= 0.2
    report(3, ok, f"slope {rep.slope:.4f} in [2.6, 3.4]; ratios {', '.join(f'{r:.3f}' for r in ratios)}")
    assert ok


@pytest.fixture(scope="module")
def invariants(cfg, omega0):
    fp = FixedPointConfig(cfg.fp_tol, cfg.max_iter)
    return {tau: {c.name: c for c in analysis.structural_invariants(omega0, tau, fp, seed=cfg.initial.seed)}
            for tau in cfg.tau_list}


def test_criterion_4_symplecticity(invariants, report):
    det = max(c["symplectic_det"].value for c in invariants.values())
    form = max(c["symplectic_form"].value for c in invariants.values())
    ok = det <= 1e-10 and form <= 1e-9
    report(4, ok, f"max |det - 1| {det:.2e} <= 1e-10; max |G^T J G - J| {form:.2e} <= 1e-9")
    assert ok


def test_criterion_5_inverse_and_factorization(invariants, report):
    inv = max(c["inverse"].value for c in invariants.values())
    fac = max(c["factorization"].value for c in invariants.values())
    ok = inv <= 1e-11 and fac <= 1e-11
    report(5, ok, f"inverse defect {inv:.2e}, factorization defect {fac:.2e} (tol 1e-11)")
    assert ok


def test_criterion_6_mean_preservation(global_sweep, report):
    _, runs = global_sweep
    worst = 0.0
    for run in runs:
        rows = run.trajectory
        for prev, row in zip(rows, rows[1:]):
            worst = max(worst, abs(row["mean_drift"]) / prev["l2"])
    ok = worst <= 1e-8
    report(6, ok, f"max per-step drift / L2 {worst:.2e} <= 1e-8 over {sum(len(r.trajectory) - 1 for r in runs)} steps")
    assert ok


def test_criterion_7_stationary_fidelity(cfg, report):
    grid = GridSpec(cfg.n)
    fp = FixedPointConfig(cfg.fp_tol, cfg.max_iter)
    shear = InitialCondition("shear").generate(grid)
    shear_defect = max(float(np.max(np.abs(scheme.single_step(shear, tau, grid, fp) - shear)))
                       for tau in cfg.tau_list)
    eigen = InitialCondition("eigen_pair").generate(grid)
    ref = oracles.ReferenceConfig.for_taus(cfg.tau_list)
    exact_defect = torus.sobolev_norm(oracles.exact_flow(eigen, cfg.t_final, ref) - eigen, 0)
    rep = analysis.stationarity_sweep(spec_for(cfg, "stationarity", initial=InitialCondition("eigen_pair"),
                                               sigma=0.0))
    horizon_ratios = rep.diagnostics["ratios"]
    per_step = rep.diagnostics["per_step_drift"]
    K = max(d / t**2 for d, t in zip(per_step, cfg.tau_list))
    step_ratios = rep.diagnostics["per_step_ratios"]
    ok = (shear_defect <= 1e-9 and exact_defect <= 1e-10
          and all(3 <= r <= 5 for r in horizon_ratios)
          and all(r >= 3 for r in step_ratios))
    report(7, ok, f"shear step defect {shear_defect:.2e} <= 1e-9; eigen_pair exact-flow drift "
                  f"{exact_defect:.2e} <= 1e-10; scheme drift ratios over T={cfg.t_final} "
                  f"{', '.join(f'{r:.3f}' for r in horizon_ratios)} in [3, 5]; "
                  f"per-step drift <= K tau^2 with K={K:.3e} (per-step ratios "
                  f"{', '.join(f'{r:.2f}' for r in step_ratios)})")
    assert ok


def test_criterion_8_spectral_core(cfg, omega0, report):
    grid = GridSpec(cfg.n)
    x1, x2 = grid.nodes[..., 0], grid.nodes[..., 1]
    poisson = 0.0
    for a, b in [(1, 0), (0, 1), (1, 1), (2, 3), (-5, 7), (16, 16)]:
        for phase in (np.cos, np.sin):
            f = phase(a * x1 + b * x2)
            u = torus.poisson_inverse(f)
            poisson = max(poisson, float(np.max(np.abs(u + f / (a * a + b * b)))))
    rng = np.random.default_rng(cfg.initial.seed)
    trip = 0.0
    for f in (omega0, rng.standard_normal(omega0.shape)):
        trip = max(trip, float(np.max(np.abs(torus.inverse_transform(torus.forward_transform(f)) - f))))
    band = InitialCondition("random_band", cutoff=cfg.n // 4, seed=cfg.initial.seed).generate(grid)
    div = max(float(np.max(np.abs(torus.divergence(torus.velocity(w))))) for w in (omega0, band))
    ok = poisson <= 1e-12 and trip <= 1e-12 and div <= 1e-12
    report(8, ok, f"Poisson eigen-solve error {poisson:.2e}; round trip {trip:.2e}; "
                  f"divergence {div:.2e} (tol 1e-12)")
    assert ok


def test_criterion_9_stability_monitor(global_sweep, report):
    _, runs = global_sweep
    ratios = [analysis.stability_monitor_report(r.trajectory)["ratios"][2.0] for r in runs]
    ok = max(ratios) <= 2.0
    report(9, ok, f"max H2 growth per run {', '.join(f'{r:.4f}' for r in ratios)} <= 2")
    assert ok


def test_criterion_10_oracle_self_consistency(cfg, omega0, report):
    ref = oracles.ReferenceConfig.for_taus(cfg.tau_list) if cfg.dt_ref is None else oracles.ReferenceConfig(cfg.dt_ref)
    a = oracles.exact_flow(omega0, cfg.t_final, ref)
    b = oracles.exact_flow(omega0, cfg.t_final, oracles.ReferenceConfig(ref.dt_ref / 2))
    diff = torus.sobolev_norm(a - b, 0)
    ok = diff <= 1e-9
    report(10, ok, f"|exact(dt) - exact(dt/2)|_L2 = {diff:.2e} <= 1e-9 at dt={ref.dt_ref:g}")
    assert ok
