import numpy as np
import pytest

from vortexcg import oracles, torus
from vortexcg.errors import BlowUp
from vortexcg.initial import InitialCondition
from vortexcg.oracles import ReferenceConfig, exact_flow, frozen_flow
from vortexcg.torus import GridSpec

from conftest import band_limited


def l2(a):
    return torus.sobolev_norm(a, 0)


def nodes(n):
    g = GridSpec(n).nodes
    return g[..., 0], g[..., 1]


class TestConfig:
    def test_default_from_taus(self):
        assert ReferenceConfig.for_taus([0.1, 0.05, 0.025]).dt_ref == pytest.approx(2.5e-4)

    def test_check_against(self):
        cfg = ReferenceConfig(dt_ref=0.01)
        cfg.check_against(0.1)
        with pytest.raises(ValueError):
            cfg.check_against(0.05)

    def test_positive(self):
        with pytest.raises(ValueError):
            ReferenceConfig(dt_ref=0.0)


class TestExactFlow:
    def test_eigen_pair_stationary(self):
        x1, x2 = nodes(32)
        w = np.cos(x1) + np.cos(x2)
        assert l2(exact_flow(w, 0.7, ReferenceConfig(1e-3)) - w) <= 1e-10

    def test_shear_stationary(self):
        x1, _ = nodes(16)
        w = np.cos(x1)
        assert l2(exact_flow(w, 1.0, ReferenceConfig(1e-2)) - w) <= 1e-12

    @pytest.mark.parametrize("k", [(1, 2), (3, 0), (2, 2)])
    def test_single_shell_stationary(self, k):
        x1, x2 = nodes(32)
        phase = k[0] * x1 + k[1] * x2
        w = 0.7 * np.cos(phase) - 0.4 * np.sin(phase)
        assert l2(exact_flow(w, 1.0, ReferenceConfig(5e-3)) - w) <= 1e-9

    def test_time_zero(self):
        w = band_limited(16, 3, seed=1)
        assert np.array_equal(exact_flow(w, 0.0, ReferenceConfig(1e-3)), w)

    def test_enstrophy_conserved(self):
        w = InitialCondition("random_band", cutoff=4, seed=2).generate(GridSpec(64))
        out = exact_flow(w, 1.0, ReferenceConfig(5e-3))
        assert abs(l2(out) / l2(w) - 1) <= 1e-8
        assert l2(out - w) > 1e-3          # the flow is not trivial

    def test_times_match_sequential_calls(self):
        w = band_limited(16, 3, seed=4)
        cfg = ReferenceConfig(1e-2)
        many = exact_flow(w, None, cfg, times=[0.2, 0.1])
        assert np.allclose(many[0], exact_flow(w, 0.2, cfg), atol=1e-13)
        assert np.allclose(many[1], exact_flow(w, 0.1, cfg), atol=1e-13)

    def test_blowup_guard(self):
        w = band_limited(16, 3, seed=4)
        with pytest.raises(BlowUp):
            exact_flow(w, 1.0, ReferenceConfig(0.05, blowup_factor=0.5))

    def test_dt_halving(self):
        w = InitialCondition("perturbed_eigen").generate(GridSpec(32))
        a = exact_flow(w, 0.3, ReferenceConfig(1e-3))
        b = exact_flow(w, 0.3, ReferenceConfig(5e-4))
        assert l2(a - b) <= 1e-9

    def test_rhs_matches_advection(self):
        # d_t w = U . grad w, computed independently on the grid
        w = band_limited(32, 3, seed=8)
        U = torus.velocity(w)
        G = torus.gradient(w)
        rhs = oracles._EulerRHS(GridSpec(32), dealias=True)
        got = np.fft.ifft2(rhs(np.fft.fft2(w))).real
        assert np.max(np.abs(got - (U[0] * G[0] + U[1] * G[1]))) <= 1e-12


class TestFrozenFlow:
    def test_shear(self):
        x1, _ = nodes(16)
        w = np.cos(x1)
        assert np.max(np.abs(frozen_flow(w, 0.8, ReferenceConfig(1e-2)) - w)) <= 1e-12

    def test_time_zero(self):
        w = band_limited(16, 3, seed=1)
        assert np.array_equal(frozen_flow(w, 0.0, ReferenceConfig(1e-3)), w)

    def test_enstrophy(self):
        w = InitialCondition("random_band", cutoff=4, seed=2).generate(GridSpec(64))
        out = frozen_flow(w, 0.2, ReferenceConfig(5e-3))
        assert abs(l2(out) / l2(w) - 1) <= 1e-8

    def test_characteristic_shear_closed_form(self):
        from vortexcg.midpoint import VelocitySampler
        x1, _ = nodes(16)
        s = VelocitySampler.from_stream(-np.cos(x1))
        x = np.array([[0.3, 1.0], [2.0, 4.0]])
        X = oracles.characteristics(s, x, 0.5, 1e-2)
        assert np.allclose(X[:, 0], x[:, 0], atol=1e-15)
        assert np.allclose(X[:, 1], x[:, 1] - 0.5 * np.sin(x[:, 0]), atol=1e-12)

    def test_order_one_departure(self):
        w = InitialCondition("perturbed_eigen").generate(GridSpec(32))
        cfg = ReferenceConfig(1e-3)
        d = [l2(frozen_flow(w, t, cfg) - w) for t in (0.04, 0.02)]
        assert d[0] / d[1] == pytest.approx(2.0, rel=0.05)

    def test_freezing_error_quadratic(self):
        w = InitialCondition("perturbed_eigen").generate(GridSpec(32))
        cfg = ReferenceConfig(5e-4)
        ts = [0.1, 0.05]
        ex = exact_flow(w, None, cfg, times=ts)
        fr = frozen_flow(w, None, cfg, times=ts)
        e = [torus.sobolev_norm(a - b, 2) for a, b in zip(ex, fr)]
        assert 3.0 <= e[0] / e[1] <= 5.0
