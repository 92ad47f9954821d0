import math

import numpy as np
import pytest

from manybody_otto import supremacy
from manybody_otto.cycle import Driving, OttoCycleSpec
from manybody_otto.errors import DomainError, IntegrationError
from manybody_otto.optimize import maximize_work
from manybody_otto.supremacy import (
    Convention,
    SweepSpec,
    classical_single_efficiency,
    classical_single_work,
    intermediate_model_ratios,
    locate_critical_a,
    ratios_at_optima,
    ratios_same_resources,
    sweep,
)
from manybody_otto.thermo import MediumSpec, mu

A_GRID = np.linspace(0.1, 0.6, 5)


class TestSelfComparison:
    @pytest.mark.parametrize("driving", [Driving.SUDDEN, Driving.ADIABATIC])
    @pytest.mark.parametrize("lam", [0.0, 1.0])
    def test_at_optima(self, driving, lam):
        p = ratios_at_optima(0.3, MediumSpec(1, lam), 0.5, driving)
        assert p.valid and p.r == 1.0 and p.rho == 1.0
        assert p.x_opt_many == p.x_opt_single

    @pytest.mark.parametrize("driving", [Driving.SUDDEN, Driving.ADIABATIC])
    def test_same_resources(self, driving):
        p = ratios_same_resources(0.8, 0.3, MediumSpec(1), 0.5, driving)
        assert p.valid and p.r == 1.0 and p.rho == 1.0
        assert p.convention is Convention.SAME_RESOURCES


class TestAtOptima:
    def test_sudden_boost(self):
        p = ratios_at_optima(0.3, MediumSpec(200), 2.0)
        assert p.valid and p.r > 1 and p.rho > 1
        assert p.r == pytest.approx(1.0824, abs=1e-3) and p.rho == pytest.approx(1.1641, abs=1e-3)
        assert p.work == p.many.total_work_out and p.efficiency == p.many.efficiency
        assert p.r == pytest.approx(p.many.total_work_out / (200 * p.single.total_work_out), rel=1e-15)

    def test_power_ratio_equals_work_ratio(self):
        p = ratios_at_optima(0.3, MediumSpec(200), 2.0, isochore_times=(3.0, 5.0))
        q = ratios_at_optima(0.3, MediumSpec(200), 2.0)
        assert p.power / (200 * p.single.power) == pytest.approx(p.r, rel=1e-12)
        assert p.r == pytest.approx(q.r, rel=1e-12)

    def test_ratios_decrease_with_lambda(self):
        pts = [ratios_at_optima(0.3, MediumSpec(200, lam), 2.0) for lam in (0.0, 0.2, 0.5, 1.0)]
        rs, rhos = [p.r for p in pts], [p.rho for p in pts]
        assert rs == sorted(rs, reverse=True) and rhos == sorted(rhos, reverse=True)
        assert pts[1].rho > 1 and pts[3].rho < 1 and pts[3].r < 1

    def test_adiabatic_detrimental(self):
        for lam in (0.0, 0.5, 1.0):
            p = ratios_at_optima(0.3, MediumSpec(200, lam), 2.0, Driving.ADIABATIC)
            assert p.valid and p.rho < 1

    @pytest.mark.parametrize("n,sigma_c,a", [(10, 0.5, 0.2), (200, 2.0, 0.3), (1000, 10.0, 0.5)])
    def test_adiabatic_lambda_independent(self, n, sigma_c, a):
        base = ratios_at_optima(a, MediumSpec(n, 0.0), sigma_c, Driving.ADIABATIC)
        for lam in (0.5, 1.0, 4.0):
            p = ratios_at_optima(a, MediumSpec(n, lam), sigma_c, Driving.ADIABATIC)
            for f in ("r", "rho", "x_opt_many", "x_opt_single"):
                assert getattr(p, f) == pytest.approx(getattr(base, f), rel=1e-12)

    def test_no_engine_is_flagged(self):
        p = ratios_at_optima(0.3, MediumSpec(1), 1e4)  # both baths frozen: nothing to extract
        assert not p.valid and "many_no_engine" in p.flags and "single_no_engine" in p.flags
        assert math.isnan(p.r)


class TestSameResources:
    def test_boost_at_zero_coupling(self):
        for x in (0.6, 0.7, 0.8):
            p = ratios_same_resources(x, 0.3, MediumSpec(2000), 5.0)
            assert p.valid and p.rho > 1
            assert "model_identity_checked" in p.flags

    def test_invalid_flags(self):
        p = ratios_same_resources(0.5, 0.9, MediumSpec(200), 2.0)
        assert not p.valid and set(p.flags) == {"many_not_engine", "single_not_engine"}
        assert p.many is not None and p.single is not None

    def test_domain(self):
        with pytest.raises(DomainError):
            ratios_same_resources(1.0, 0.3, MediumSpec(200), 2.0)

    @pytest.mark.parametrize("lam", [0.0, 0.5, 1.0])
    @pytest.mark.parametrize("driving", [Driving.SUDDEN, Driving.ADIABATIC])
    def test_model_identity(self, lam, driving):
        rng = np.random.default_rng(7)
        for _ in range(10):
            x, a, s = rng.uniform(0.6, 0.95), rng.uniform(0.1, 0.5), rng.uniform(1, 10)
            m = intermediate_model_ratios(x, a, MediumSpec(1000, lam), s, driving)
            assert m.r_direct == pytest.approx(m.r_identity, rel=1e-12)
            # the model Q2 > 0 condition is the classical one at a * f_lambda
            assert math.isnan(m.rho_direct) == math.isnan(m.rho_identity)
            if not math.isnan(m.rho_direct):
                assert m.rho_direct == pytest.approx(m.rho_identity, rel=1e-12)
            assert m.f_lambda == pytest.approx(mu(lam, s) / mu(lam, s * a / x), rel=1e-15)

    def test_classical_derivative_signs(self):
        rng = np.random.default_rng(3)
        h = 1e-6
        for _ in range(20):
            x, a = rng.uniform(0.3, 0.95), rng.uniform(0.1, 0.6)
            dw = classical_single_work(x, a + h, 1.0) - classical_single_work(x, a - h, 1.0)
            de = classical_single_efficiency(x, a + h) - classical_single_efficiency(x, a - h)
            assert dw < 0
            if not math.isnan(de):
                assert de < 0


class TestSweep:
    def test_order(self):
        spec = SweepSpec(a_values=(0.2, 0.3), n_values=(1, 2), lambda_values=(0.0, 1.0), sigma_c_values=(0.5,))
        pts = spec.points()
        assert pts[:3] == [(0.2, 1, 0.0, 0.5), (0.3, 1, 0.0, 0.5), (0.2, 2, 0.0, 0.5)]
        assert pts[4] == (0.2, 1, 1.0, 0.5)
        other = SweepSpec(a_values=(0.2, 0.3), n_values=(1, 2), sigma_c_values=(0.5,), order=("a", "n", "lambda", "sigma_c"))
        assert other.points()[:2] == [(0.2, 1, 0.0, 0.5), (0.2, 2, 0.0, 0.5)]

    def test_beta_c_ties_sigma_to_n(self):
        spec = SweepSpec(a_values=(0.3,), n_values=(150, 200, 500), sigma_c_values=None, beta_c=0.01)
        assert [p[3] for p in spec.points()] == pytest.approx([1.5, 2.0, 5.0])

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(a_values=()),
            dict(a_values=(1.0,)),
            dict(a_values=(0.3,), n_values=(0,)),
            dict(a_values=(0.3,), lambda_values=(-1.0,)),
            dict(a_values=(0.3,), beta_c=0.01),
            dict(a_values=(0.3,), sigma_c_values=None),
            dict(a_values=(0.3,), convention=Convention.SAME_RESOURCES),
            dict(a_values=(0.3,), order=("a", "n")),
            dict(a_values=(0.3,), driving=Driving.RAMP),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            SweepSpec(**kwargs)

    def test_matches_direct_and_is_deterministic(self):
        spec = SweepSpec(a_values=(0.2, 0.3, 0.4), lambda_values=(0.0, 1.0))
        serial = sweep(spec)
        assert serial == sweep(spec, workers=2)
        direct = ratios_at_optima(0.3, MediumSpec(200, 1.0), 2.0)
        assert serial[4].r == direct.r and serial[4].rho == direct.rho

    def test_lambda_table(self):
        spec = SweepSpec(a_values=np.round(np.arange(0.05, 0.951, 0.05), 2), lambda_values=(0.0, 0.2, 0.5, 1.0))
        table = {(p.coupling, round(p.a, 2)): p for p in sweep(spec)}
        assert len(table) == 76
        assert table[(0.0, 0.3)].rho > 1 and table[(0.2, 0.3)].rho > 1 and table[(1.0, 0.3)].rho < 1

    def test_failures_are_recorded(self, monkeypatch):
        real = supremacy.ratios_at_optima

        def flaky(a, *args, **kwargs):
            if a == 0.3:
                raise IntegrationError("step size underflow", 1.5)
            return real(a, *args, **kwargs)

        monkeypatch.setattr(supremacy, "ratios_at_optima", flaky)
        pts = sweep(SweepSpec(a_values=(0.2, 0.3, 0.4)))
        assert [p.valid for p in pts] == [True, False, True]
        assert pts[1].flags[0].startswith("error:IntegrationError")

    def test_invalid_points_do_not_abort(self):
        spec = SweepSpec(a_values=(0.3, 0.9), convention=Convention.SAME_RESOURCES, x=0.5)
        pts = sweep(spec)
        assert len(pts) == 2 and not pts[1].valid and pts[1].flags


class TestCriticalA:
    def test_n_500(self):
        crit = locate_critical_a(MediumSpec(500), 5.0)
        assert crit.a_star == pytest.approx(0.2, abs=0.05)
        lo, hi = crit.bracket
        assert hi - lo <= 1e-3
        assert ratios_at_optima(lo, MediumSpec(500), 5.0).r > 1 > ratios_at_optima(hi, MediumSpec(500), 5.0).r

    def test_single_particle(self):
        crit = locate_critical_a(MediumSpec(1), 0.5)
        assert crit.a_star is None and crit.side == "unity"

    def test_strong_coupling(self):
        crit = locate_critical_a(MediumSpec(200, 1.0), 2.0)
        assert crit.a_star is None and crit.side == "below"


class TestBounds:
    def test_efficiency_cap(self):
        rhos = [
            ratios_at_optima(float(a), MediumSpec(n), s).rho
            for n in (500, 1000, 2000)
            for s in (1.0, 2.0, 5.0, 10.0)
            for a in A_GRID
        ]
        assert all(not math.isnan(r) for r in rhos)
        assert max(rhos) <= 1.55

    def test_adiabatic_floor(self):
        rhos = [ratios_at_optima(float(a), MediumSpec(1000), 10.0, Driving.ADIABATIC).rho for a in A_GRID]
        assert min(rhos) >= 0.65

    def test_single_optimum_matches_optimizer(self):
        p = ratios_at_optima(0.3, MediumSpec(200), 2.0)
        # the single-particle engine shares beta_c = sigma_c / N with the many-particle one
        template = OttoCycleSpec.from_ratios(0.5, 0.3, 2.0 / 200, MediumSpec(1))
        assert maximize_work(template).x_opt == p.x_opt_single
