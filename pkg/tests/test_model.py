import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hbvwave import model

from conftest import random_valid

# Frozen oracle values, computed by direct arithmetic on the table1 numbers
# (30-digit decimal evaluation, independent of the library code).
TABLE1_RS = 0.61038
TABLE1_RHO = (5.3, 15000.0, 61.038, 30.22032, 380.0, 8e-4)
TABLE1_R0 = 3.6874874990372611
TABLE1_ENDEMIC = (0.27118736002795470, 0.13751181886265006, 33.793330104848633, 2.6874874990372611)
TABLE1_ELASTICITIES = (-1.0486909793898883, -0.14027327238769291, 0.22710442675054884)
REFERENCE_R0 = 570.0 / 542.875


class TestValidate:
    def test_table1_rs(self, table1):
        vp = model.validate(table1)
        assert vp.r_s == pytest.approx(TABLE1_RS, rel=1e-12)

    def test_recycling_dominates_removal(self, table1):
        p = replace(table1, gamma=10.0, alpha=0.1, beta=0.1, delta=0.01)
        with pytest.raises(model.NonPositiveRs) as exc:
            model.validate(p)
        assert exc.value.value < 0.0

    def test_zero_mu_rejected(self, table1):
        with pytest.raises(model.NonPositiveParameter) as exc:
            model.validate(replace(table1, mu=0.0))
        assert exc.value.name == "mu"

    def test_alpha_above_one_rejected(self, table1):
        with pytest.raises(model.ParameterOutOfRange) as exc:
            model.validate(replace(table1, alpha=1.2))
        assert exc.value.name == "alpha"

    def test_alpha_exactly_one_allowed(self, table1):
        vp = model.validate(replace(table1, alpha=1.0))
        assert vp.r_s == pytest.approx(table1.beta + table1.delta, rel=1e-12)

    @pytest.mark.parametrize("name", ["lambda_", "k", "delta", "a", "gamma", "beta", "delta_v", "d_v"])
    def test_every_field_gated(self, table1, name):
        with pytest.raises(model.NonPositiveParameter) as exc:
            model.validate(replace(table1, **{name: -1.0}))
        assert exc.value.name == name


class TestScale:
    def test_table1_rhos(self, table1_scaled):
        got = (
            table1_scaled.rho1,
            table1_scaled.rho2,
            table1_scaled.rho3,
            table1_scaled.rho4,
            table1_scaled.rho5,
            table1_scaled.Dv,
        )
        for g, want in zip(got, TABLE1_RHO):
            assert g == pytest.approx(want, rel=1e-12)

    def test_delta_equals_mu_gives_unit_rho1(self, table1):
        vp = model.validate(replace(table1, delta=table1.mu))
        assert model.scale(vp).rho1 == 1.0

    def test_doubling_mu_divides_rho4_by_eight(self, table1):
        sp1 = model.scale(model.validate(table1))
        sp2 = model.scale(model.validate(replace(table1, mu=2.0 * table1.mu)))
        assert sp2.rho4 == pytest.approx(sp1.rho4 / 8.0, rel=1e-12)

    def test_scaled_params_reject_nonpositive(self):
        with pytest.raises(model.NonPositiveParameter):
            model.ScaledParams(rho1=0.0, rho2=1.0, rho3=1.0, rho4=1.0, rho5=1.0, Dv=0.1)

    def test_scaled_params_allow_zero_diffusion(self):
        sp = model.ScaledParams(rho1=1.0, rho2=1.0, rho3=1.0, rho4=1.0, rho5=1.0, Dv=0.0)
        assert sp.Dv == 0.0


class TestBasicReproductionNumber:
    def test_table1(self, table1_scaled):
        assert model.basic_reproduction_number(table1_scaled) == pytest.approx(TABLE1_R0, rel=1e-12)
        assert abs(model.basic_reproduction_number(table1_scaled) - 3.6875) < 5e-4

    def test_scaled_and_dimensional_agree(self, table1_valid, table1_scaled):
        r0_dim = model.basic_reproduction_number_dimensional(table1_valid)
        r0_scaled = model.basic_reproduction_number(table1_scaled)
        assert r0_scaled == pytest.approx(r0_dim, rel=1e-12)

    def test_threshold_case(self):
        sp = model.ScaledParams(rho1=1.0, rho2=1.0, rho3=1.0, rho4=1.0, rho5=1.0, Dv=0.1)
        assert model.basic_reproduction_number(sp) == 1.0

    def test_reference_set(self, reference):
        assert model.basic_reproduction_number(reference) == pytest.approx(REFERENCE_R0, rel=1e-12)
        assert abs(model.basic_reproduction_number(reference) - 1.0500) < 1e-4


class TestEquilibria:
    def test_disease_free_is_exact(self, table1_scaled, reference, paper_rho):
        for sp in (table1_scaled, reference, paper_rho):
            df, _ = model.equilibria(sp)
            assert df.as_tuple() == (1.0, 0.0, 0.0, 0.0)

    def test_table1_endemic(self, table1_scaled):
        _, endemic = model.equilibria(table1_scaled)
        assert endemic is not None
        for got, want in zip(endemic.as_tuple(), TABLE1_ENDEMIC):
            assert got == pytest.approx(want, rel=1e-12)

    def test_subcritical_has_no_endemic_point(self):
        sp = model.ScaledParams(rho1=10.0, rho2=1.0, rho3=10.0, rho4=1.0, rho5=2.0, Dv=0.1)
        assert model.basic_reproduction_number(sp) < 1.0
        _, endemic = model.equilibria(sp)
        assert endemic is None

    def test_threshold_reports_absent(self):
        sp = model.ScaledParams(rho1=1.0, rho2=1.0, rho3=1.0, rho4=1.0, rho5=1.0, Dv=0.1)
        _, endemic = model.equilibria(sp)
        assert endemic is None

    def test_identities_over_random_draws(self):
        rng = np.random.default_rng(42)
        checked = 0
        while checked < 300:
            vp = random_valid(rng)
            sp = model.scale(vp)
            r0 = model.basic_reproduction_number(sp)
            _, endemic = model.equilibria(sp)
            if endemic is None:
                continue
            checked += 1
            assert endemic.T1 * r0 == pytest.approx(1.0, abs=1e-12)
            assert endemic.V1 == pytest.approx(r0 - 1.0, abs=1e-12 * max(1.0, r0))
            assert all(v > 0.0 for v in endemic.as_tuple())


class TestElasticities:
    def test_table1_closed_form(self, table1_valid):
        rep = model.elasticities(table1_valid)
        got = (rep.e_alpha, rep.e_beta, rep.e_gamma)
        for g, want in zip(got, TABLE1_ELASTICITIES):
            assert g == pytest.approx(want, rel=1e-12)

    def test_delta_equals_gamma_kills_alpha_elasticity(self, table1):
        vp = model.validate(replace(table1, delta=table1.gamma))
        assert model.elasticities(vp).e_alpha == 0.0

    def test_alpha_one_limits(self, table1):
        vp = model.validate(replace(table1, alpha=1.0))
        rep = model.elasticities(vp)
        assert rep.e_gamma == 0.0
        assert rep.e_beta == pytest.approx(table1.delta / (table1.beta + table1.delta), rel=1e-12)

    def test_closed_form_menu_matches_report(self, table1_valid):
        rep = model.elasticities(table1_valid)
        assert model.elasticity_closed_form(table1_valid, "alpha") == rep.e_alpha
        assert model.elasticity_closed_form(table1_valid, "beta") == rep.e_beta
        assert model.elasticity_closed_form(table1_valid, "gamma") == rep.e_gamma
        assert model.elasticity_closed_form(table1_valid, "lambda_") == 1.0
        with pytest.raises(ValueError):
            model.elasticity_closed_form(table1_valid, "d_v")


class TestElasticityFiniteDifference:
    def test_alpha_matches_quoted_value(self, table1_valid):
        fd = model.elasticity_fd(table1_valid, "alpha", h=1e-6)
        assert fd == pytest.approx(-1.0487, abs=1e-4)
        assert fd == pytest.approx(TABLE1_ELASTICITIES[0], abs=1e-5)

    def test_linear_parameters(self, table1_valid):
        assert model.elasticity_fd(table1_valid, "lambda_", h=1e-6) == pytest.approx(1.0, abs=1e-9)
        assert model.elasticity_fd(table1_valid, "mu", h=1e-6) == pytest.approx(-1.0, abs=1e-9)

    def test_all_parameters_match_closed_form(self, table1_valid):
        for which in model.R0_PARAMETERS:
            fd = model.elasticity_fd(table1_valid, which, h=1e-6)
            exact = model.elasticity_closed_form(table1_valid, which)
            assert fd == pytest.approx(exact, abs=1e-5)

    def test_quadratic_convergence(self, table1_valid):
        # |fd - exact| <= C h^2: fit C at h=1e-4 and check the smaller steps.
        exact = model.elasticity_closed_form(table1_valid, "delta")
        errs = {
            h: abs(model.elasticity_fd(table1_valid, "delta", h=h) - exact)
            for h in (1e-4, 1e-5, 1e-6)
        }
        C = errs[1e-4] / (1e-4) ** 2
        assert errs[1e-5] <= max(C * (1e-5) ** 2 * 2.0, 1e-9)
        assert errs[1e-6] <= max(C * (1e-6) ** 2 * 4.0, 1e-9)

    def test_step_leaving_domain_raises(self, table1):
        vp = model.validate(replace(table1, alpha=1.0))
        with pytest.raises(model.StepTooLarge):
            model.elasticity_fd(vp, "alpha", h=1e-6)

    def test_step_range_enforced(self, table1_valid):
        with pytest.raises(ValueError):
            model.elasticity_fd(table1_valid, "alpha", h=1e-2)
        with pytest.raises(ValueError):
            model.elasticity_fd(table1_valid, "alpha", h=0.0)

    def test_dv_not_an_r0_parameter(self, table1_valid):
        with pytest.raises(ValueError):
            model.elasticity_fd(table1_valid, "d_v", h=1e-6)


_positive = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False, allow_infinity=False)


class TestProperties:
    @settings(max_examples=150, deadline=None)
    @given(
        delta=_positive,
        a=_positive,
        gamma=_positive,
        alpha=st.floats(min_value=0.05, max_value=1.0),
        beta=_positive,
        mu=_positive,
        delta_v=_positive,
        lambda_=st.floats(min_value=1.0, max_value=1e9),
        k=st.floats(min_value=1e-13, max_value=1e-6),
    )
    def test_sign_structure_and_round_trip(self, delta, a, gamma, alpha, beta, mu, delta_v, lambda_, k):
        p = model.DimensionalParams(
            lambda_=lambda_, k=k, mu=mu, delta=delta, a=a, gamma=gamma,
            alpha=alpha, beta=beta, delta_v=delta_v, d_v=0.1,
        )
        try:
            vp = model.validate(p)
        except model.ParameterError:
            return
        rep = model.elasticities(vp)
        assert rep.e_gamma >= 0.0
        assert math.copysign(1.0, rep.e_alpha) == math.copysign(1.0, delta - gamma) or rep.e_alpha == 0.0
        sign_beta = delta - (1.0 - alpha) * gamma
        assert math.copysign(1.0, rep.e_beta) == math.copysign(1.0, sign_beta) or rep.e_beta == 0.0

        r0_scaled = model.basic_reproduction_number(model.scale(vp))
        r0_dim = model.basic_reproduction_number_dimensional(vp)
        assert r0_scaled == pytest.approx(r0_dim, rel=1e-12)
