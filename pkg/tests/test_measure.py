"""
Tests for Lambda measures: rates, Psi, regimes and the CDI speed
"""

import math

import numpy as np
import pytest
from scipy import integrate

from lambda_flows.errors import DomainError, MeasureError
from lambda_flows.measure import (
    beta,
    beta_ab,
    cdi_speed,
    classify,
    custom,
    dirac,
    dirac0,
    dropped_mass,
    lambda_rate,
    lebesgue,
    make_measure,
    merger_weights,
    nu_mass_above,
    psi,
    psi_tail,
)
from lambda_flows.models import MeasureSpec, Regime


class TestConstruction:
    """Measure families and the run-config measure object"""

    def test_make_measure_from_dict(self):
        m = make_measure({"family": "beta", "alpha": 1.5})
        assert m.density.beta_params == (0.5, 1.5)
        assert isinstance(m.spec, MeasureSpec)

    def test_invalid_spec(self):
        """beta without parameters is rejected"""
        with pytest.raises(MeasureError, match="Invalid measure spec"):
            make_measure({"family": "beta"})

    def test_unknown_keys_rejected(self):
        with pytest.raises(MeasureError):
            make_measure({"family": "dirac0", "colour": "red"})

    def test_alpha_range(self):
        with pytest.raises(MeasureError):
            beta(2.5)

    def test_dirac_location(self):
        with pytest.raises(MeasureError):
            dirac(1.0)

    def test_total_mass(self):
        assert lebesgue().total_mass == pytest.approx(1.0, rel=1e-9)
        assert beta(1.5).total_mass == pytest.approx(1.0, rel=1e-9)
        assert dirac0(2.0).total_mass == 2.0

    def test_custom_table_validation(self):
        with pytest.raises(MeasureError):
            custom([(0.5, 1.0), (0.2, 1.0)])


class TestRates:
    """lambda_{m,p} and the merger weights C(b,p) lambda_{b,p}"""

    def test_kingman(self):
        m = dirac0()
        assert lambda_rate(m, 2, 2) == 1.0
        assert lambda_rate(m, 3, 3) == 0.0

    def test_lebesgue_closed_form(self):
        """Beta integrals: 1/3, 1/6, 1/3"""
        m = lebesgue()
        assert lambda_rate(m, 4, 2) == pytest.approx(1 / 3, abs=1e-8)
        assert lambda_rate(m, 4, 3) == pytest.approx(1 / 6, abs=1e-8)
        assert lambda_rate(m, 4, 4) == pytest.approx(1 / 3, abs=1e-8)

    def test_lebesgue_weights(self):
        np.testing.assert_allclose(merger_weights(lebesgue(), 4), [2.0, 2 / 3, 1 / 3], rtol=1e-10)

    def test_dirac_atom(self):
        """delta_x gives x^(p-2) (1-x)^(m-p)"""
        m = dirac(0.5)
        assert lambda_rate(m, 4, 2) == pytest.approx(0.25)
        assert lambda_rate(m, 4, 4) == pytest.approx(0.25)

    @pytest.mark.parametrize(
        "m",
        [dirac0(), lebesgue(), beta(0.5), beta(1.5), dirac(0.3, 2.0)],
        ids=["kingman", "lebesgue", "beta0.5", "beta1.5", "dirac0.3"],
    )
    def test_consistency(self, m):
        """lambda_{m,p} = lambda_{m+1,p} + lambda_{m+1,p+1}"""
        for size in range(2, 21):
            for p in range(2, size + 1):
                left = lambda_rate(m, size, p)
                right = lambda_rate(m, size + 1, p) + lambda_rate(m, size + 1, p + 1)
                assert left == pytest.approx(right, rel=1e-8, abs=1e-12)

    def test_custom_matches_lebesgue(self):
        """A flat density table reproduces the Lebesgue rates by quadrature"""
        flat = custom([(0.0, 1.0), (1.0, 1.0)])
        for p in range(2, 6):
            assert lambda_rate(flat, 5, p) == pytest.approx(lambda_rate(lebesgue(), 5, p), rel=1e-8)

    def test_weights_match_rates(self):
        m = beta(1.5)
        weights = merger_weights(m, 6)
        for p in range(2, 7):
            assert weights[p - 2] == pytest.approx(math.comb(6, p) * lambda_rate(m, 6, p), rel=1e-10)

    def test_invalid_p(self):
        with pytest.raises(MeasureError):
            lambda_rate(lebesgue(), 3, 4)


class TestPsi:
    """The exponent Psi(u)"""

    def test_kingman(self):
        assert psi(dirac0(2.0), 3.0) == pytest.approx(9.0)

    def test_atom_closed_form(self):
        x, u = 0.3, 7.0
        expected = (math.exp(-x * u) - 1.0 + x * u) / (x * x)
        assert psi(dirac(x), u) == pytest.approx(expected, rel=1e-12)

    def test_lebesgue_asymptotics(self):
        """Psi(u) ~ u log u"""
        u = 1e6
        assert abs(psi(lebesgue(), u) / (u * math.log(u)) - 1.0) <= 0.15

    def test_convexity(self):
        """Finite differences of Psi are nondecreasing"""
        grid = np.linspace(0.0, 50.0, 51)
        values = np.array([psi(beta(1.5), u) for u in grid])
        diffs = np.diff(values)
        assert np.all(np.diff(diffs) >= -1e-9 * values.max())

    def test_negative_argument(self):
        with pytest.raises(MeasureError):
            psi(lebesgue(), -1.0)


class TestClassification:
    """The four regimes"""

    @pytest.mark.parametrize(
        "m,regime",
        [
            (dirac0(), Regime.CDI),
            (dirac(0.5), Regime.DISCRETE),
            (beta_ab(3.0, 1.0), Regime.DISCRETE),
            (lebesgue(), Regime.INTENSIVE_INF),
            (beta(1.5), Regime.CDI),
            (beta(0.5), Regime.INTENSIVE_W_DUST),
        ],
        ids=["kingman", "dirac", "beta3-1", "lebesgue", "beta1.5", "beta0.5"],
    )
    def test_regimes(self, m, regime):
        assert classify(m).regime == regime

    def test_dust_case_reports_u_log_u(self):
        result = classify(beta(0.5))
        assert result.u_log_u_finite is True
        assert result.integral_report["u_nu"].divergent is False

    def test_numeric_dust_classification(self):
        """f(u) = u: nu infinite, u nu finite, u log u nu finite, decided on shells"""
        result = classify(custom([(0.0, 0.0), (1.0, 1.0)]))
        assert result.regime == Regime.INTENSIVE_W_DUST
        assert result.u_log_u_finite is True
        assert result.integral_report["nu_mass"].method == "shells"

    def test_numeric_discrete_classification(self):
        """A density vanishing near 0 has finite nu"""
        result = classify(custom([(0.5, 1.0), (1.0, 1.0)]))
        assert result.regime == Regime.DISCRETE

    @pytest.mark.slow
    def test_numeric_intensive_inf(self):
        """A flat table behaves like Lebesgue: int du/Psi diverges"""
        assert classify(custom([(0.0, 1.0), (1.0, 1.0)])).regime == Regime.INTENSIVE_INF

    def test_cached_report_is_a_copy(self):
        m = lebesgue()
        first = classify(m)
        first.integral_report.clear()
        assert classify(m).integral_report


class TestNuMass:
    """nu([eps,1)) and the mass dropped by a truncation"""

    def test_atom(self):
        assert nu_mass_above(dirac(0.5), 0.0) == pytest.approx(4.0)
        assert nu_mass_above(dirac(0.5), 0.6) == 0.0

    def test_kingman_has_no_nu(self):
        with pytest.raises(DomainError):
            nu_mass_above(dirac0(), 0.1)

    def test_divergent_without_truncation(self):
        with pytest.raises(DomainError):
            nu_mass_above(lebesgue(), 0.0)

    def test_lebesgue_truncated(self):
        """int_eps^1 u^-2 du = 1/eps - 1"""
        assert nu_mass_above(lebesgue(), 0.1) == pytest.approx(9.0, rel=1e-8)

    def test_dropped_mass(self):
        assert dropped_mass(lebesgue(), 0.1) == math.inf
        assert dropped_mass(dirac(0.5), 0.1) == 0.0
        # Beta(3/2, 1/2): int_0^eps u^-1/2 (1-u)^-1/2 / B(3/2,1/2) du
        value = dropped_mass(beta(0.5), 0.01)
        assert 0.0 < value < 1.0


class TestSpeed:
    """G(v) = int_v^inf du/Psi and v(t)"""

    def test_kingman_closed_form(self):
        m = dirac0()
        for t in (0.005, 0.01, 0.05, 1.0):
            assert cdi_speed(m, t) == pytest.approx(2.0 / t, rel=1e-6)
        assert psi_tail(m, 10.0) == pytest.approx(0.2)

    def test_non_cdi(self):
        with pytest.raises(DomainError):
            cdi_speed(lebesgue(), 0.1)

    def test_non_positive_time(self):
        with pytest.raises(DomainError):
            cdi_speed(dirac0(), 0.0)

    @pytest.mark.slow
    def test_beta_regular_variation(self):
        """v(t) ~ c t^-2 for alpha = 3/2"""
        m = beta(1.5)
        t = 1e-4
        assert abs(cdi_speed(m, 2 * t) / cdi_speed(m, t) - 0.25) < 0.005

    @pytest.mark.slow
    def test_speed_inverts_tail(self):
        m = beta(1.5)
        v = cdi_speed(m, 0.01)
        assert psi_tail(m, v) == pytest.approx(0.01, rel=1e-8)

    @pytest.mark.slow
    def test_tabulated_tail_matches_quadrature(self):
        """Differences of G across many table nodes agree with direct quadrature"""
        m = beta(1.5)
        direct, _ = integrate.quad(lambda u: 1.0 / psi(m, u), 3.0, 3000.0, limit=200)
        assert psi_tail(m, 3.0) - psi_tail(m, 3000.0) == pytest.approx(direct, rel=1e-6)
