import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from pathpresence import analytic, qcore
from pathpresence.analytic import DivergentWeakValueError, EstimateAssignment
from pathpresence.qcore import BeamConfig

from .conftest import beam_configs

PI = math.pi


def weak_value_oracle(path, port, cfg):
    """<f|Pi_p|psi> / <f|psi> from explicit vectors."""
    psi = np.array([cfg.a1, cfg.a2], dtype=complex)
    f = qcore.exit_vector(port, cfg)
    proj = np.diag([1.0, 0.0] if path == 1 else [0.0, 1.0])
    return np.vdot(f, proj @ psi) / np.vdot(f, psi)


@pytest.mark.parametrize(
    "path,port,expected", [(1, "+", 2 / 3), (2, "+", 1 / 3), (1, "-", 2.0), (2, "-", -1.0)]
)
def test_weak_values_four_to_one(four_to_one, path, port, expected):
    assert analytic.weak_value(path, port, four_to_one).value == pytest.approx(expected, abs=1e-12)


def test_weak_value_symmetric(symmetric):
    assert analytic.weak_value(1, "+", symmetric).value == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(DivergentWeakValueError):
        analytic.weak_value(1, "-", symmetric)


@given(beam_configs(), st.sampled_from(["+", "-"]))
def test_weak_values_match_vector_oracle_and_sum_to_one(cfg, port):
    w1 = analytic.weak_value(1, port, cfg).value
    w2 = analytic.weak_value(2, port, cfg).value
    assert abs(w1 + w2 - 1) <= 1e-12
    assert abs(w1 - weak_value_oracle(1, port, cfg)) <= 1e-9 * max(1, abs(w1))


def test_port_probability(four_to_one, symmetric):
    assert analytic.port_probability("+", four_to_one) == pytest.approx(0.9, abs=1e-12)
    assert analytic.port_probability("-", symmetric) == pytest.approx(0, abs=1e-12)
    quarter = BeamConfig(four_to_one.a1, four_to_one.a2, PI / 2)
    assert analytic.port_probability("+", quarter) == pytest.approx(0.5, abs=1e-12)


def test_compensation_solution_anchors(four_to_one):
    plus = analytic.compensation_solution("+", PI / 4, four_to_one)
    minus = analytic.compensation_solution("-", PI / 4, four_to_one)
    assert plus.beta0.real / (PI / 4) == pytest.approx(0.6686, abs=5e-4)
    assert minus.beta0.real / (PI / 4) == pytest.approx(1.8701, abs=1e-3)
    assert abs(plus.beta0.imag) < 1e-12 and abs(plus.amplitude.imag) < 1e-12
    zero = analytic.compensation_solution("+", 0.0, four_to_one)
    assert zero.beta0 == 0 and zero.amplitude == pytest.approx(1)


@given(beam_configs(), st.floats(-PI, PI), st.sampled_from(["+", "-"]))
def test_amplitude_and_phase_reproduce_spin_amplitudes(cfg, alpha, port):
    # A sin(b0/2) = w1 sin(a/2), A cos(b0/2) = w1 cos(a/2) + w2
    sol = analytic.compensation_solution(port, alpha, cfg)
    w1 = analytic.weak_value(1, port, cfg).value
    scale = max(1.0, abs(w1))
    assert abs(sol.amplitude * np.sin(sol.beta0 / 2) - w1 * np.sin(alpha / 2)) < 1e-9 * scale
    assert abs(sol.amplitude * np.cos(sol.beta0 / 2) - (w1 * np.cos(alpha / 2) + 1 - w1)) < 1e-9 * scale


def test_series_beta0(four_to_one):
    a = PI / 16
    assert analytic.series_beta0("+", a, four_to_one) == pytest.approx(2 / 3 * a)
    # reference measurement 0.0449(54) pi lies within one sigma of the first-order value
    assert abs(0.0449 - analytic.series_beta0("+", a, four_to_one) / PI) < 0.0054
    assert analytic.series_beta0("-", PI / 4, four_to_one) == pytest.approx(PI / 2)


@pytest.mark.parametrize("port", ["+", "-"])
def test_series_contracts_cubic_and_quartic(four_to_one, port):
    alphas = np.geomspace(1e-3, PI / 8, 12)
    r_beta = np.array(
        [abs(analytic.compensation_solution(port, a, four_to_one).beta0 - analytic.series_beta0(port, a, four_to_one)) for a in alphas]
    )
    r_amp = np.array(
        [abs(analytic.compensation_solution(port, a, four_to_one).amplitude - analytic.series_amplitude(port, a, four_to_one)) for a in alphas]
    )
    c_beta = 2 * r_beta[-1] / alphas[-1] ** 3
    c_amp = 2 * r_amp[-1] / alphas[-1] ** 4
    assert np.all(r_beta <= c_beta * alphas**3 + 1e-15)
    assert np.all(r_amp <= c_amp * alphas**4 + 1e-15)
    ratio = analytic.series_beta0(port, 1e-6, four_to_one) / analytic.compensation_solution(port, 1e-6, four_to_one).beta0.real
    assert ratio == pytest.approx(1, abs=1e-9)


def test_effective_port_probability(four_to_one):
    assert analytic.effective_port_probability("+", PI / 4, four_to_one) == pytest.approx(0.8696, abs=5e-5)
    assert analytic.effective_port_probability("-", PI / 4, four_to_one) == pytest.approx(0.1304, abs=5e-5)
    assert analytic.effective_port_probability("+", 0, four_to_one) == pytest.approx(0.9, abs=1e-12)


@given(beam_configs(chi=0.0), st.floats(-PI, PI))
def test_effective_probability_is_p_times_a_squared(cfg, alpha):
    total = sum(analytic.effective_port_probability(p, alpha, cfg) for p in "+-")
    assert total == pytest.approx(1, abs=1e-12)
    for p in "+-":
        sol = analytic.compensation_solution(p, alpha, cfg)
        expected = analytic.port_probability(p, cfg) * (sol.amplitude**2).real
        assert analytic.effective_port_probability(p, alpha, cfg) == pytest.approx(expected, abs=1e-12)


@settings(max_examples=300)
@given(
    beam_configs(chi=0.0),
    st.floats(0, PI / 4),
    st.floats(-PI, PI),
    st.sampled_from(["+", "-"]),
)
def test_spin_expectations_match_state_vectors(cfg, alpha, beta, port):
    # a dark exit port has no post-selected state to compare against
    assume(analytic.port_probability(port, cfg) > 1e-9)
    an = analytic.spin_expectations_analytic(port, alpha, beta, cfg)
    bf = qcore.spin_vector(qcore.pipeline(cfg, alpha, beta, port=port))
    assert an == pytest.approx(bf, abs=1e-10)
    assert abs(an[2]) < 1e-12


def test_spin_expectations_special_cases(four_to_one):
    b0 = analytic.compensation_solution("-", 0.4, four_to_one).beta0.real
    assert analytic.spin_expectations_analytic("-", 0.4, b0, four_to_one) == pytest.approx((1, 0, 0), abs=1e-12)
    # single path: only path 1 carries amplitude, so <sigma_x> = cos(beta - alpha)
    single = BeamConfig(1, 0)
    sx, _, _ = analytic.spin_expectations_analytic("+", 0.5, 0.2, single)
    assert sx == pytest.approx(np.cos(0.2 - 0.5), abs=1e-12)


def test_variances(four_to_one):
    a = PI / 4
    b0 = analytic.compensation_solution("+", a, four_to_one).beta0.real
    assert analytic.spin_variances_analytic("+", a, b0, four_to_one) == pytest.approx((0, 1, 1), abs=1e-12)
    assert analytic.spin_variances_analytic("+", 0, 0, four_to_one) == pytest.approx((0, 1, 1), abs=1e-12)
    small = 1e-3
    vx, _, _ = analytic.spin_variances_analytic("+", small, 0, four_to_one)
    assert vx == pytest.approx((small * 2 / 3) ** 2, rel=1e-5)


@given(beam_configs(), st.floats(0, PI / 2), st.floats(-PI, PI), st.sampled_from(["+", "-"]))
def test_variance_equals_one_minus_square(cfg, alpha, beta, port):
    s = analytic.spin_expectations_analytic(port, alpha, beta, cfg)
    v = analytic.spin_variances_analytic(port, alpha, beta, cfg)
    assert v == pytest.approx(tuple(1 - x**2 for x in s), abs=1e-12)


def test_ozawa_error_examples(four_to_one):
    e = lambda p, m: analytic.ozawa_error(PI / 8, EstimateAssignment(p, m), four_to_one)
    assert e(2 / 3, 2) == pytest.approx(0, abs=1e-12)
    assert e(0.8, 0.8) == pytest.approx(0.16, abs=1e-12)
    assert e(0, 0) == pytest.approx(0.8, abs=1e-12)


@given(beam_configs(chi=0.0), st.floats(-3, 3), st.floats(-3, 3))
def test_ozawa_error_matches_operator_form(cfg, ep, em):
    est = EstimateAssignment(ep, em)
    direct = analytic.ozawa_error(0.3, est, cfg)
    assert direct >= 0
    assert direct == pytest.approx(analytic.ozawa_error_operator(est, cfg), abs=1e-9 * max(1, direct))


def test_max_sigma_x_from_error():
    assert analytic.max_sigma_x_from_error(0.3, 0) == 1
    assert analytic.max_sigma_x_from_error(PI / 4, 0.16) == pytest.approx(0.9507, abs=1e-4)
    with pytest.raises(ValueError):
        analytic.max_sigma_x_from_error(0.1, -1)
    # against the exact which-way visibility, the gap is fourth order
    nu = math.sqrt(1 - 0.32 * (1 - math.cos(PI / 4)))
    assert abs(nu - analytic.max_sigma_x_from_error(PI / 4, 0.16)) < (PI / 4) ** 4 * 0.01


def test_presence_table_four_to_one(four_to_one):
    t = analytic.presence_table(four_to_one, "interference")
    assert [(r.probability, r.presence_path1, r.presence_path2) for r in t.rows] == [
        pytest.approx((0.9, 2 / 3, 1 / 3), abs=1e-12),
        pytest.approx((0.1, 2, -1), abs=1e-12),
    ]
    assert (t.average_path1, t.average_path2) == pytest.approx((0.8, 0.2), abs=1e-12)
    assert (t.std_path1, t.std_path2) == pytest.approx((0.4, 0.4), abs=1e-12)
    w = analytic.presence_table(four_to_one, "whichway")
    assert [(r.probability, r.presence_path1, r.presence_path2) for r in w.rows] == [
        pytest.approx((0.8, 1, 0), abs=1e-12),
        pytest.approx((0.2, 0, 1), abs=1e-12),
    ]
    assert w.std_path1 == pytest.approx(0.4, abs=1e-12)


def test_presence_table_symmetric(symmetric):
    w = analytic.presence_table(symmetric, "whichway")
    assert [r.probability for r in w.rows] == pytest.approx([0.5, 0.5])
    assert w.std_path1 == pytest.approx(0.5)
    with pytest.raises(DivergentWeakValueError):
        analytic.presence_table(symmetric, "interference")


@given(beam_configs(chi=0.0))
def test_averaged_weak_value_and_variance_identities(cfg):
    t = analytic.presence_table(cfg, "interference")
    assert t.average_path1 == pytest.approx(cfg.p1, abs=1e-12)
    assert t.variance_path1 == pytest.approx(cfg.p1 * cfg.p2, abs=1e-9)
    assert sum(r.probability for r in t.rows) == pytest.approx(1, abs=1e-12)


@given(beam_configs(chi=0.0), st.floats(-PI, PI))
def test_mean_rotation_agrees_between_contexts(cfg, alpha):
    a = analytic.mean_rotation(alpha, cfg, "interference")
    b = analytic.mean_rotation(alpha, cfg, "whichway")
    assert a == pytest.approx(b, abs=1e-12)
    assert b == pytest.approx(cfg.p1 * alpha, abs=1e-12)


def test_mean_rotation_examples(four_to_one):
    assert analytic.mean_rotation(PI / 4, four_to_one, "interference") == pytest.approx(PI / 5)
    assert analytic.mean_rotation(0.3, BeamConfig(1, 0), "whichway") == pytest.approx(0.3)


def test_averaged_sigma_x_whichway(four_to_one):
    value, phase, nu = analytic.averaged_sigma_x(PI / 4, 0.0, four_to_one, "whichway")
    assert nu == pytest.approx(math.sqrt(1 - 0.32 * (1 - math.cos(PI / 4))), abs=1e-12)
    assert nu == pytest.approx(0.9520, abs=1e-4)
    # direct oracle: p1 cos(alpha - beta) + p2 cos(beta)
    for beta in np.linspace(-3, 3, 7):
        v, _, _ = analytic.averaged_sigma_x(PI / 4, beta, four_to_one, "whichway")
        assert v == pytest.approx(0.8 * math.cos(PI / 4 - beta) + 0.2 * math.cos(beta), abs=1e-12)
    assert analytic.averaged_sigma_x(0, 0, four_to_one, "whichway") == pytest.approx((1, 0, 1))


def test_averaged_sigma_x_interference_is_weighted_port_average(four_to_one):
    a = PI / 4
    for beta in np.linspace(-3, 3, 7):
        v, _, _ = analytic.averaged_sigma_x(a, beta, four_to_one, "interference")
        oracle = sum(
            analytic.port_probability(p, four_to_one) * analytic.spin_expectations_analytic(p, a, beta, four_to_one)[0]
            for p in "+-"
        )
        assert v == pytest.approx(oracle, abs=1e-12)


def test_averaged_contexts_agree_to_high_order(four_to_one):
    alphas = np.geomspace(1e-2, PI / 8, 8)
    d_phase, d_nu = [], []
    for a in alphas:
        _, pi_, ni = analytic.averaged_sigma_x(a, 0, four_to_one, "interference")
        _, pw, nw = analytic.averaged_sigma_x(a, 0, four_to_one, "whichway")
        d_phase.append(abs(pi_ - pw))
        d_nu.append(abs(ni - nw))
        assert pw == pytest.approx(0.8 * a, abs=0.05 * a**3 + 1e-15)
        assert nw == pytest.approx(1 - 0.5 * 0.16 * a**2, abs=0.05 * a**4 + 1e-15)
    d_phase, d_nu = np.array(d_phase), np.array(d_nu)
    assert np.all(d_phase <= 2 * d_phase[-1] / alphas[-1] ** 3 * alphas**3 + 1e-15)
    assert np.all(d_nu <= 2 * d_nu[-1] / alphas[-1] ** 4 * alphas**4 + 1e-15)


@pytest.mark.parametrize("port,expected,tol", [("+", 2 / 3, 1e-4), ("-", 2.0, 1e-3)])
def test_weak_measurement_estimate(four_to_one, port, expected, tol):
    a = 1e-3
    _, sy, sz = analytic.spin_expectations_analytic(port, a, 0.0, four_to_one)
    est = analytic.weak_measurement_estimate(sy, sz, a)
    assert est.real == pytest.approx(expected, abs=tol)
    assert abs(est.imag) < tol


def test_weak_measurement_estimate_edges():
    assert analytic.weak_measurement_estimate(0, 0, 0.1) == 0
    with pytest.raises(ZeroDivisionError):
        analytic.weak_measurement_estimate(0.1, 0, 0)


def test_weak_measurement_estimate_complex():
    cfg = BeamConfig.from_ratio(4, 1, chi=0.9)
    w1 = analytic.weak_value(1, "+", cfg).value
    _, sy, sz = analytic.spin_expectations_analytic("+", 1e-4, 0.0, cfg)
    assert analytic.weak_measurement_estimate(sy, sz, 1e-4) == pytest.approx(w1, abs=1e-6)


def test_field_to_angle():
    assert analytic.field_to_angle(0.0, 1e-3) == 0
    one = analytic.field_to_angle(2e-4, 1e-4)
    assert analytic.field_to_angle(2e-4, 2e-4) == pytest.approx(2 * one)
    for x in (0.1, -2.0, PI / 16):
        assert analytic.field_to_angle(analytic.angle_to_field(x, 3e-5), 3e-5) == pytest.approx(x)
