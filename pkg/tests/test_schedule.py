"""Schedule family: values, derivatives, envelope certification."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from annealbound import (
    ConditionCertificate,
    ConstantG,
    PowerDecayG,
    Schedule,
    TabulatedG,
    ValidationError,
    certify,
    compute_m,
    g_function_from_json,
)

from oracles import fd1, fd2, grid_max


def const_schedule(delta=0.1, c=1.0, g0=0.25, n=2):
    return Schedule(delta=delta, c=c, g=ConstantG(g0), n_spins=n)


# ---------------------------------------------------------------- frozen values


def test_gamma_constant_g_closed_form():
    s = const_schedule()
    # (0.1*10 + 1)^(-1/4) = 2^(-1/4)
    assert s.gamma(10.0) == pytest.approx(0.8408964152537145, abs=1e-15)
    assert s.gamma(0.0) == pytest.approx(1.0, abs=0.0)


def test_gamma_prime_constant_g_closed_form():
    s = const_schedule()
    # Gamma' = -g*delta*u^(-g-1): at t=0 that is -0.25*0.1 = -0.025
    assert s.gamma_prime(0.0) == pytest.approx(-0.025, abs=1e-16)
    assert s.gamma_prime(10.0) == pytest.approx(-0.010511205190671431, abs=1e-15)


def test_gamma_double_prime_constant_g_closed_form():
    s = const_schedule()
    # Gamma'' = g*(g+1)*delta^2*u^(-g-2) at t=0: 0.25*1.25*0.01
    assert s.gamma_double_prime(0.0) == pytest.approx(0.003125, rel=1e-12)


def test_gamma_scalar_in_scalar_out():
    s = const_schedule()
    assert isinstance(s.gamma(3.0), float)
    assert isinstance(s.gamma_prime(3.0), float)
    out = s.gamma(np.linspace(0, 5, 7))
    assert out.shape == (7,)


def test_power_decay_g_value():
    # g(t) = 0.1 + 0.05*u^(-0.5), u = 0.1t + 1; at t=30, u=4: 0.1 + 0.025
    s = Schedule(delta=0.1, c=1.0, g=PowerDecayG(0.1, 0.05, 0.5), n_spins=2)
    u = np.asarray([4.0])
    g = s.g.value(np.asarray([30.0]), u)
    assert g[0] == pytest.approx(0.125, abs=1e-15)
    assert s.gamma(30.0) == pytest.approx(4.0 ** -0.125, rel=1e-14)


# ------------------------------------------------------- derivative consistency


@pytest.mark.parametrize(
    "schedule",
    [
        const_schedule(delta=0.05, c=1.5, g0=0.2),
        Schedule(delta=0.2, c=2.0, g=PowerDecayG(0.12, 0.03, 0.7), n_spins=3),
        Schedule(delta=0.5, c=1.2, g=PowerDecayG(0.08, -0.02, 0.4), n_spins=3),
    ],
    ids=["constant", "power-decay", "power-growth"],
)
def test_gamma_derivatives_match_finite_differences(schedule, rng):
    ts = rng.uniform(0.5, 40.0, size=25)
    h = 1e-3
    for t in ts:
        d1 = fd1(schedule.gamma, t, h)
        d2 = fd2(schedule.gamma, t, h)
        assert schedule.gamma_prime(t) == pytest.approx(d1, rel=1e-6, abs=1e-12)
        assert schedule.gamma_double_prime(t) == pytest.approx(d2, rel=1e-5, abs=1e-10)


def test_tabulated_g_matches_finite_differences():
    # Stencils stay inside one polynomial piece: mid-cell points, small h.
    knots = np.linspace(0.0, 100.0, 41)
    g_samples = 0.1 + 0.02 * np.exp(-knots / 30.0)
    s = Schedule(delta=0.05, c=1.0, g=TabulatedG(tuple(knots), tuple(g_samples)), n_spins=2)
    mids = (knots[:-1] + knots[1:]) / 2.0
    for t in mids[::5]:
        h = 0.02
        assert s.gamma_prime(t) == pytest.approx(fd1(s.gamma, t, h), rel=1e-7)
        assert s.gamma_double_prime(t) == pytest.approx(fd2(s.gamma, t, h), rel=1e-5)


# --------------------------------------------------------------------------- m


def test_compute_m_frozen_values():
    # c = 1, l = 1: sup log(u)/u over u >= 1 is 1/e at u = e.
    assert compute_m(const_schedule(c=1.0), 1.0) == pytest.approx(
        0.36787944117144233, abs=1e-16
    )
    # c = e^2 > e^(1/l): decreasing tail, sup at u = c: 2/e^2.
    assert compute_m(const_schedule(c=math.e**2), 1.0) == pytest.approx(
        0.2706705664732254, abs=1e-15
    )
    # c = 1/2 < 1: |log c|/c^l = log(2)*2^2 = 4 log 2 beats interior peak 1/(2e).
    assert compute_m(const_schedule(c=0.5), 2.0) == pytest.approx(
        2.772588722239781, rel=1e-15
    )


def test_compute_m_delta_zero_is_pointwise():
    s = const_schedule(delta=0.0, c=3.0)
    assert compute_m(s, 0.5) == pytest.approx(math.log(3.0) / math.sqrt(3.0), rel=1e-15)


@given(
    c=st.floats(0.3, 20.0),
    l_const=st.floats(0.1, 2.0),
    t=st.floats(0.0, 1e5),
)
def test_compute_m_dominates_grid(c, l_const, t):
    s = const_schedule(delta=0.2, c=c)
    m = compute_m(s, l_const)
    u = 0.2 * t + c
    assert abs(math.log(u)) / u**l_const <= m * (1 + 1e-12)


# ----------------------------------------------------------------- certify


def test_certify_constant_g_passes():
    cert = certify(const_schedule(g0=0.125, n=2))
    assert cert.passed
    assert cert.L == pytest.approx(0.125, abs=0.0)
    assert cert.g_min == pytest.approx(0.125, abs=0.0)
    assert cert.c_prime == 0.0
    assert cert.c_double_prime == 0.0
    assert all(cert.checks.values())
    assert cert.reason is None and cert.offending_t is None


def test_certify_boundary_exponent_fails_strictly():
    n = 3
    cert = certify(const_schedule(g0=1.0 / (3 * n - 2), n=n))
    assert not cert.passed
    assert not cert.checks["L_strict"]
    assert "strict" in cert.reason


def test_certify_power_decay_auto_constants_are_exact():
    # With l matching l_exp the required c' is exactly g1*l_exp.
    g = PowerDecayG(0.06, 0.03, 0.5)
    s = Schedule(delta=0.1, c=1.5, g=g, n_spins=3)
    cert = certify(s, l=0.5)
    assert cert.passed
    assert cert.c_prime == pytest.approx(0.03 * 0.5, rel=1e-10)
    # c'' tracks the grid sup of |g''| u^(1+q) log(u) / delta^2.
    q = (2 * 3 - 1) / (3 * 3 - 2)
    u = np.geomspace(1.5, 0.1 * (10 / 0.1) + 1.5, 4001)
    ratio = 0.03 * 0.5 * 1.5 * u ** (q - 1.5) * np.log(u)
    ratio[np.log(u) <= 0] = 0.0
    assert cert.c_double_prime == pytest.approx(float(ratio.max()), rel=1e-3)


def test_certify_explicit_constants_accept_true_envelope():
    g = PowerDecayG(0.06, 0.03, 0.5)
    s = Schedule(delta=0.1, c=1.5, g=g, n_spins=3)
    cert = certify(s, l=0.5, c_prime=0.016, c_double_prime=1.0)
    assert cert.passed


def test_certify_explicit_constants_report_violation_time():
    # |g'| u^(1+l) / delta = g1*l_exp ~= 0.015, so c' = 0.01 fails immediately.
    g = PowerDecayG(0.06, 0.03, 0.5)
    s = Schedule(delta=0.1, c=1.5, g=g, n_spins=3)
    cert = certify(s, l=0.5, c_prime=0.01)
    assert not cert.passed
    assert not cert.checks["deriv1_envelope"]
    assert cert.offending_t is not None
    assert "first-derivative" in cert.reason


def test_certify_growing_envelope_constant_fails():
    # l much smaller than l_exp: required c' grows like u^(l_exp - l) without
    # bound, so the grid maximum proves nothing and certification must fail.
    g = PowerDecayG(0.06, 0.03, 0.2)
    s = Schedule(delta=0.1, c=1.5, g=g, n_spins=3)
    cert = certify(s, l=0.6)
    assert not cert.passed
    assert "still growing" in cert.reason


def test_certify_negative_g_reports_time():
    g = PowerDecayG(0.1, -0.5, 1.0)
    s = Schedule(delta=0.1, c=1.0, g=g, n_spins=2)
    cert = certify(s)
    assert not cert.passed
    assert not cert.checks["g_positive"]
    assert cert.offending_t == pytest.approx(0.0, abs=1e-9)


def test_certify_increasing_gamma_fails():
    # Tabulated g drops fast enough that Gamma = u^(-g) increases for a while.
    g = TabulatedG((0.0, 5.0, 10.0, 15.0, 20.0), (0.2, 0.2, 0.05, 0.05, 0.05))
    s = Schedule(delta=1.0, c=2.0, g=g, n_spins=2)
    assert s.gamma(10.0) > s.gamma(5.0)
    cert = certify(s, horizon=20.0)
    assert not cert.passed
    assert not cert.checks["gamma_decreasing"]


def test_certify_delta_zero_fails_with_reason():
    cert = certify(const_schedule(delta=0.0, g0=0.1), horizon=100.0)
    assert not cert.passed
    assert not cert.checks["delta_positive"]
    assert "delta" in cert.reason


def test_certify_horizon_default_requires_delta():
    with pytest.raises(ValidationError):
        certify(const_schedule(delta=0.0), horizon=None)


def test_certificate_json_round_trip(tmp_path):
    cert = certify(const_schedule(g0=0.125))
    path = tmp_path / "cert.json"
    path.write_text(json.dumps(cert.to_json()))
    back = ConditionCertificate.from_json(json.loads(path.read_text()))
    assert back.passed == cert.passed
    assert back.L == cert.L
    assert back.m == cert.m
    assert back.checks == cert.checks


def test_certificate_passes_for_all_small_sizes():
    for n in range(1, 13):
        cert = certify(Schedule(delta=1e-3, c=2.0, g=ConstantG(1.0 / (4 * n)), n_spins=n))
        assert cert.passed, f"n={n}: {cert.reason}"


# ------------------------------------------------------------------ validation


def test_schedule_rejects_bad_parameters():
    with pytest.raises(ValidationError):
        Schedule(delta=-0.1, c=1.0, g=ConstantG(0.1), n_spins=2)
    with pytest.raises(ValidationError):
        Schedule(delta=0.1, c=0.0, g=ConstantG(0.1), n_spins=2)
    with pytest.raises(ValidationError):
        Schedule(delta=0.1, c=1.0, g=ConstantG(0.1), n_spins=0)
    with pytest.raises(ValidationError):
        ConstantG(0.0)
    with pytest.raises(ValidationError):
        PowerDecayG(0.0, 0.1, 0.5)
    with pytest.raises(ValidationError):
        PowerDecayG(0.1, 0.1, -0.5)


def test_tabulated_g_validation():
    with pytest.raises(ValidationError):
        TabulatedG((0.0, 1.0, 2.0), (0.1, 0.1, 0.1))  # too few samples
    with pytest.raises(ValidationError):
        TabulatedG((1.0, 2.0, 3.0, 4.0), (0.1,) * 4)  # must start at 0
    with pytest.raises(ValidationError):
        TabulatedG((0.0, 2.0, 1.0, 4.0), (0.1,) * 4)  # not increasing
    with pytest.raises(ValidationError):
        TabulatedG((0.0, 1.0, 2.0, 3.0), (0.1, 0.1, -0.2, 0.1))  # negative g
    g = TabulatedG((0.0, 1.0, 2.0, 3.0), (0.1, 0.1, 0.1, 0.1))
    s = Schedule(delta=1.0, c=1.0, g=g, n_spins=2)
    with pytest.raises(ValidationError):
        s.gamma(5.0)  # beyond tabulated range


def test_g_function_json_round_trip():
    for g in (
        ConstantG(0.2),
        PowerDecayG(0.1, 0.05, 0.5),
        TabulatedG((0.0, 1.0, 2.0, 3.0), (0.1, 0.12, 0.11, 0.1)),
    ):
        back = g_function_from_json(g.to_json())
        assert type(back) is type(g)
        assert back.to_json() == g.to_json()
    with pytest.raises(ValidationError):
        g_function_from_json({"kind": "mystery"})


def test_schedule_json_round_trip():
    s = Schedule(delta=0.1, c=1.5, g=PowerDecayG(0.1, 0.02, 0.5), n_spins=4)
    back = Schedule.from_json(s.to_json())
    assert back == s
    assert back.gamma(7.0) == s.gamma(7.0)
