"""Interpolation-parameter clock: s(t), t_tilde, and the induced field."""

import json
import math

import mpmath
import numpy as np
import pytest
import scipy.integrate

from annealbound import (
    ConstantG,
    RationalFromSchedule,
    ReparamMap,
    Schedule,
    TabulatedS,
    TanhS,
    ValidationError,
    build_reparam_map,
    gamma_of_ttilde,
    s_asymptotic,
    s_from_schedule,
    s_function_from_json,
    t_tilde,
)


def _sched(g0=0.125, delta=0.0, c=1.0, n=1):
    return Schedule(delta=delta, c=c, g=ConstantG(g0), n_spins=n)


# ----------------------------------------------------------------- tanh clock


def test_tanh_clock_closed_form_values():
    s = TanhS()
    # int_0^t tanh = log cosh t; at t=2 that is 1.3250027473578645
    assert t_tilde(s, 2.0) == pytest.approx(float(mpmath.log(mpmath.cosh(2))), abs=1e-14)
    assert t_tilde(s, 2.0) == pytest.approx(1.3250027473578645, abs=1e-15)
    # large t: log cosh t -> t - log 2 with exponentially small remainder
    assert t_tilde(s, 25.0) == pytest.approx(25.0 - math.log(2.0), abs=1e-8)
    assert t_tilde(s, 0.0) == 0.0


def test_tanh_clock_is_overflow_safe():
    val = t_tilde(TanhS(), 1e6)
    assert val == pytest.approx(1e6 - math.log(2.0), rel=1e-15)


def test_tanh_induced_field():
    s = TanhS()
    # (1 - tanh 1)/tanh 1
    assert gamma_of_ttilde(s, 1.0) == pytest.approx(0.31303528549933127, abs=1e-14)
    assert gamma_of_ttilde(s, 0.0 + math.atanh(0.5)) == pytest.approx(1.0, abs=1e-12)


def test_tanh_start_time():
    s = TanhS()
    assert s.start_time(0.1) == pytest.approx(math.atanh(0.1), rel=1e-15)
    with pytest.raises(ValidationError):
        s.start_time(1.0)


def test_gamma_of_ttilde_before_start():
    s = TanhS()
    with pytest.raises(ValidationError, match="not started"):
        gamma_of_ttilde(s, 0.0)


# -------------------------------------------------------- schedule-matching s


def test_s_from_schedule_frozen_values():
    # t_tilde = 1: s = 1/(1 + 1) regardless of g
    assert s_from_schedule(_sched(0.125), 1.0) == pytest.approx(0.5, abs=1e-15)
    # g = 0.125, t_tilde = 16: 16^(-1/8) = 1/sqrt(2), s = 1/(1 + 2^(-1/2))
    assert s_from_schedule(_sched(0.125), 16.0) == pytest.approx(
        0.5857864376269049, abs=1e-15
    )


def test_s_round_trip_reproduces_power_law():
    sch = _sched(0.125)
    for tt in (1.0, 16.0, 1e3, 1e6):
        s_fn = lambda t: s_from_schedule(sch, t)

        class _Wrap:
            __call__ = staticmethod(s_fn)

        gamma = gamma_of_ttilde(_Wrap(), tt)
        assert gamma == pytest.approx(tt ** -0.125, rel=1e-10)


def test_s_asymptotic_remainder_bound():
    sch = _sched(0.2)
    for tt in (2.0, 10.0, 1e3, 1e7):
        exact = s_from_schedule(sch, tt)
        approx = s_asymptotic(sch, tt)
        assert abs(exact - approx) <= tt ** (-2 * 0.2)


def test_s_from_schedule_validation():
    with pytest.raises(ValidationError):
        s_from_schedule(_sched(), 0.0)
    with pytest.raises(ValidationError):
        s_from_schedule(_sched(), 1.0, prefactor=-1.0)


# --------------------------------------------------------------- other shapes


def test_rational_from_schedule_integrates_correctly():
    sch = Schedule(delta=0.1, c=1.0, g=ConstantG(0.2), n_spins=1)
    s_fn = RationalFromSchedule(sch)
    for t in (1.0, 8.0, 40.0):
        ref, _ = scipy.integrate.quad(
            lambda x: 1.0 / (1.0 + sch.gamma(x)), 0.0, t, epsabs=1e-13, epsrel=1e-13
        )
        assert t_tilde(s_fn, t) == pytest.approx(ref, rel=1e-10)


def test_tabulated_s_monotone_interpolation():
    times = np.linspace(0.0, 10.0, 21)
    values = np.tanh(times / 3.0)
    s_fn = TabulatedS(tuple(times), tuple(values))
    dense = np.linspace(0.0, 10.0, 500)
    out = np.array([s_fn(t) for t in dense])
    assert np.all(np.diff(out) >= -1e-15)
    assert np.all((out >= 0.0) & (out <= 1.0))
    assert s_fn(3.0) == pytest.approx(math.tanh(1.0), abs=1e-4)


def test_tabulated_s_validation():
    with pytest.raises(ValidationError):
        TabulatedS((0.0,), (0.0,))
    with pytest.raises(ValidationError):
        TabulatedS((1.0, 2.0), (0.1, 0.2))  # must start at t = 0
    with pytest.raises(ValidationError):
        TabulatedS((0.0, 1.0, 2.0), (0.5, 0.4, 0.6))  # not nondecreasing
    with pytest.raises(ValidationError):
        TabulatedS((0.0, 1.0), (0.0, 1.5))  # above 1


def test_s_function_json_round_trip():
    sch = Schedule(delta=0.1, c=1.0, g=ConstantG(0.2), n_spins=1)
    for s_fn in (
        TanhS(),
        RationalFromSchedule(sch),
        TabulatedS((0.0, 1.0, 2.0), (0.0, 0.4, 0.7)),
    ):
        back = s_function_from_json(s_fn.to_json())
        assert type(back) is type(s_fn)
        for t in (0.0, 0.7, 1.9):
            assert float(back(t)) == pytest.approx(float(s_fn(t)), rel=1e-12)
    with pytest.raises(ValidationError):
        s_function_from_json({"kind": "unknown"})


# ----------------------------------------------------------------------- maps


def test_reparam_map_tanh_exact():
    grid = np.linspace(0.0, 12.0, 49)
    mp = build_reparam_map(TanhS(), grid)
    expect = np.logaddexp(grid, -grid) - math.log(2.0)
    assert np.allclose(mp.t_tilde_values, expect, rtol=1e-12, atol=1e-12)
    # interpolated inverses agree on the sampled range
    for tt in (0.5, 3.0, 9.0):
        t = mp.t_of_ttilde(tt)
        assert mp.ttilde_of_t(t) == pytest.approx(tt, rel=1e-6)


def test_reparam_map_quadrature_path():
    sch = Schedule(delta=0.1, c=1.0, g=ConstantG(0.2), n_spins=1)
    s_fn = RationalFromSchedule(sch)
    grid = np.linspace(0.0, 30.0, 31)
    mp = build_reparam_map(s_fn, grid)
    ref, _ = scipy.integrate.quad(
        lambda x: 1.0 / (1.0 + sch.gamma(x)), 0.0, 30.0, epsabs=1e-13, epsrel=1e-13
    )
    assert mp.t_tilde_values[-1] == pytest.approx(ref, rel=1e-9)
    assert mp.t_tilde_values[0] == 0.0
    assert np.all(np.diff(mp.t_tilde_values) > 0)


def test_reparam_map_validation():
    with pytest.raises(ValidationError):
        ReparamMap(
            times=np.array([0.0, 1.0]),
            s_values=np.array([0.5, 0.6]),
            t_tilde_values=np.array([0.1, 0.2]),  # must start at 0
        )
    with pytest.raises(ValidationError):
        ReparamMap(
            times=np.array([0.0, 1.0, 2.0]),
            s_values=np.array([0.5, 0.6, 0.7]),
            t_tilde_values=np.array([0.0, 0.5, 0.5]),  # flat where s > 0
        )


def test_reparam_map_csv_and_json(tmp_path):
    grid = np.linspace(0.0, 5.0, 11)
    mp = build_reparam_map(TanhS(), grid)
    path = tmp_path / "map.csv"
    mp.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "t,s,t_tilde,gamma"
    assert len(lines) == 12
    # s(0) = 0 so gamma diverges there; recorded as inf
    assert lines[1].split(",")[3] == "inf"
    blob = json.dumps(mp.to_json())
    assert "t_tilde" in blob
