import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinhop.device import (
    BinaryState,
    DeviceParams,
    DwMtjState,
    ParameterError,
    Role,
    binary_state,
    conductance_at,
    dw_velocity,
    mobility_k,
    mtj_conductance,
    step_position,
)

P = DeviceParams()
NM = 1e-9


def test_mobility_matches_hand_evaluation():
    # g*P*mu_B = 2.1*0.7*9.274e-24 = 1.363278e-23 ; 2*A*Msat*e = 2*50e-18*8e5*1.602e-19 = 1.2816e-29
    assert mobility_k(P) == pytest.approx(1.363278e-23 / 1.2816e-29, rel=1e-12)
    assert mobility_k(P) == pytest.approx(1.0637e6, rel=1e-4)


def test_mobility_scaling():
    assert mobility_k(P.with_(cross_section_A=100e-18)) == pytest.approx(mobility_k(P) / 2, rel=1e-15)
    assert mobility_k(P.with_(polarization_P=0.0)) == 0.0


@pytest.mark.parametrize(
    "field, value",
    [("cross_section_A", 0.0), ("msat", -1.0), ("electron_charge", 0.0), ("r_parallel", 0.0),
     ("r_antiparallel", 400.0), ("mtj_width", 120e-9), ("mtj_placement", 0.05)],
)  # fmt: skip
def test_invalid_params_rejected(field, value):
    with pytest.raises(ParameterError):
        P.with_(**{field: value})


def test_velocity_examples():
    assert dw_velocity(0.0, mobility_k(P), P.leak_axon) == -5.0
    assert dw_velocity(4.0e-5, 1.0637e6, 0.2) == pytest.approx(42.748, abs=1e-3)
    assert dw_velocity(0.0, 1.0637e6, 0.0) == 0.0


@given(st.floats(-1e-3, 1e-3), st.floats(-1e-3, 1e-3))
def test_velocity_is_linear_in_current(a, b):
    k = mobility_k(P)
    assert dw_velocity(a + b, k, 0.0) == pytest.approx(dw_velocity(a, k, 0.0) + dw_velocity(b, k, 0.0), abs=1e-9)


def test_step_position_examples():
    s = DwMtjState(50 * NM, Role.SOMA, 0.2)
    assert step_position(s, 10.0, 1e-12, P).position == pytest.approx(50.01 * NM, rel=1e-12)
    s0 = DwMtjState(0.0, Role.AXON, -5.0)
    assert step_position(s0, -5.0, 1e-9, P).position == 0.0
    s1 = DwMtjState(99.9 * NM, Role.SOMA, 0.2)
    assert step_position(s1, 42.75, 1e-9, P).position == P.track_length_Len
    with pytest.raises(ParameterError):
        step_position(s, 1.0, 0.0, P)


@settings(max_examples=200)
@given(st.floats(0, 100e-9), st.lists(st.floats(-200.0, 200.0), min_size=1, max_size=60))
def test_position_stays_on_track(start, velocities):
    s = DwMtjState(start, Role.SOMA, 0.2)
    for v in velocities:
        s = step_position(s, v, 1e-10, P)
        assert 0.0 <= s.position <= P.track_length_Len


def test_pinning_has_no_overshoot_memory():
    s = DwMtjState(P.track_length_Len, Role.SOMA, 0.2)
    s = step_position(s, 1000.0, 1e-9, P)
    s = step_position(s, -10.0, 1e-10, P)
    assert s.position == pytest.approx(P.track_length_Len - 1e-9)


def test_conductance_endpoints_and_centre():
    lo, hi = P.window
    assert conductance_at(0.0, P) == 1 / 2000
    assert conductance_at(lo, P) == 1 / 2000
    assert conductance_at(hi, P) == 1 / 500
    assert conductance_at(P.track_length_Len, P) == 1 / 500
    assert conductance_at(P.window_centre, P) == pytest.approx(1.25e-3, rel=1e-15)
    assert 1 / conductance_at(P.window_centre, P) == pytest.approx(800.0)


def test_conductance_monotone_and_bounded():
    x = np.linspace(0, P.track_length_Len, 10001)
    g = conductance_at(x, P)
    assert np.all(np.diff(g) >= 0)
    assert g.min() >= 1 / 2000 and g.max() <= 1 / 500


def test_mtj_conductance_matches_array_form():
    s = DwMtjState.fresh(Role.AXON, P, position=45e-9)
    assert mtj_conductance(s, P) == conductance_at(45e-9, P)
    assert s.leak == -5.0
    assert DwMtjState.fresh("soma", P).leak == 0.2


def test_binary_state():
    lo, hi = P.window
    assert binary_state(DwMtjState(hi + 1e-12, Role.SOMA, 0.2), P) is BinaryState.ON
    assert binary_state(DwMtjState(lo - 1e-12, Role.SOMA, 0.2), P) is BinaryState.OFF
    assert binary_state(DwMtjState(P.window_centre, Role.SOMA, 0.2), P) is BinaryState.TRANSIT
    assert binary_state(DwMtjState.fresh(Role.SOMA, P), P) is BinaryState.OFF


@pytest.mark.parametrize("role, end, leak_time", [(Role.AXON, 0.0, 100e-9 / 5.0), (Role.SOMA, 100e-9, 100e-9 / 0.2)])
def test_leak_relaxes_to_preferred_end(role, end, leak_time):
    s = DwMtjState.fresh(role, P, position=0.0 if role is Role.SOMA else P.track_length_Len)
    dt = leak_time / 1000
    for _ in range(1001):
        s = step_position(s, dw_velocity(0.0, mobility_k(P), s.leak), dt, P)
    assert s.position == end
