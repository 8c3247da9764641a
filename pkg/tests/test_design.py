import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from composite_loop.design import (
    GateSpec,
    PhaseSchedule,
    broadband_phases,
    build_sequence,
    custom_phases,
    excitation_profile,
    flatness_order,
    phase_gate_sequence,
    u11_at,
    universal_phases,
)

# broadband integer rows; the phases are these integers times 2*pi/N
TABLE1 = {
    3: (0, 1, 0),
    5: (0, 2, 1, 2, 0),
    7: (0, 3, 2, 4, 2, 3, 0),
    9: (0, 4, 3, 6, 4, 6, 3, 4, 0),
    11: (0, 5, 4, 8, 6, 9, 6, 8, 4, 5, 0),
    13: (0, 6, 5, 10, 8, 12, 9, 12, 8, 10, 5, 6, 0),
    15: (0, 7, 6, 12, 10, 15, 12, 16, 12, 15, 10, 12, 6, 7, 0),
}
TABLE2 = {
    3: ((0, 1, 0), 2),
    5: ((0, 5, 2, 5, 0), 6),
    7: ((0, 11, 10, 17, 10, 11, 0), 12),
    13: ((0, 9, 42, 11, 8, 37, 2, 37, 8, 11, 42, 9, 0), 24),
}


def direct_u11(area, phases):
    m = np.eye(2, dtype=complex)
    for p in phases:
        c, s = math.cos(area / 2), math.sin(area / 2)
        step = np.array([[c, -1j * s * np.exp(1j * p)], [-1j * s * np.exp(-1j * p), c]])
        m = step @ m
    return m[0, 0]


@pytest.mark.parametrize("n, row", sorted(TABLE1.items()))
def test_broadband_integer_pattern(n, row):
    sched = broadband_phases(n)
    assert sched.kind == "broadband" and sched.n_pulses == n
    assert tuple(m * n / 2 for m in sched.pi_multiples) == tuple(Fraction(r) for r in row)


@pytest.mark.parametrize("n", range(1, 30, 2))
def test_broadband_symmetry_and_anchors(n):
    p = broadband_phases(n).phases
    assert p == p[::-1]
    assert p[0] == 0.0 and p[-1] == 0.0


@pytest.mark.parametrize("n", [0, 2, 4, -3])
def test_broadband_rejects_even_or_nonpositive(n):
    with pytest.raises(ValueError):
        broadband_phases(n)


def test_broadband_small_rows():
    assert broadband_phases(3).phases == pytest.approx((0, 2 * math.pi / 3, 0), abs=1e-15)
    assert broadband_phases(5).phases == pytest.approx(
        (0, 4 * math.pi / 5, 2 * math.pi / 5, 4 * math.pi / 5, 0), abs=1e-15
    )


@pytest.mark.parametrize("n, entry", sorted(TABLE2.items()))
def test_universal_table(n, entry):
    numerators, den = entry
    sched = universal_phases(n)
    assert sched.kind == "universal"
    assert sched.in_units(den) == tuple(Fraction(k) for k in numerators)


@pytest.mark.parametrize("n", [1, 4, 9, 11])
def test_universal_unsupported_lists_choices(n):
    with pytest.raises(ValueError, match=r"\{3, 5, 7, 13\}"):
        universal_phases(n)


def test_schedule_validation():
    with pytest.raises(ValueError):
        PhaseSchedule((0.0, 1.0, 2.0), "broadband")
    with pytest.raises(ValueError):
        PhaseSchedule((1.0, 0.0, 1.0), "universal")
    with pytest.raises(ValueError):
        PhaseSchedule((), "custom")
    with pytest.raises(ValueError):
        PhaseSchedule((0.0,), "adiabatic")
    assert custom_phases([0.3, 1.2]).n_pulses == 2


def test_build_sequence_broadband():
    seq = build_sequence(broadband_phases(3), math.pi, 0.0, 1.0)
    assert len(seq) == 3
    assert all(s.rabi == pytest.approx(math.pi) and s.duration == 1.0 for s in seq.segments)
    assert [s.phase for s in seq.segments] == list(broadband_phases(3).phases)


def test_build_sequence_universal_and_custom():
    seq = build_sequence(universal_phases(3), math.pi)
    assert [s.phase for s in seq.segments] == pytest.approx([0, math.pi / 2, 0])
    single = build_sequence(custom_phases([0.0]), math.pi).propagator()
    assert abs(single.a) < 1e-15


def test_build_sequence_equal_areas():
    seq = build_sequence(universal_phases(13), 2.5, detuning=0.1, duration_per_pulse=0.5)
    assert {s.area for s in seq.segments} == {2.5}


@pytest.mark.parametrize("duration", [0.0, -1.0])
def test_build_sequence_rejects_bad_duration(duration):
    with pytest.raises(ValueError):
        build_sequence(universal_phases(3), math.pi, 0.0, duration)


def test_phase_gate_six_pulse():
    got = phase_gate_sequence(universal_phases(3), GateSpec.from_pi_multiple(Fraction(1, 2)))
    assert got.pi_multiples == tuple(Fraction(k, 4) for k in (0, 2, 0, 5, 7, 5))
    assert got.phases == pytest.approx(
        (0, math.pi / 2, 0, 5 * math.pi / 4, 7 * math.pi / 4, 5 * math.pi / 4), abs=1e-15
    )


def test_phase_gate_ten_pulse():
    got = phase_gate_sequence(universal_phases(5), GateSpec.from_pi_multiple("1/2"))
    assert got.pi_multiples == tuple(
        Fraction(k, 12) for k in (0, 10, 4, 10, 0, 15, 25, 19, 25, 15)
    )


def test_phase_gate_wrapped_view():
    got = phase_gate_sequence(universal_phases(5), GateSpec(math.pi / 2))
    assert max(got.wrapped()) < 2 * math.pi
    assert got.wrapped()[6] == pytest.approx(math.pi / 12)  # 25pi/12


def test_phase_gate_single_pulse_beta_zero():
    sched = phase_gate_sequence(custom_phases([0.0]), GateSpec(0.0))
    assert sched.phases == pytest.approx((0.0, math.pi))
    u = build_sequence(sched, math.pi).propagator()
    assert u.a == pytest.approx(1.0, abs=1e-15) and abs(u.b) < 1e-15


@pytest.mark.parametrize("beta", [0.0, math.pi / 4, math.pi / 2, math.pi])
@pytest.mark.parametrize(
    "base",
    [universal_phases(3), universal_phases(5), universal_phases(7), universal_phases(13),
     broadband_phases(3), broadband_phases(9)],
    ids=["U3", "U5", "U7", "U13", "B3", "B9"],
)
def test_phase_gate_correctness(base, beta):
    u = build_sequence(phase_gate_sequence(base, GateSpec(beta)), math.pi).propagator()
    assert abs(abs(u.a) - 1) < 1e-10
    assert abs(u.b) < 1e-10
    assert abs(np.angle(u.a / u.a.conjugate() * np.exp(-1j * beta))) < 1e-10


def test_excitation_profile_endpoints():
    assert excitation_profile(broadband_phases(3), [math.pi])[0] == pytest.approx(1.0, abs=1e-15)
    for sched in (broadband_phases(7), universal_phases(13), custom_phases([0.4, 2.0])):
        assert excitation_profile(sched, [0.0])[0] == pytest.approx(0.0, abs=1e-15)


def test_excitation_profile_n5_frozen_oracle():
    # direct numpy 2x2 product with the N=5 phases, frozen
    value = excitation_profile(broadband_phases(5), [0.9 * math.pi])[0]
    assert value == pytest.approx(0.9999999912234385, abs=1e-14)
    assert abs(value - (1 - math.cos(0.45 * math.pi) ** 10)) < 1e-3


@given(area=st.floats(0, 2 * math.pi), n=st.sampled_from([1, 3, 5, 7, 9, 11]))
def test_profile_matches_direct_product(area, n):
    sched = broadband_phases(n)
    assert u11_at(sched, area) == pytest.approx(direct_u11(area, sched.phases), abs=1e-13)


@pytest.mark.parametrize("n", [3, 5, 7])
def test_profile_formula(n):
    areas = np.linspace(0.8, 1.2, 401) * math.pi
    prof = excitation_profile(broadband_phases(n), areas)
    assert np.abs(prof - (1 - np.cos(areas / 2) ** (2 * n))).max() < 1e-12


@pytest.mark.parametrize("n", [3, 5])
def test_flatness_orders_vanish(n):
    assert max(flatness_order(broadband_phases(n), 4)) < 1e-6


def test_flatness_single_pulse_second_order():
    # d^2/dA^2 cos^2(A/2) = -cos(A)/2 -> 1/2 at A = pi
    d = flatness_order(custom_phases([0.0]), 4)
    assert d[0] < 1e-10
    assert d[1] == pytest.approx(0.5, abs=1e-6)


def test_flatness_order_bounds():
    with pytest.raises(ValueError):
        flatness_order(broadband_phases(3), 5)
    assert len(flatness_order(broadband_phases(3), 2)) == 2


@pytest.mark.parametrize("n", [3, 5, 7, 9])
def test_flatness_scaling(n):
    sched = broadband_phases(n)
    c = [abs(u11_at(sched, math.pi + e)) / e**n for e in (0.05, 0.1)]
    assert 0.5 <= c[0] / c[1] <= 2.0
