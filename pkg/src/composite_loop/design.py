"""Composite pulse phase schedules and their excitation profiles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .su2 import CayleyKlein, PulseSegment, compose, segment_propagator

__all__ = [
    "PhaseSchedule",
    "CompositeSequence",
    "GateSpec",
    "UNIVERSAL_TABLE",
    "broadband_phases",
    "universal_phases",
    "custom_phases",
    "build_sequence",
    "phase_gate_sequence",
    "excitation_profile",
    "flatness_order",
    "u11_at",
]

KINDS = ("broadband", "universal", "custom")

# N -> (numerators, denominator); phases are numerator * pi / denominator.
UNIVERSAL_TABLE: dict[int, tuple[tuple[int, ...], int]] = {
    3: ((0, 1, 0), 2),
    5: ((0, 5, 2, 5, 0), 6),
    7: ((0, 11, 10, 17, 10, 11, 0), 12),
    13: ((0, 9, 42, 11, 8, 37, 2, 37, 8, 11, 42, 9, 0), 24),
}


@dataclass(frozen=True)
class PhaseSchedule:
    """Per-pulse phases of a composite sequence.

    ``pi_multiples`` holds the exact phases in units of pi when they are
    known as rationals; ``phases`` is always the float view in radians.
    """

    phases: tuple[float, ...]
    kind: str = "custom"
    pi_multiples: tuple[Fraction, ...] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        phases = tuple(float(p) for p in self.phases)
        object.__setattr__(self, "phases", phases)
        if not phases:
            raise ValueError("a phase schedule needs at least one pulse")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not all(math.isfinite(p) for p in phases):
            raise ValueError("phases must be finite")
        if self.pi_multiples is not None and len(self.pi_multiples) != len(phases):
            raise ValueError("pi_multiples and phases differ in length")
        if self.kind != "custom":
            if phases != phases[::-1]:
                raise ValueError(f"{self.kind} schedule must be time-reversal symmetric")
            if phases[0] != 0.0:
                raise ValueError(f"{self.kind} schedule must start and end with phase 0")

    @classmethod
    def from_pi_multiples(cls, multiples: Iterable[Fraction | int], kind: str = "custom") -> PhaseSchedule:
        fracs = tuple(Fraction(m) for m in multiples)
        return cls(tuple(float(f) * math.pi for f in fracs), kind, fracs)

    @property
    def n_pulses(self) -> int:
        return len(self.phases)

    def __len__(self) -> int:
        return len(self.phases)

    def wrapped(self) -> tuple[float, ...]:
        """Phases reduced to [0, 2pi)."""
        return tuple(p % (2 * math.pi) for p in self.phases)

    def in_units(self, denominator: int) -> tuple[Fraction, ...] | None:
        """Exact phases as multiples of ``pi / denominator``, if known."""
        if self.pi_multiples is None:
            return None
        return tuple(m * denominator for m in self.pi_multiples)


@dataclass(frozen=True)
class CompositeSequence:
    segments: tuple[PulseSegment, ...]
    label: str = ""

    def propagator(self) -> CayleyKlein:
        return compose(segment_propagator(s) for s in self.segments)

    def __len__(self) -> int:
        return len(self.segments)


@dataclass(frozen=True)
class GateSpec:
    """Phase gate diag(e^{i beta/2}, e^{-i beta/2})."""

    beta: float
    beta_over_pi: Fraction | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not math.isfinite(self.beta):
            raise ValueError(f"beta must be finite, got {self.beta!r}")

    @classmethod
    def from_pi_multiple(cls, multiple: Fraction | int | str) -> GateSpec:
        frac = Fraction(multiple)
        return cls(float(frac) * math.pi, frac)


def _broadband_multiple(n: int, k: int) -> Fraction:
    return Fraction((n + 1 - 2 * ((k + 1) // 2)) * (k // 2), n)


@lru_cache(maxsize=None)
def broadband_phases(n: int) -> PhaseSchedule:
    """Broadband sequence of ``n`` equal pulses (``n`` odd).

    phi_k = (N + 1 - 2 floor((k+1)/2)) floor(k/2) pi / N, for which the
    transition probability is 1 - cos^{2N}(A/2).
    """
    if isinstance(n, bool) or not isinstance(n, int) or n < 1 or n % 2 == 0:
        raise ValueError(f"broadband sequences need an odd positive pulse count, got {n!r}")
    return PhaseSchedule.from_pi_multiples(
        (_broadband_multiple(n, k) for k in range(1, n + 1)), kind="broadband"
    )


def universal_phases(n: int) -> PhaseSchedule:
    if n not in UNIVERSAL_TABLE:
        supported = ", ".join(str(k) for k in sorted(UNIVERSAL_TABLE))
        raise ValueError(f"no universal sequence for N={n!r}; supported: {{{supported}}}")
    numerators, denominator = UNIVERSAL_TABLE[n]
    return PhaseSchedule.from_pi_multiples(
        (Fraction(k, denominator) for k in numerators), kind="universal"
    )


def custom_phases(phases: Sequence[float]) -> PhaseSchedule:
    return PhaseSchedule(tuple(phases), "custom")


def build_sequence(
    schedule: PhaseSchedule,
    area_per_pulse: float,
    detuning: float = 0.0,
    duration_per_pulse: float = 1.0,
) -> CompositeSequence:
    if not duration_per_pulse > 0:
        raise ValueError(f"duration_per_pulse must be positive, got {duration_per_pulse!r}")
    if area_per_pulse < 0:
        raise ValueError(f"area_per_pulse must be >= 0, got {area_per_pulse!r}")
    rabi = area_per_pulse / duration_per_pulse
    segments = tuple(
        PulseSegment(rabi=rabi, phase=p, detuning=detuning, duration=duration_per_pulse)
        for p in schedule.phases
    )
    return CompositeSequence(segments, label=f"{schedule.kind}-{schedule.n_pulses}")


def phase_gate_sequence(base: PhaseSchedule, gate: GateSpec) -> PhaseSchedule:
    """Two copies of ``base``, the second shifted by pi + beta/2.

    With every pulse of area pi this composes to the phase gate of ``gate``.
    """
    shift = math.pi + 0.5 * gate.beta
    phases = base.phases + tuple(p + shift for p in base.phases)
    multiples = None
    if base.pi_multiples is not None and gate.beta_over_pi is not None:
        shift_m = 1 + gate.beta_over_pi / 2
        multiples = base.pi_multiples + tuple(m + shift_m for m in base.pi_multiples)
    return PhaseSchedule(phases, "custom", multiples)


def u11_at(schedule: PhaseSchedule, area: float, detuning: float = 0.0) -> complex:
    return build_sequence(schedule, area, detuning).propagator().a


def excitation_profile(
    schedule: PhaseSchedule, areas: Iterable[float], detuning: float = 0.0
) -> np.ndarray:
    """Transition probability of the composed sequence at each pulse area."""
    return np.array(
        [1.0 - abs(u11_at(schedule, float(area), detuning)) ** 2 for area in areas]
    )


def _central_weights(order: int, accuracy: int = 4) -> tuple[np.ndarray, np.ndarray]:
    half = (order + 1) // 2 - 1 + accuracy // 2
    offsets = np.arange(-half, half + 1)
    vander = np.vander(offsets, increasing=True).T.astype(float)
    rhs = np.zeros(len(offsets))
    rhs[order] = math.factorial(order)
    return offsets, np.linalg.solve(vander, rhs)


def flatness_order(schedule: PhaseSchedule, max_order: int = 4, h: float = 1e-2) -> list[float]:
    """Magnitudes of d^k |U11|^2 / dA^k at A = pi for k = 1..max_order.

    Central differences accurate to O(h^4). |U11|^2 = 1 - P is used rather
    than |U11|, which has a kink at A = pi whenever U11 vanishes there.
    """
    if not 1 <= max_order <= 4:
        raise ValueError(f"max_order must be in 1..4, got {max_order!r}")
    cache: dict[int, float] = {}

    def infidelity(offset: int) -> float:
        if offset not in cache:
            cache[offset] = abs(u11_at(schedule, math.pi + offset * h)) ** 2
        return cache[offset]

    out = []
    for k in range(1, max_order + 1):
        offsets, weights = _central_weights(k)
        value = sum(w * infidelity(int(o)) for o, w in zip(offsets, weights)) / h**k
        out.append(abs(float(value)))
    return out
