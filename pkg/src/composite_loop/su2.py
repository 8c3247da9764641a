"""Two-level propagator algebra in Cayley-Klein form and the lift to the loop.

A two-level propagator is stored as the pair ``(a, b)`` of

    U = [[a,   b ],
         [-b*, a*]]

with ``|a|^2 + |b|^2 = 1``. Pulses carry a phase that multiplies ``b``;
``compose`` takes propagators in the order they are applied.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "CayleyKlein",
    "Propagator3",
    "PulseSegment",
    "resonant_propagator",
    "segment_propagator",
    "compose",
    "transition_probability",
    "carroll_hioe_lift",
    "loop_populations",
]

UNITARITY_TOL = 1e-10


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not cmath.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class CayleyKlein:
    a: complex
    b: complex

    def __post_init__(self) -> None:
        _require_finite(a=self.a, b=self.b)
        norm = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(norm - 1.0) > UNITARITY_TOL:
            raise ValueError(f"|a|^2 + |b|^2 = {norm!r}, expected 1")

    @classmethod
    def identity(cls) -> CayleyKlein:
        return cls(1.0 + 0j, 0j)

    @classmethod
    def from_matrix(cls, u: np.ndarray) -> CayleyKlein:
        """Read ``(a, b)`` off the first row of an SU(2) matrix."""
        u = np.asarray(u, dtype=complex)
        if u.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {u.shape}")
        return cls(complex(u[0, 0]), complex(u[0, 1]))

    def matrix(self) -> np.ndarray:
        a, b = self.a, self.b
        return np.array([[a, b], [-b.conjugate(), a.conjugate()]], dtype=complex)

    def then(self, later: CayleyKlein) -> CayleyKlein:
        """Propagator of ``self`` followed by ``later`` (``later @ self``)."""
        a1, b1 = self.a, self.b
        a2, b2 = later.a, later.b
        return CayleyKlein(
            a2 * a1 - b2 * b1.conjugate(),
            a2 * b1 + b2 * a1.conjugate(),
        )

    @property
    def norm_error(self) -> float:
        return abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0)


@dataclass(frozen=True)
class Propagator3:
    """3x3 loop propagator."""

    u: np.ndarray

    def __post_init__(self) -> None:
        u = np.asarray(self.u, dtype=complex)
        if u.shape != (3, 3):
            raise ValueError(f"expected a 3x3 matrix, got shape {u.shape}")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    def unitarity_error(self) -> float:
        return float(np.abs(self.u @ self.u.conj().T - np.eye(3)).max())

    def apply(self, state: Sequence[complex]) -> np.ndarray:
        return self.u @ np.asarray(state, dtype=complex)

    def __matmul__(self, other: Propagator3) -> Propagator3:
        return Propagator3(self.u @ other.u)


@dataclass(frozen=True)
class PulseSegment:
    """Constant drive over one interval.

    ``rabi`` and ``detuning`` are angular frequencies, ``phase`` in radians.
    """

    rabi: float
    phase: float = 0.0
    detuning: float = 0.0
    duration: float = 1.0

    def __post_init__(self) -> None:
        _require_finite(
            rabi=self.rabi, phase=self.phase, detuning=self.detuning, duration=self.duration
        )
        if self.rabi < 0:
            raise ValueError(f"rabi must be >= 0, got {self.rabi!r}")
        if self.duration < 0:
            raise ValueError(f"duration must be >= 0, got {self.duration!r}")

    @property
    def area(self) -> float:
        return self.rabi * self.duration


def resonant_propagator(area: float, phase: float = 0.0) -> CayleyKlein:
    """Resonant pulse of the given area with its coupling phase-shifted by ``phase``."""
    _require_finite(area=area, phase=phase)
    half = 0.5 * area
    return CayleyKlein(complex(math.cos(half)), -1j * math.sin(half) * cmath.exp(1j * phase))


def segment_propagator(seg: PulseSegment) -> CayleyKlein:
    """Exact propagator of H = 1/2 [[-D, W e^{ip}], [W e^{-ip}, D]] held for ``seg.duration``."""
    omega_eff = math.hypot(seg.rabi, seg.detuning)
    if omega_eff == 0.0:
        return CayleyKlein.identity()
    theta = 0.5 * omega_eff * seg.duration
    s = math.sin(theta)
    a = complex(math.cos(theta), seg.detuning / omega_eff * s)
    b = -1j * (seg.rabi / omega_eff) * s * cmath.exp(1j * seg.phase)
    return CayleyKlein(a, b)


def compose(sequence: Iterable[CayleyKlein]) -> CayleyKlein:
    """Total propagator of ``sequence``, first element applied first."""
    it = iter(sequence)
    try:
        total = next(it)
    except StopIteration:
        raise ValueError("compose needs at least one propagator") from None
    for u in it:
        total = total.then(u)
    return total


def transition_probability(u: CayleyKlein) -> float:
    return abs(u.b) ** 2


def carroll_hioe_lift(u: CayleyKlein) -> Propagator3:
    """Map an effective two-level propagator onto the three-state loop.

    The map is the spin-1 image of ``u``; it is a group homomorphism, so
    lifting a composed sequence equals composing the lifted pieces.
    """
    a, b = u.a, u.b
    ac, bc = a.conjugate(), b.conjugate()
    a2, b2, ac2, bc2 = a * a, b * b, ac * ac, bc * bc
    m = np.array(
        [
            [0.5 * (a2 + b2 + ac2 + bc2), a * b - ac * bc, 0.5j * (b2 - a2 + ac2 - bc2)],
            [b * ac - a * bc, abs(a) ** 2 - abs(b) ** 2, 1j * (b * ac + a * bc)],
            [0.5j * (a2 + b2 - ac2 - bc2), 1j * (a * b + ac * bc), 0.5 * (a2 - b2 + ac2 - bc2)],
        ],
        dtype=complex,
    )
    return Propagator3(m)


def loop_populations(u3: Propagator3, initial: int = 1) -> tuple[float, float, float]:
    """Final populations ``(P1, P2, P3)`` when starting in state ``initial`` (1-based)."""
    if initial not in (1, 2, 3):
        raise ValueError(f"initial state index must be 1, 2 or 3, got {initial!r}")
    column = np.abs(u3.u[:, initial - 1]) ** 2
    return float(column[0]), float(column[1]), float(column[2])
