"""Three-state loop dynamics.

Units: hbar = 1, frequencies in rad per unit time. A schedule is a train of
constant segments; between segments the drives jump. Two propagation routes
are provided and are kept independent of each other:

* ``integrate``: fixed-step classical RK4, steps aligned to segment edges.
* ``exact_propagate``: per-segment exp(-i H t) by Hermitian eigendecomposition.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .su2 import Propagator3, PulseSegment

__all__ = [
    "J1",
    "J2",
    "J3",
    "IntegrationError",
    "LoopHamiltonian",
    "LoopSchedule",
    "PiecewiseDrive",
    "TimeTrace",
    "assemble_general_hamiltonian",
    "carroll_hioe_hamiltonian",
    "effective_two_level",
    "loop_couplings",
    "effective_sequence",
    "basis_state",
    "integrate",
    "integrate_piecewise",
    "exact_propagate",
    "propagate_piecewise",
    "expm_hermitian",
    "final_p3",
    "p3_grid",
]

J1 = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)
J2 = np.array([[0, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=complex)
J3 = np.array([[0, 0, -1j], [0, 0, 0], [1j, 0, 0]], dtype=complex)

DEFAULT_STEPS = 200
MIN_STEPS = 16
NORM_DRIFT_LIMIT = 1e-6


class IntegrationError(RuntimeError):
    """Raised when the fixed-step integrator loses too much norm."""


@dataclass(frozen=True)
class LoopHamiltonian:
    omega12: complex = 0j
    omega23: complex = 0j
    omega13: complex = 0j
    delta12: float = 0.0
    delta23: float = 0.0

    def matrix(self) -> np.ndarray:
        return assemble_general_hamiltonian(self)


def assemble_general_hamiltonian(params: LoopHamiltonian) -> np.ndarray:
    """RWA loop Hamiltonian with hbar = 1 (the overall 1/2 is kept)."""
    o12, o23, o13 = complex(params.omega12), complex(params.omega23), complex(params.omega13)
    h = np.array(
        [
            [0.0, o12, o13.conjugate()],
            [o12.conjugate(), 2.0 * params.delta12, o23],
            [o13, o23.conjugate(), 2.0 * params.delta23],
        ],
        dtype=complex,
    )
    return 0.5 * h


def carroll_hioe_hamiltonian(omega1: float, omega2: float, omega3: float) -> np.ndarray:
    """Resonant loop with coupling phases (0, 0, pi/2): (W1 J1 + W2 J2 + W3 J3) / 2."""
    return 0.5 * (omega1 * J1 + omega2 * J2 + omega3 * J3)


def loop_couplings(omega0: float, phase: float) -> tuple[float, float]:
    """Real loop couplings (Omega1, Omega2) realizing amplitude ``omega0`` at ``phase``."""
    return omega0 * math.cos(phase), omega0 * math.sin(phase)


def effective_two_level(
    omega0: float, phase: float, omega3: float, duration: float = 1.0
) -> PulseSegment:
    """Two-level segment whose Carroll-Hioe lift is the loop segment propagator.

    The loop Hamiltonian (W J)/2 is the spin-1 image of the spin-1/2
    Hamiltonian (W sigma)/4, so in the convention of ``segment_propagator``
    the effective drive has half the Rabi frequency, the opposite phase
    and detuning -omega3/2.
    """
    if omega0 < 0:
        raise ValueError(f"omega0 must be >= 0, got {omega0!r}")
    return PulseSegment(
        rabi=0.5 * omega0, phase=-phase, detuning=-0.5 * omega3, duration=duration
    )


@dataclass(frozen=True)
class PiecewiseDrive:
    """Sampled resonant loop envelope: constant (Omega1, Omega2, Omega3) per interval."""

    omega1: np.ndarray
    omega2: np.ndarray
    omega3: np.ndarray
    durations: np.ndarray

    def __post_init__(self) -> None:
        arrays = [np.atleast_1d(np.asarray(x, dtype=float)) for x in
                  (self.omega1, self.omega2, self.omega3, self.durations)]
        n = len(arrays[3])
        arrays = [np.broadcast_to(x, (n,)).copy() for x in arrays]
        for x in arrays:
            x.setflags(write=False)
        if n == 0:
            raise ValueError("a drive needs at least one interval")
        if not all(np.isfinite(x).all() for x in arrays):
            raise ValueError("drive values must be finite")
        if (arrays[3] <= 0).any():
            raise ValueError("interval durations must be positive")
        for name, x in zip(("omega1", "omega2", "omega3", "durations"), arrays):
            object.__setattr__(self, name, x)

    def __len__(self) -> int:
        return len(self.durations)

    def hamiltonians(self) -> np.ndarray:
        """Stack of per-interval 3x3 Hamiltonians, shape (n, 3, 3)."""
        return 0.5 * (
            self.omega1[:, None, None] * J1
            + self.omega2[:, None, None] * J2
            + self.omega3[:, None, None] * J3
        )

    @property
    def total_time(self) -> float:
        return float(self.durations.sum())


@dataclass(frozen=True)
class LoopSchedule:
    """Rectangular composite drive: amplitude omega0 with phase phi_k on segment k.

    Omega1 = omega0 cos(phi_k), Omega2 = omega0 sin(phi_k), Omega3 constant,
    all switched on for exactly ``n_segments * segment_duration``.
    """

    omega0: float
    omega3: float
    phases: tuple[float, ...]
    segment_duration: float = 1.0

    def __post_init__(self) -> None:
        phases = tuple(float(p) for p in self.phases)
        object.__setattr__(self, "phases", phases)
        if not phases:
            raise ValueError("a schedule needs at least one segment")
        values = (self.omega0, self.omega3, self.segment_duration) + phases
        if not all(math.isfinite(v) for v in values):
            raise ValueError("schedule parameters must be finite")
        if self.omega0 < 0:
            raise ValueError(f"omega0 must be >= 0, got {self.omega0!r}")
        if not self.segment_duration > 0:
            raise ValueError(f"segment_duration must be positive, got {self.segment_duration!r}")

    @classmethod
    def constant(cls, omega0: float, omega3: float, n_segments: int, segment_duration: float = 1.0) -> LoopSchedule:
        return cls(omega0, omega3, (0.0,) * n_segments, segment_duration)

    @property
    def n_segments(self) -> int:
        return len(self.phases)

    @property
    def total_time(self) -> float:
        return self.n_segments * self.segment_duration

    def drive(self) -> PiecewiseDrive:
        phases = np.asarray(self.phases)
        return PiecewiseDrive(
            self.omega0 * np.cos(phases),
            self.omega0 * np.sin(phases),
            np.full(len(phases), float(self.omega3)),
            np.full(len(phases), float(self.segment_duration)),
        )


DriveLike = Union[LoopSchedule, PiecewiseDrive]


def _as_drive(schedule: DriveLike) -> PiecewiseDrive:
    return schedule.drive() if isinstance(schedule, LoopSchedule) else schedule


def effective_sequence(schedule: DriveLike) -> list[PulseSegment]:
    """Effective two-level segments of a resonant loop drive."""
    drive = _as_drive(schedule)
    return [
        effective_two_level(math.hypot(w1, w2), math.atan2(w2, w1), w3, dt)
        for w1, w2, w3, dt in zip(drive.omega1, drive.omega2, drive.omega3, drive.durations)
    ]


@dataclass(frozen=True)
class TimeTrace:
    times: np.ndarray
    populations: np.ndarray
    amplitudes: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final_populations(self) -> tuple[float, float, float]:
        p = self.populations[-1]
        return float(p[0]), float(p[1]), float(p[2])


def basis_state(index: int) -> np.ndarray:
    if index not in (1, 2, 3):
        raise ValueError(f"state index must be 1, 2 or 3, got {index!r}")
    state = np.zeros(3, dtype=complex)
    state[index - 1] = 1.0
    return state


def _normalized_initial(initial: Sequence[complex] | int | None) -> np.ndarray:
    if initial is None:
        return basis_state(1)
    if isinstance(initial, (int, np.integer)):
        return basis_state(int(initial))
    state = np.asarray(initial, dtype=complex).reshape(-1)
    if state.shape != (3,):
        raise ValueError(f"initial state must have 3 amplitudes, got shape {state.shape}")
    if abs(np.vdot(state, state).real - 1.0) > 1e-12:
        raise ValueError("initial state must be normalized")
    return state


def integrate_piecewise(
    hamiltonians: np.ndarray,
    durations: Sequence[float],
    initial: Sequence[complex] | int | None = None,
    steps_per_segment: int = DEFAULT_STEPS,
) -> TimeTrace:
    """RK4 solution of i dc/dt = H_k c over consecutive constant intervals."""
    if steps_per_segment < MIN_STEPS:
        raise ValueError(
            f"steps_per_segment={steps_per_segment} is below the minimum of {MIN_STEPS}"
        )
    hamiltonians = np.asarray(hamiltonians, dtype=complex).reshape(-1, 3, 3)
    durations = np.asarray(durations, dtype=float).reshape(-1)
    if len(hamiltonians) != len(durations):
        raise ValueError("one duration per Hamiltonian is required")
    c = _normalized_initial(initial)

    n_total = len(durations) * steps_per_segment
    times = np.empty(n_total + 1)
    amps = np.empty((n_total + 1, 3), dtype=complex)
    times[0], amps[0] = 0.0, c
    t0, i = 0.0, 0
    for h_mat, duration in zip(hamiltonians, durations):
        gen = -1j * h_mat
        dt = duration / steps_per_segment
        for step in range(1, steps_per_segment + 1):
            k1 = gen @ c
            k2 = gen @ (c + 0.5 * dt * k1)
            k3 = gen @ (c + 0.5 * dt * k2)
            k4 = gen @ (c + dt * k3)
            c = c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            i += 1
            times[i] = t0 + step * dt
            amps[i] = c
        t0 += duration
        times[i] = t0

    drift = abs(np.vdot(c, c).real - 1.0)
    if drift > NORM_DRIFT_LIMIT:
        raise IntegrationError(
            f"norm drifted by {drift:.2e}; increase steps_per_segment (now {steps_per_segment})"
        )
    pops = np.abs(amps) ** 2
    return TimeTrace(times, pops, amps)


def integrate(
    schedule: DriveLike,
    initial: Sequence[complex] | int | None = None,
    steps_per_segment: int = DEFAULT_STEPS,
) -> TimeTrace:
    drive = _as_drive(schedule)
    return integrate_piecewise(drive.hamiltonians(), drive.durations, initial, steps_per_segment)


def expm_hermitian(h: np.ndarray, t: float | np.ndarray) -> np.ndarray:
    """exp(-i H t) for a Hermitian matrix or a stack of them (shape (..., n, n))."""
    evals, evecs = np.linalg.eigh(h)
    t = np.asarray(t, dtype=float)[..., None]
    phases = np.exp(-1j * evals * t)
    return (evecs * phases[..., None, :]) @ np.swapaxes(evecs.conj(), -1, -2)


def propagate_piecewise(hamiltonians: np.ndarray, durations: Sequence[float]) -> Propagator3:
    hamiltonians = np.asarray(hamiltonians, dtype=complex).reshape(-1, 3, 3)
    steps = expm_hermitian(hamiltonians, np.asarray(durations, dtype=float))
    total = np.eye(3, dtype=complex)
    for u in steps:
        total = u @ total
    return Propagator3(total)


def exact_propagate(
    schedule: DriveLike, initial: Sequence[complex] | int | None = None
) -> tuple[Propagator3, np.ndarray]:
    drive = _as_drive(schedule)
    u = propagate_piecewise(drive.hamiltonians(), drive.durations)
    return u, u.apply(_normalized_initial(initial))


def final_p3(schedule: DriveLike) -> float:
    """Population of |3> at the end of the drive, starting from |1>."""
    _, final = exact_propagate(schedule, 1)
    return float(abs(final[2]) ** 2)


def p3_grid(
    omega0: np.ndarray,
    omega3: np.ndarray,
    phases: Sequence[float],
    segment_duration: float = 1.0,
) -> np.ndarray:
    """Final P3 from |1> over the outer grid ``omega0 x omega3``.

    Same per-segment eigendecomposition as ``exact_propagate``, batched over
    grid points. Returns shape (len(omega0), len(omega3)).
    """
    w0, w3 = np.meshgrid(np.asarray(omega0, float), np.asarray(omega3, float), indexing="ij")
    state = np.zeros(w0.shape + (3,), dtype=complex)
    state[..., 0] = 1.0
    for phi in phases:
        h = 0.5 * (
            (w0 * math.cos(phi))[..., None, None] * J1
            + (w0 * math.sin(phi))[..., None, None] * J2
            + w3[..., None, None] * J3
        )
        u = expm_hermitian(h, segment_duration)
        state = np.einsum("...ij,...j->...i", u, state)
    return np.abs(state[..., 2]) ** 2
