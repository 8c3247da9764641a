"""Self-check suite run by ``composite-loop check``."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import design, loop, su2

__all__ = ["CheckResult", "run_checks", "CHECKS", "random_cayley_klein", "random_schedule"]

SIX_PULSE_GATE_PHASES = (0.0, math.pi / 2, 0.0, 5 * math.pi / 4, 7 * math.pi / 4, 5 * math.pi / 4)
TEN_PULSE_GATE_PHASES = tuple(
    k * math.pi / 12 for k in (0, 10, 4, 10, 0, 15, 25, 19, 25, 15)
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


def random_cayley_klein(rng: np.random.Generator) -> su2.CayleyKlein:
    v = rng.normal(size=4)
    v /= np.linalg.norm(v)
    return su2.CayleyKlein(complex(v[0], v[1]), complex(v[2], v[3]))


def random_schedule(rng: np.random.Generator, max_segments: int = 10) -> loop.LoopSchedule:
    n = int(rng.integers(1, max_segments + 1))
    return loop.LoopSchedule(
        omega0=float(rng.uniform(0, 2 * math.pi)),
        omega3=float(rng.uniform(-2, 2)),
        phases=tuple(rng.uniform(0, 2 * math.pi, size=n)),
    )


def _hermitian_error(h: np.ndarray) -> float:
    return float(np.abs(h - h.conj().T).max())


def check_su2_unitarity(rng, **_) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(500):
        seq = [random_cayley_klein(rng) for _ in range(int(rng.integers(1, 21)))]
        worst = max(worst, su2.compose(seq).norm_error)
    return worst < 1e-12, f"max | |a|^2+|b|^2-1 | = {worst:.1e} (tol 1e-12)"


def check_lift_unitarity(rng, **_) -> tuple[bool, str]:
    worst = max(su2.carroll_hioe_lift(random_cayley_klein(rng)).unitarity_error() for _ in range(1000))
    return worst < 1e-12, f"max |U U^+ - I| = {worst:.1e} (tol 1e-12)"


def check_lift_homomorphism(rng, **_) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(1000):
        u1, u2 = random_cayley_klein(rng), random_cayley_klein(rng)
        lhs = su2.carroll_hioe_lift(su2.compose([u1, u2])).u
        rhs = su2.carroll_hioe_lift(u2).u @ su2.carroll_hioe_lift(u1).u
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst < 1e-10, f"max elementwise deviation {worst:.1e} over 1000 pairs (tol 1e-10)"


def check_commutators(**_) -> tuple[bool, str]:
    j = (loop.J1, loop.J2, loop.J3)
    worst = 0.0
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        comm = j[a] @ j[b] - j[b] @ j[a]
        worst = max(worst, float(np.abs(comm - 1j * j[c]).max()))
    return worst == 0.0, f"max |[Ja,Jb] - i Jc| = {worst:.1e} (exact)"


def check_hermiticity(rng, **_) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(200):
        z = rng.normal(size=6)
        params = loop.LoopHamiltonian(
            complex(z[0], z[1]), complex(z[2], z[3]), complex(z[4], z[5]),
            float(rng.normal()), float(rng.normal()),
        )
        worst = max(worst, _hermitian_error(loop.assemble_general_hamiltonian(params)))
        w = rng.normal(size=3)
        worst = max(worst, _hermitian_error(loop.carroll_hioe_hamiltonian(*w)))
    return worst < 1e-14, f"max |H - H^+| = {worst:.1e} (tol 1e-14)"


def check_norm(rng, steps_per_segment: int = loop.DEFAULT_STEPS, **_) -> tuple[bool, str]:
    exact_worst = integ_worst = 0.0
    for _ in range(20):
        sched = random_schedule(rng)
        psi = rng.normal(size=3) + 1j * rng.normal(size=3)
        psi /= np.linalg.norm(psi)
        _, final = loop.exact_propagate(sched, psi)
        exact_worst = max(exact_worst, abs(np.linalg.norm(final) - 1))
    for _ in range(3):
        trace = loop.integrate(random_schedule(rng), 1, steps_per_segment)
        integ_worst = max(integ_worst, float(np.abs(trace.populations.sum(axis=1) - 1).max()))
    ok = exact_worst < 1e-12 and integ_worst < 1e-8
    return ok, f"exact {exact_worst:.1e} (tol 1e-12), RK4 {integ_worst:.1e} (tol 1e-8)"


def check_reduction(rng, **_) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(100):
        sched = random_schedule(rng)
        u3, _ = loop.exact_propagate(sched)
        eff = su2.compose(su2.segment_propagator(s) for s in loop.effective_sequence(sched))
        worst = max(worst, float(np.abs(u3.u - su2.carroll_hioe_lift(eff).u).max()))
    return worst < 1e-10, f"max |U3 - lift(U2)| = {worst:.1e} over 100 schedules (tol 1e-10)"


def check_phase_gate(**_) -> tuple[bool, str]:
    # reference lists for universal N=3, 5 at beta = pi/2
    expected = {3: SIX_PULSE_GATE_PHASES, 5: TEN_PULSE_GATE_PHASES}
    worst_list = 0.0
    for n, ref in expected.items():
        got = design.phase_gate_sequence(design.universal_phases(n), design.GateSpec(math.pi / 2))
        if len(got) != len(ref):
            return False, f"universal N={n} gate has {len(got)} pulses, expected {len(ref)}"
        worst_list = max(worst_list, max(abs(g - r) for g, r in zip(got.phases, ref)))
    worst_gate = 0.0
    bases = [design.universal_phases(n) for n in sorted(design.UNIVERSAL_TABLE)]
    bases += [design.broadband_phases(n) for n in (1, 3, 5, 7)]
    for base in bases:
        for beta in (0.0, math.pi / 4, math.pi / 2, math.pi):
            sched = design.phase_gate_sequence(base, design.GateSpec(beta))
            u = design.build_sequence(sched, math.pi).propagator()
            arg_err = abs(np.angle(u.a / u.a.conjugate() * np.exp(-1j * beta)))
            worst_gate = max(worst_gate, abs(u.b), abs(abs(u.a) - 1), arg_err)
    ok = worst_list < 1e-12 and worst_gate < 1e-10
    return ok, f"reference phase lists {worst_list:.1e}, gate error {worst_gate:.1e} (tol 1e-10)"


def check_tables(**_) -> tuple[bool, str]:
    for n in range(1, 16, 2):
        s = design.broadband_phases(n)
        if s.phases != s.phases[::-1] or s.phases[0] != 0.0:
            return False, f"broadband N={n} breaks symmetry"
    areas = np.linspace(0.8, 1.2, 81) * math.pi
    worst = 0.0
    for n in (3, 5, 7):
        prof = design.excitation_profile(design.broadband_phases(n), areas)
        worst = max(worst, float(np.abs(prof - (1 - np.cos(areas / 2) ** (2 * n))).max()))
    return worst < 1e-2, f"broadband profile vs 1-cos^2N(A/2): {worst:.1e} (tol 1e-2)"


def check_flatness(**_) -> tuple[bool, str]:
    worst = max(max(design.flatness_order(design.broadband_phases(n), 4)) for n in (3, 5))
    return worst < 1e-6, f"max |d^k |U11|^2 / dA^k|, k<=4 at A=pi: {worst:.1e} (tol 1e-6)"


def check_integrator(steps_per_segment: int = loop.DEFAULT_STEPS, **_) -> tuple[bool, str]:
    sched = loop.LoopSchedule(3.0, 1.0, SIX_PULSE_GATE_PHASES)
    _, exact = loop.exact_propagate(sched, 1)
    try:
        coarse = loop.integrate(sched, 1, steps_per_segment).amplitudes[-1]
        fine = loop.integrate(sched, 1, 2 * steps_per_segment).amplitudes[-1]
    except (ValueError, loop.IntegrationError) as exc:
        return False, f"{exc}; increase --steps-per-segment"
    err_c = float(np.abs(coarse - exact).max())
    err_f = float(np.abs(fine - exact).max())
    ratio = err_c / err_f if err_f > 0 else math.inf
    ok = err_c < 1e-7 and 12.0 <= ratio <= 20.0
    detail = f"error {err_c:.1e} (tol 1e-7), halving ratio {ratio:.2f} (want 16 +- 4)"
    if not ok:
        detail += "; increase --steps-per-segment"
    return ok, detail


CHECKS: dict[str, Callable[..., tuple[bool, str]]] = {
    "su2 unitarity closure": check_su2_unitarity,
    "lift unitarity": check_lift_unitarity,
    "lift homomorphism": check_lift_homomorphism,
    "J commutators": check_commutators,
    "hamiltonian hermiticity": check_hermiticity,
    "norm conservation": check_norm,
    "carroll-hioe reduction": check_reduction,
    "phase gate": check_phase_gate,
    "broadband tables and profile": check_tables,
    "broadband flatness": check_flatness,
    "integrator convergence": check_integrator,
}


def run_checks(steps_per_segment: int = loop.DEFAULT_STEPS, seed: int = 0) -> list[CheckResult]:
    results = []
    for name, fn in CHECKS.items():
        rng = np.random.default_rng(seed)
        start = time.perf_counter()
        try:
            ok, detail = fn(rng=rng, steps_per_segment=steps_per_segment)
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail, time.perf_counter() - start))
    return results
