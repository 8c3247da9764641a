"""Robustness scans over (omega0, omega3) and CSV/JSON serialization."""
from __future__ import annotations

import contextlib
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .design import GateSpec, broadband_phases, custom_phases, phase_gate_sequence, universal_phases
from .loop import TimeTrace, p3_grid

__all__ = [
    "ScanConfig",
    "ScanResult",
    "resolve_phases",
    "run_scan",
    "write_scan_csv",
    "read_scan_csv",
    "write_trace_csv",
    "read_trace_csv",
    "write_json",
    "HIGH_FIDELITY",
]

HIGH_FIDELITY = 0.99
CSV_FMT = ".17g"


def resolve_phases(
    kind: str = "universal",
    n_pulses: int = 3,
    beta: float | None = math.pi / 2,
    segments: int = 6,
    phases: Sequence[float] | None = None,
) -> tuple[float, ...]:
    """Per-segment loop phases for a named drive.

    ``constant`` gives ``segments`` zero phases. ``broadband``/``universal``
    use the tabulated sequence of ``n_pulses``; ``custom`` uses ``phases``.
    A non-None ``beta`` doubles the sequence into the phase gate of that angle.
    """
    if kind == "constant":
        if segments < 1:
            raise ValueError(f"segments must be >= 1, got {segments!r}")
        return (0.0,) * segments
    if kind == "broadband":
        base = broadband_phases(n_pulses)
    elif kind == "universal":
        base = universal_phases(n_pulses)
    elif kind == "custom":
        if not phases:
            raise ValueError("custom drive needs an explicit phase list")
        base = custom_phases(phases)
    else:
        raise ValueError(f"unknown drive kind {kind!r}")
    if beta is None:
        return base.phases
    return phase_gate_sequence(base, GateSpec(beta)).phases


@dataclass(frozen=True)
class ScanConfig:
    omega0_range: tuple[float, float, int] = (0.0, 2 * math.pi, 101)
    omega3_range: tuple[float, float, int] = (0.0, 2.0, 101)
    kind: str = "universal"
    n_pulses: int = 3
    beta: float | None = math.pi / 2
    segments: int = 6
    phases: tuple[float, ...] | None = None
    segment_duration: float = 1.0
    output_path: str | None = None

    def __post_init__(self) -> None:
        for name in ("omega0_range", "omega3_range"):
            lo, hi, count = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
                raise ValueError(f"{name} needs finite min < max, got ({lo}, {hi})")
            if int(count) != count or count < 2:
                raise ValueError(f"{name} needs at least 2 points, got {count}")
            object.__setattr__(self, name, (float(lo), float(hi), int(count)))
        if self.omega0_range[0] < 0:
            raise ValueError("omega0 must be >= 0")
        if self.phases is not None:
            object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))

    def schedule_phases(self) -> tuple[float, ...]:
        return resolve_phases(self.kind, self.n_pulses, self.beta, self.segments, self.phases)

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linspace(*self.omega0_range), np.linspace(*self.omega3_range)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ScanResult:
    omega0: np.ndarray
    omega3: np.ndarray
    p3: np.ndarray  # shape (len(omega0), len(omega3))
    config: ScanConfig | None = field(default=None, compare=False)

    def rows(self):
        """Row-major (omega0, omega3, p3) triples, omega0 outermost."""
        for i, w0 in enumerate(self.omega0):
            for j, w3 in enumerate(self.omega3):
                yield float(w0), float(w3), float(self.p3[i, j])

    def fraction_above(self, threshold: float = HIGH_FIDELITY) -> float:
        return float((self.p3 > threshold).mean())


def run_scan(config: ScanConfig, workers: int | None = None) -> ScanResult:
    """Evaluate final P3 on the config grid.

    Rows of the omega0 axis are independent; they are handed to a thread
    pool and reassembled in axis order, so output does not depend on
    scheduling.
    """
    omega0, omega3 = config.axes()
    phases = config.schedule_phases()
    workers = workers or min(8, os.cpu_count() or 1)
    chunks = [c for c in np.array_split(omega0, workers) if len(c)]

    def work(chunk: np.ndarray) -> np.ndarray:
        return p3_grid(chunk, omega3, phases, config.segment_duration)

    if len(chunks) == 1:
        parts = [work(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(work, chunks))
    p3 = np.clip(np.concatenate(parts, axis=0), 0.0, 1.0)
    return ScanResult(omega0, omega3, p3, config)


def _fmt(x: float) -> str:
    return format(float(x), CSV_FMT)


@contextlib.contextmanager
def _output(target):
    """Yield a text stream for ``target``: a path, an open stream, or None for stdout."""
    if target is None:
        yield sys.stdout
    elif hasattr(target, "write"):
        yield target
    else:
        with Path(target).open("w", newline="") as fh:
            yield fh


def write_scan_csv(result: ScanResult, path=None) -> None:
    with _output(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["omega0", "omega3", "p3"])
        for row in result.rows():
            writer.writerow([_fmt(v) for v in row])


def read_scan_csv(path: str | os.PathLike) -> ScanResult:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        rows = [(float(r["omega0"]), float(r["omega3"]), float(r["p3"])) for r in reader]
    omega0 = np.array(sorted({r[0] for r in rows}))
    omega3 = np.array(sorted({r[1] for r in rows}))
    p3 = np.array([r[2] for r in rows]).reshape(len(omega0), len(omega3))
    return ScanResult(omega0, omega3, p3)


def write_trace_csv(trace: TimeTrace, path=None) -> None:
    with _output(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "P1", "P2", "P3"])
        for t, pops in zip(trace.times, trace.populations):
            writer.writerow([_fmt(t)] + [_fmt(p) for p in pops])


def read_trace_csv(path: str | os.PathLike) -> TimeTrace:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        rows = [[float(r[k]) for k in ("t", "P1", "P2", "P3")] for r in reader]
    data = np.array(rows)
    return TimeTrace(data[:, 0], data[:, 1:])


def write_json(payload: dict, path=None) -> None:
    with _output(path) as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def scan_payload(result: ScanResult) -> dict:
    return {
        "columns": ["omega0", "omega3", "p3"],
        "rows": [list(r) for r in result.rows()],
        "config": result.config.as_dict() if result.config else None,
    }


def trace_payload(trace: TimeTrace, config: dict) -> dict:
    return {
        "columns": ["t", "P1", "P2", "P3"],
        "rows": [[float(t), *map(float, p)] for t, p in zip(trace.times, trace.populations)],
        "config": config,
    }
