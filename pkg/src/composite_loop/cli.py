"""Command-line front end.

    composite-loop design   --kind universal --n-pulses 3 --beta pi/2
    composite-loop simulate --omega0 3 --omega3 1 --out trace.csv
    composite-loop scan     --grid 101x101 --out scan.csv
    composite-loop check

Frequencies are in units of 1/T (T = segment duration). Settings come from
built-in defaults, then ``--config`` (flat TOML), then explicit flags.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from fractions import Fraction
from functools import reduce
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import checks, design, loop, scan

log = logging.getLogger("composite_loop")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

DEFAULTS: dict[str, Any] = {
    "kind": "universal",
    "n_pulses": 3,
    "beta": "pi/2",
    "phases": None,
    "segments": 6,
    "omega0": 3.0,
    "omega3": 1.0,
    "initial": 1,
    "steps_per_segment": loop.DEFAULT_STEPS,
    "grid": "101x101",
    "omega0_range": "0:2pi",
    "omega3_range": "0:2",
    "workers": None,
    "out": None,
    "format": "csv",
    "seed": 0,
}


class UsageError(ValueError):
    pass


def parse_angle(text: Any) -> tuple[float, Fraction | None]:
    """Parse ``1.2`` (radians), ``0.5pi``, ``3pi/4``, ``pi/2`` or ``-π``.

    Returns the value in radians and, for pi-expressions, the exact multiple of pi.
    """
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text), None
    s = str(text).strip().lower().replace("π", "pi").replace(" ", "").replace("*", "")
    if "pi" not in s:
        try:
            return float(s), None
        except ValueError:
            raise UsageError(f"cannot parse angle {text!r}") from None
    head, _, tail = s.partition("pi")
    try:
        coef = Fraction(-1 if head == "-" else 1 if head in ("", "+") else Fraction(head))
        if tail:
            if not tail.startswith("/"):
                raise ValueError
            coef /= Fraction(tail[1:])
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse angle {text!r}") from None
    return float(coef) * math.pi, coef


def parse_range(text: Any) -> tuple[float, float]:
    if isinstance(text, (list, tuple)) and len(text) == 2:
        parts = list(text)
    else:
        parts = str(text).split(":")
    if len(parts) != 2:
        raise UsageError(f"range must look like MIN:MAX, got {text!r}")
    return parse_angle(parts[0])[0], parse_angle(parts[1])[0]


def parse_grid(text: Any) -> tuple[int, int]:
    parts = str(text).lower().split("x")
    try:
        counts = [int(p) for p in parts]
    except ValueError:
        raise UsageError(f"grid must look like N or N0xN3, got {text!r}") from None
    if len(counts) == 1:
        counts *= 2
    if len(counts) != 2:
        raise UsageError(f"grid must look like N or N0xN3, got {text!r}")
    return counts[0], counts[1]


def parse_beta(value: Any) -> tuple[float | None, Fraction | None]:
    if value is None or str(value).lower() in ("none", "off", ""):
        return None, None
    return parse_angle(value)


def parse_phases(value: Any) -> tuple[float, ...] | None:
    if value is None:
        return None
    items = value if isinstance(value, (list, tuple)) else str(value).split(",")
    return tuple(parse_angle(item)[0] for item in items if str(item).strip())


def load_config(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError:
        raise
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"invalid config file {path}: {exc}") from None
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise UsageError(f"unknown config keys in {path}: {', '.join(sorted(unknown))}")
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise UsageError(f"config must be flat key = value pairs; got tables {nested}")
    return data


def settings(args: argparse.Namespace) -> dict[str, Any]:
    merged = dict(DEFAULTS)
    merged.update(load_config(args.config))
    merged.update({k: v for k, v in vars(args).items() if v is not None and k in DEFAULTS})
    return merged


def _pi_fraction(m: Fraction) -> str:
    if m == 0:
        return "0"
    num, den = m.numerator, m.denominator
    head = "π" if num == 1 else "-π" if num == -1 else f"{num}π"
    return head if den == 1 else f"{head}/{den}"


def _lcm(values) -> int:
    return reduce(lambda x, y: x * y // math.gcd(x, y), values, 1)


def design_report(kind: str, n: int, beta_text: Any) -> dict[str, Any]:
    if kind == "broadband":
        base = design.broadband_phases(n)
    elif kind == "universal":
        base = design.universal_phases(n)
    else:
        raise UsageError(f"design supports kinds broadband and universal, got {kind!r}")
    beta, beta_frac = parse_beta(beta_text)
    sched = base
    if beta is not None:
        sched = design.phase_gate_sequence(base, design.GateSpec(beta, beta_frac))
    report: dict[str, Any] = {
        "kind": kind,
        "n_pulses": n,
        "beta": beta,
        "phases_rad": list(sched.phases),
    }
    multiples = sched.pi_multiples
    if multiples is not None:
        if kind == "broadband" and beta is None:
            unit_label, in_units = f"2π/{n}", [m * n / 2 for m in multiples]
        else:
            den = _lcm(m.denominator for m in multiples)
            unit_label, in_units = f"π/{den}", [m * den for m in multiples]
        report["pi_multiples"] = [str(m) for m in multiples]
        report["pretty"] = "(" + ", ".join(_pi_fraction(m) for m in multiples) + ")"
        report["unit"] = unit_label
        report["in_units"] = [int(x) if x.denominator == 1 else str(x) for x in in_units]
    return report


def _format_design(report: dict[str, Any]) -> str:
    lines = [f"kind={report['kind']} N={report['n_pulses']} beta={report['beta']!r} "
             f"pulses={len(report['phases_rad'])}"]
    if "pretty" in report:
        lines.append(f"phases: {report['pretty']}")
        units = ", ".join(str(x) for x in report["in_units"])
        lines.append(f"in units of {report['unit']}: ({units})")
    lines.append("radians: " + ", ".join(format(p, ".17g") for p in report["phases_rad"]))
    return "\n".join(lines) + "\n"


def _emit_text(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_design(args: argparse.Namespace) -> int:
    cfg = settings(args)
    kind = args.kind_pos or cfg["kind"]
    n = args.n_pos if args.n_pos is not None else int(cfg["n_pulses"])
    # no phase-gate doubling unless asked for, unlike simulate/scan
    beta = args.beta if args.beta is not None else load_config(args.config).get("beta")
    report = design_report(kind, n, beta)
    if cfg["format"] == "json":
        scan.write_json(report, cfg["out"])
    else:
        _emit_text(_format_design(report), cfg["out"])
    return EXIT_OK


def _drive_phases(cfg: dict[str, Any]) -> tuple[float, ...]:
    beta, _ = parse_beta(cfg["beta"])
    return scan.resolve_phases(
        cfg["kind"], int(cfg["n_pulses"]), beta, int(cfg["segments"]), parse_phases(cfg["phases"])
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = settings(args)
    phases = _drive_phases(cfg)
    sched = loop.LoopSchedule(float(cfg["omega0"]), float(cfg["omega3"]), phases)
    trace = loop.integrate(sched, int(cfg["initial"]), int(cfg["steps_per_segment"]))
    p_final = trace.final_populations
    log.info("final populations P1=%.12f P2=%.12f P3=%.12f", *p_final)
    if cfg["format"] == "json":
        echo = {k: cfg[k] for k in ("kind", "n_pulses", "beta", "segments", "omega0",
                                    "omega3", "initial", "steps_per_segment")}
        echo["phases"] = list(phases)
        scan.write_json(scan.trace_payload(trace, echo), cfg["out"])
    else:
        scan.write_trace_csv(trace, cfg["out"])
    return EXIT_OK


def scan_config(cfg: dict[str, Any]) -> scan.ScanConfig:
    n0, n3 = parse_grid(cfg["grid"])
    lo0, hi0 = parse_range(cfg["omega0_range"])
    lo3, hi3 = parse_range(cfg["omega3_range"])
    beta, _ = parse_beta(cfg["beta"])
    return scan.ScanConfig(
        omega0_range=(lo0, hi0, n0),
        omega3_range=(lo3, hi3, n3),
        kind=cfg["kind"],
        n_pulses=int(cfg["n_pulses"]),
        beta=beta,
        segments=int(cfg["segments"]),
        phases=parse_phases(cfg["phases"]),
        output_path=cfg["out"],
    )


def cmd_scan(args: argparse.Namespace) -> int:
    cfg = settings(args)
    config = scan_config(cfg)
    workers = int(cfg["workers"]) if cfg["workers"] else None
    result = scan.run_scan(config, workers)
    log.info("fraction of grid with P3 > %.2f: %.6f", scan.HIGH_FIDELITY, result.fraction_above())
    if cfg["format"] == "json":
        scan.write_json(scan.scan_payload(result), cfg["out"])
    else:
        scan.write_scan_csv(result, cfg["out"])
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    cfg = settings(args)
    results = checks.run_checks(int(cfg["steps_per_segment"]), int(cfg["seed"]))
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_NUMERIC if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="composite-loop",
        description="Composite pulses for robust transfer in a three-state loop.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat TOML file with default settings")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))

    drive = argparse.ArgumentParser(add_help=False)
    drive.add_argument("--kind", choices=("constant", "broadband", "universal", "custom"))
    drive.add_argument("--n-pulses", type=int, help="pulses in the base composite sequence")
    drive.add_argument("--beta", help="phase-gate angle, e.g. pi/2 or 1.57; 'none' disables doubling")
    drive.add_argument("--phases", help="comma-separated phases for --kind custom")
    drive.add_argument("--segments", type=int, help="segment count for --kind constant")

    p = sub.add_parser("design", parents=[common], help="print a phase table")
    p.add_argument("kind_pos", nargs="?", choices=("broadband", "universal"), metavar="KIND")
    p.add_argument("n_pos", nargs="?", type=int, metavar="N")
    p.add_argument("--kind", choices=("broadband", "universal"))
    p.add_argument("--n-pulses", type=int)
    p.add_argument("--beta", help="emit the doubled phase-gate schedule for this angle")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", parents=[common, drive], help="time trace of one drive")
    p.add_argument("--omega0", type=float, help="drive amplitude in 1/T")
    p.add_argument("--omega3", type=float, help="direct 1-3 coupling in 1/T")
    p.add_argument("--initial", type=int, choices=(1, 2, 3))
    p.add_argument("--steps-per-segment", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scan", parents=[common, drive], help="final P3 over an (omega0, omega3) grid")
    p.add_argument("--grid", help="N or N0xN3 (default 101x101)")
    p.add_argument("--omega0-range", help="MIN:MAX in 1/T (default 0:2pi)")
    p.add_argument("--omega3-range", help="MIN:MAX in 1/T (default 0:2)")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("check", help="run the invariant suite")
    p.add_argument("--config")
    p.add_argument("--steps-per-segment", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (loop.IntegrationError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc.filename or ''} {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
