"""Experiment harness and command-line entry point.

Subcommands
    connect   sample one curve between two frames read from files
    figure1   distance of both quasi-geodesics to an exact reference geodesic
    table1    relative length deviation of both curve families over a p-range
    bench     wall-clock of the three cost regimes (p x p, 2p x 2p, n x n)

Reports are CSV (default) or JSON.  CSV output is locale-independent:
'.' decimals, 17-significant-digit floats, LF line endings, a header row
naming every column, and a leading '# config:' comment embedding the
full configuration and seed.  Timing data never enters CSV rows, so a
rerun with the same seed is byte-identical; JSON reports carry timings
under their own key.

Exit codes: 0 success, 2 parse/validation failure, 3 numerical failure.
On failure the error class name is printed as a single token on the
first line of stderr.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import statistics
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import (
    DimensionError,
    NumericalError,
    ParseError,
    ValidationError,
    ValueOutOfRange,
)
from .oracle import (
    ShootingConfig,
    riemannian_dist,
    stiefel_log_shooting,
    tangent_completion_form,
    full_qg_eval,
)
from .quasigeo import (
    econ_qg_connect,
    econ_qg_eval,
    econ_qg_length,
    short_qg_connect,
    short_qg_eval,
    short_qg_length,
)
from .stiefel import (
    StiefelPoint,
    TangentVector,
    make_point,
    random_point,
    random_tangent,
    read_matrix_file,
    stiefel_exp,
    write_matrix_file,
)

DESK_N, DESK_P = 40, 8
PAPER_N, PAPER_P = 200, 30
DEFAULT_SEED = 20260809
DEFAULT_TRIALS = 20
DEFAULT_SAMPLES = 51

_MASK64 = (1 << 64) - 1


def derive_seed(base: int, *parts: int) -> int:
    """Stable 64-bit sub-seed from a base seed and integer labels (splitmix64)."""

    def mix(z: int) -> int:
        z = (z + 0x9E3779B97F4A7C15) & _MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    state = mix(base & _MASK64)
    for part in parts:
        state = mix(state ^ (part & _MASK64))
    return state


def parse_distances(raw: str) -> tuple[float, ...]:
    """Comma list of radians; a 'pi' suffix scales by pi ('0.5pi', 'pi')."""
    out = []
    for token in raw.split(","):
        token = token.strip().lower()
        if not token:
            continue
        factor = 1.0
        if token.endswith("pi"):
            token = token[:-2].rstrip("*").strip()
            factor = math.pi
            if not token:
                token = "1"
        try:
            out.append(float(token) * factor)
        except ValueError as exc:
            raise ParseError(f"cannot parse distance {raw!r}") from exc
    if not out:
        raise ParseError("empty distance list")
    if any(d <= 0.0 for d in out):
        raise ParseError("distances must be positive")
    return tuple(out)


def parse_p_range(raw: str) -> tuple[int, ...]:
    """'A:B:step' inclusive, or a single integer."""
    try:
        if ":" in raw:
            lo, hi, step = (int(x) for x in raw.split(":"))
            if step < 1 or hi < lo or lo < 1:
                raise ValueError
            return tuple(range(lo, hi + 1, step))
        value = int(raw)
        if value < 1:
            raise ValueError
        return (value,)
    except ValueError as exc:
        raise ParseError(f"cannot parse p-range {raw!r} (want A:B:step)") from exc


def constructed_pair(
    n: int, p: int, distance: float, seed: int
) -> tuple[StiefelPoint, TangentVector, StiefelPoint]:
    """Pair (U, Exp_U(Delta)) with ||Delta|| = distance: the connecting
    geodesic t -> Exp_U(t Delta) is known exactly by construction."""
    U = random_point(n, p, derive_seed(seed, 0))
    delta = random_tangent(U, distance, derive_seed(seed, 1))
    return U, delta, stiefel_exp(U, delta, 1.0)


# --------------------------------------------------------------------------
# report plumbing


@dataclass
class ExperimentReport:
    command: str
    config: dict
    columns: list[str]
    rows: list[list]
    timings: dict = field(default_factory=dict)
    version: str = __version__

    def config_line(self) -> str:
        blob = json.dumps(
            {"command": self.command, "config": self.config, "version": self.version},
            sort_keys=True,
        )
        return f"# config: {blob}"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def report_to_csv(report: ExperimentReport) -> str:
    lines = [report.config_line(), ",".join(report.columns)]
    lines.extend(",".join(_fmt(v) for v in row) for row in report.rows)
    return "\n".join(lines) + "\n"


def report_to_json(report: ExperimentReport) -> str:
    payload = {
        "command": report.command,
        "config": report.config,
        "columns": report.columns,
        "rows": report.rows,
        "timings": report.timings,
        "version": report.version,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def write_report(report: ExperimentReport, out: str | None, fmt: str) -> None:
    text = report_to_json(report) if fmt == "json" else report_to_csv(report)
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# --------------------------------------------------------------------------
# connect


def run_connect(
    u_path: str, v_path: str, curve: str, samples: int
) -> tuple[np.ndarray, int, int]:
    """Evaluate the chosen curve on a uniform t-grid in [0, 1].

    Returns (samples x (n*p) matrix of row-major flattened frames, n, p).
    """
    if samples < 2:
        raise ValueOutOfRange("need at least 2 samples")
    MU = read_matrix_file(u_path)
    MV = read_matrix_file(v_path)
    if MU.shape != MV.shape:
        raise ParseError(
            f"endpoint shapes differ: {MU.shape} in {u_path}, {MV.shape} in {v_path}"
        )
    U, Ut = make_point(MU), make_point(MV)
    if curve == "econ":
        c = econ_qg_connect(U, Ut)
        evaluate = lambda t: econ_qg_eval(c, t)  # noqa: E731
    elif curve == "short":
        c = short_qg_connect(U, Ut)
        evaluate = lambda t: short_qg_eval(c, t)  # noqa: E731
    elif curve == "geodesic-shooting":
        delta = stiefel_log_shooting(U, Ut)
        evaluate = lambda t: stiefel_exp(U, delta, t)  # noqa: E731
    else:
        raise ParseError(f"unknown curve kind {curve!r}")
    grid = np.linspace(0.0, 1.0, samples)
    rows = np.stack([evaluate(t).U.reshape(-1) for t in grid])
    return rows, U.n, U.p


def cmd_connect(args) -> int:
    rows, _, _ = run_connect(args.u_file, args.v_file, args.curve, args.samples)
    write_matrix_file(args.out, rows)
    return 0


# --------------------------------------------------------------------------
# figure1


def cmd_figure1(config: dict) -> ExperimentReport:
    """Distance of both quasi-geodesics to the constructed geodesic.

    Per (d, trial, t): Riemannian distances via the shooting oracle
    (blank when shooting fails) and Frobenius chordal distances.
    """
    n, p = config["n"], config["p"]
    if n < 2 * p:
        raise DimensionError(f"figure1 needs n >= 2p, got St({n},{p})")
    grid = np.linspace(0.0, 1.0, config["samples"])
    shoot_cfg = ShootingConfig()
    rows: list[list] = []
    timings = {"connect_s": 0.0, "distance_s": 0.0}
    for di, d in enumerate(config["distances"]):
        for trial in range(config["trials"]):
            U, delta, Ut = constructed_pair(
                n, p, d, derive_seed(config["seed"], 1, di, trial)
            )
            t0 = time.perf_counter()
            econ = econ_qg_connect(U, Ut)
            short = short_qg_connect(U, Ut)
            timings["connect_s"] += time.perf_counter() - t0
            for t in grid:
                ref = stiefel_exp(U, delta, float(t))
                pe = econ_qg_eval(econ, float(t))
                ps = short_qg_eval(short, float(t))
                t0 = time.perf_counter()
                dist_e = _safe_dist(ref, pe, shoot_cfg)
                dist_s = _safe_dist(ref, ps, shoot_cfg)
                timings["distance_s"] += time.perf_counter() - t0
                rows.append(
                    [
                        trial,
                        float(t),
                        d,
                        dist_e,
                        dist_s,
                        float(np.linalg.norm(pe.U - ref.U)),
                        float(np.linalg.norm(ps.U - ref.U)),
                    ]
                )
    return ExperimentReport(
        command="figure1",
        config=config,
        columns=["trial", "t", "d", "dist_econ", "dist_short", "chordal_econ", "chordal_short"],
        rows=rows,
        timings=timings,
    )


def _safe_dist(a: StiefelPoint, b: StiefelPoint, cfg: ShootingConfig) -> float | None:
    # absent (blank column) when the oracle fails, never substituted
    try:
        return riemannian_dist(a, b, cfg)
    except NumericalError:
        return None


# --------------------------------------------------------------------------
# table1


def cmd_table1(config: dict) -> ExperimentReport:
    """Relative length deviation |L - d| / d per p, averaged over trials."""
    n = config["n"]
    d = config["distances"][0]
    rows: list[list] = []
    timings = {"total_s": 0.0}
    t0 = time.perf_counter()
    for pi, p in enumerate(config["p_values"]):
        if n < 2 * p:
            raise DimensionError(f"table1 needs n >= 2p, got St({n},{p})")
        dev_short, dev_econ = [], []
        for trial in range(config["trials"]):
            U, _, Ut = constructed_pair(n, p, d, derive_seed(config["seed"], 2, pi, trial))
            dev_econ.append(abs(econ_qg_length(econ_qg_connect(U, Ut)) - d) / d)
            dev_short.append(abs(short_qg_length(short_qg_connect(U, Ut)) - d) / d)
        rows.append(
            [p, float(np.mean(dev_short)), float(np.mean(dev_econ))]
        )
    timings["total_s"] = time.perf_counter() - t0
    return ExperimentReport(
        command="table1",
        config=config,
        columns=["p", "reldev_short", "reldev_econ"],
        rows=rows,
        timings=timings,
    )


# --------------------------------------------------------------------------
# bench


def cmd_bench(config: dict) -> ExperimentReport:
    """Median wall-clock of econ connect, short connect and the n x n
    full-representation evaluation; the spread column is max - min."""
    rows: list[list] = []
    timings: dict = {}
    for gi, (n, p) in enumerate(config["grid"]):
        U, delta, Ut = constructed_pair(
            n, p, config["distances"][0], derive_seed(config["seed"], 3, gi)
        )
        A_full, B_full = tangent_completion_form(delta)
        econ_t, short_t, full_t = [], [], []
        for _ in range(config["trials"]):
            t0 = time.perf_counter()
            econ_qg_connect(U, Ut)
            econ_t.append(time.perf_counter() - t0)
            if 2 * p <= n:
                t0 = time.perf_counter()
                short_qg_connect(U, Ut)
                short_t.append(time.perf_counter() - t0)
            t0 = time.perf_counter()
            full_qg_eval(U, A_full, B_full, 1.0)
            full_t.append(time.perf_counter() - t0)
        med_short = statistics.median(short_t) if short_t else None
        spread_short = (max(short_t) - min(short_t)) if short_t else None
        rows.append(
            [
                n,
                p,
                statistics.median(econ_t),
                med_short,
                statistics.median(full_t),
                max(econ_t) - min(econ_t),
                spread_short,
                max(full_t) - min(full_t),
            ]
        )
    return ExperimentReport(
        command="bench",
        config=config,
        columns=[
            "n",
            "p",
            "time_econ_s",
            "time_short_s",
            "time_full_s",
            "spread_econ_s",
            "spread_short_s",
            "spread_full_s",
        ],
        timings=timings,
        rows=rows,
    )


# --------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stiefelqg",
        description="Quasi-geodesic experiments on the Stiefel manifold",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("connect", help="sample a curve between two frame files")
    c.add_argument("u_file")
    c.add_argument("v_file")
    c.add_argument("--curve", choices=["econ", "short", "geodesic-shooting"], default="short")
    c.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    c.add_argument("--out", required=True)
    c.set_defaults(handler=cmd_connect, kind="connect")

    def common(p_):
        p_.add_argument("--n", type=int, default=None)
        p_.add_argument("--p", type=int, default=None)
        p_.add_argument("--d", default=None, help="comma list, 'pi' suffix allowed")
        p_.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
        p_.add_argument("--trials", type=int, default=None)
        p_.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p_.add_argument("--out", default=None)
        p_.add_argument("--format", choices=["csv", "json"], default="csv")
        p_.add_argument("--paper-scale", action="store_true")

    f = sub.add_parser("figure1", help="distance to the true geodesic along t")
    common(f)
    f.set_defaults(kind="figure1")

    t = sub.add_parser("table1", help="relative length deviation over a p-range")
    common(t)
    t.add_argument("--p-range", default=None, help="A:B:step inclusive")
    t.set_defaults(kind="table1")

    b = sub.add_parser("bench", help="wall-clock of the three cost regimes")
    common(b)
    b.set_defaults(kind="bench")
    return parser


def _experiment_config(args) -> dict:
    paper = bool(args.paper_scale)
    kind = args.kind
    if kind == "figure1":
        n = args.n if args.n is not None else (PAPER_N if paper else DESK_N)
        p = args.p if args.p is not None else (PAPER_P if paper else DESK_P)
        default_d = "0.1pi,0.5pi,1.3pi" if paper else "0.1pi,0.5pi"
    elif kind == "table1":
        n = args.n if args.n is not None else 200
        p = args.p if args.p is not None else 0  # unused, p_values rules
        default_d = "0.5pi"
    else:  # bench
        n = args.n
        p = args.p
        default_d = "0.5pi"
    distances = parse_distances(args.d if args.d is not None else default_d)
    trials = args.trials if args.trials is not None else (
        5 if kind == "bench" else DEFAULT_TRIALS
    )
    if trials < 1:
        raise ValueOutOfRange("trials must be at least 1")
    if args.samples < 2:
        raise ValueOutOfRange("need at least 2 samples")
    config = {
        "n": n,
        "p": p,
        "distances": list(distances),
        "samples": args.samples,
        "trials": trials,
        "seed": args.seed,
        "paper_scale": paper,
    }
    if kind == "table1":
        raw = args.p_range if args.p_range is not None else (
            "10:100:10" if paper else "10:50:20"
        )
        config["p_values"] = list(parse_p_range(raw))
    if kind == "bench":
        if args.n is not None and args.p is not None:
            config["grid"] = [[args.n, args.p]]
        elif paper:
            config["grid"] = [[200, 10], [200, 30], [400, 20], [400, 40]]
        else:
            config["grid"] = [[100, 10], [200, 20], [400, 20]]
    return config


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.kind == "connect":
            return args.handler(args)
        config = _experiment_config(args)
        if args.kind == "figure1":
            report = cmd_figure1(config)
        elif args.kind == "table1":
            report = cmd_table1(config)
        else:
            report = cmd_bench(config)
        write_report(report, args.out, args.format)
        return 0
    except ValidationError as exc:
        print(type(exc).__name__, file=sys.stderr)
        print(f"  {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(type(exc).__name__, file=sys.stderr)
        print(f"  {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
