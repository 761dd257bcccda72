"""Command-line front end: ``localstats generate | stats | verify``.

Exit codes: 0 success, 1 a verification check failed, 2 usage or input error.
Set ``LOCALSTATS_THREADS`` to evaluate large grids on several threads.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import reference_laws as laws
from . import statistics as st
from .constants import parse_constant, parse_vector
from .functions import IntervalSet
from .reports import write_table
from .sequences import (
    ARITHMETIC_KINDS,
    AffineLatticeSpec,
    ResourceLimitError,
    gen_arithmetic,
    gen_directions,
    gen_iud,
    gen_sqrt,
    read_csv,
    write_csv,
)
from .verify import SUITES, run_suite

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2
KINDS = ("sqrt", "iud", "directions") + tuple(ARITHMETIC_KINDS)
STATISTICS = ("gaps", "kneighbor", "paircorr", "moments", "counting", "field")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    generator: dict = field(default_factory=dict)
    statistic: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    seed: int | None = None
    outputs: dict = field(default_factory=dict)
    tolerance: float | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))


# ---------------------------------------------------------------- parser


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--out", help="output path (generate) or output prefix (stats, verify)")
    p.add_argument("--gnuplot", action="store_true", help="space-separated tables instead of CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="localstats", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a sequence to CSV")
    g.add_argument("--kind", required=True, choices=KINDS)
    g.add_argument("--tmax", type=int, help="sqrt: use n <= tmax")
    g.add_argument("--n", type=int, help="iud and arithmetic kinds: number of points")
    g.add_argument("--seed", type=int, default=0, help="iud: PRNG seed")
    g.add_argument("--alpha", default=None, help="arithmetic kinds: constant such as sqrt(2) or 1/3")
    g.add_argument("--beta", default="0", help="power kind: exponent of log n")
    g.add_argument("--T", dest="t_radius", type=float, help="directions: disc radius")
    g.add_argument("--xi", default="0,0", help="directions: shift, e.g. cbrt(4),cbrt(2)")
    g.add_argument("--m0", default="1,0,0,1", help="directions: matrix rows a,b,c,d (det 1)")
    _add_common(g)

    s = sub.add_parser("stats", help="compute a statistic of a sequence file")
    s.add_argument("statistic", choices=STATISTICS)
    s.add_argument("input", help="sequence CSV written by 'generate'")
    s.add_argument("--interval", action="append", help="window I as lo,hi (repeat for several)")
    s.add_argument("--s", dest="exponents", default=None, help="moments: exponents, comma-separated")
    s.add_argument("--bins", type=int, default=None, help="histogram bins (gaps: 100, paircorr: 16)")
    s.add_argument("--amax", type=float, default=None, help="upper end of the A axis (gaps: 5, paircorr: 4)")
    s.add_argument("--astep", type=float, default=0.05, help="gaps, kneighbor: CDF grid step")
    s.add_argument("--k", type=int, default=1, help="kneighbor: neighbor order")
    s.add_argument("--grid", type=int, default=None,
                   help="moments, counting, field: x-grid size (moments and counting default to the exact sweep)")
    _add_common(s)

    v = sub.add_parser("verify", help="run an acceptance suite")
    v.add_argument("suite_pos", nargs="?", metavar="SUITE", choices=sorted(SUITES) + ["all"])
    v.add_argument("--suite", choices=sorted(SUITES) + ["all"])
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--tolerance", type=float, default=None, help="replace every upper-bound threshold")
    _add_common(v)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.command == "generate":
        gen = {"kind": args.kind}
        if args.kind == "sqrt":
            if args.tmax is None:
                raise UsageError("--tmax is required for --kind sqrt")
            gen["t_max"] = args.tmax
        elif args.kind == "iud":
            if args.n is None:
                raise UsageError("--n is required for --kind iud")
            gen.update(n_count=args.n, seed=args.seed)
        elif args.kind == "directions":
            if args.t_radius is None:
                raise UsageError("--T is required for --kind directions")
            gen.update(T=args.t_radius, xi=args.xi, m0=args.m0)
        else:
            if args.n is None or args.alpha is None:
                raise UsageError(f"--n and --alpha are required for --kind {args.kind}")
            gen.update(alpha=args.alpha, beta=args.beta, n_max=args.n)
        seed = args.seed if args.kind == "iud" else None
        return RunConfig("generate", generator=gen, seed=seed,
                         outputs={"path": args.out or f"{args.kind}.csv", "gnuplot": args.gnuplot})
    if args.command == "stats":
        stat = {"name": args.statistic, "intervals": args.interval, "exponents": args.exponents,
                "bins": args.bins, "amax": args.amax, "astep": args.astep, "k": args.k}
        return RunConfig("stats", generator={"input": args.input}, statistic=stat, grid={"x_grid": args.grid},
                         outputs={"prefix": args.out or Path(args.input).with_suffix("").as_posix()
                                  + f".{args.statistic}", "gnuplot": args.gnuplot})
    suite = args.suite or args.suite_pos
    if suite is None:
        raise UsageError("choose a suite, e.g. 'verify lemma1' or '--suite all'")
    return RunConfig("verify", statistic={"suite": suite}, seed=args.seed, tolerance=args.tolerance,
                     outputs={"prefix": args.out})


# ---------------------------------------------------------------- commands


def _sequence_from(gen: dict):
    kind = gen["kind"]
    if kind == "sqrt":
        return gen_sqrt(gen["t_max"])
    if kind == "iud":
        return gen_iud(gen["n_count"], gen["seed"])
    if kind == "directions":
        m0 = np.array(parse_vector(gen["m0"]), dtype=float)
        if m0.size != 4:
            raise UsageError("--m0 needs four entries a,b,c,d")
        xi = parse_vector(gen["xi"])
        if len(xi) != 2:
            raise UsageError("--xi needs two entries")
        return gen_directions(AffineLatticeSpec(m0.reshape(2, 2), np.array(xi)), gen["T"])
    return gen_arithmetic(kind, parse_constant(gen["alpha"]), parse_constant(gen["beta"]), gen["n_max"])


def cmd_generate(cfg: RunConfig) -> int:
    seq = _sequence_from(cfg.generator)
    # the output path stays out of the header so reruns produce identical files
    provenance = {k: v for k, v in asdict(cfg).items() if k != "outputs"}
    path = write_csv(seq, cfg.outputs["path"], {"config": provenance})
    print(f"wrote {seq.n_count} points to {path}")
    return EXIT_OK


def _intervals(stat: dict, default=((0.0, 1.0),)) -> list[IntervalSet]:
    raw = stat.get("intervals") or [f"{lo},{hi}" for lo, hi in default]
    out = []
    for text in raw:
        parts = parse_vector(text)
        if len(parts) != 2:
            raise UsageError(f"--interval expects lo,hi (got {text!r})")
        out.append(IntervalSet.of(*parts))
    return out


def _write_summary(prefix: str, cfg: RunConfig, summary: dict) -> Path:
    path = Path(f"{prefix}.json")
    payload = {"config": asdict(cfg), **summary}
    try:
        path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=float) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write summary {path}: {exc}") from exc
    return path


def cmd_stats(cfg: RunConfig) -> int:
    seq = read_csv(cfg.generator["input"])
    stat, prefix = cfg.statistic, cfg.outputs["prefix"]
    gnuplot = cfg.outputs.get("gnuplot", False)
    ext = ".dat" if gnuplot else ".csv"
    name = stat["name"]
    summary: dict = {"n_count": seq.n_count, "statistic": name}
    files = []
    if name in ("gaps", "kneighbor"):
        amax = stat["amax"] or 5.0
        grid = np.arange(0.0, amax + stat["astep"] / 2, stat["astep"])
        k = stat["k"] if name == "kneighbor" else 1
        cdf = st.k_neighbor_distribution(seq, k, grid)
        files.append(cdf.write(f"{prefix}.cdf{ext}", gnuplot))
        summary.update(k=k, cdf_sup_deviation=cdf.sup_deviation())
        if name == "gaps":
            pdf = st.gap_histogram(seq, np.linspace(0.0, amax, (stat["bins"] or 100) + 1))
            files.append(pdf.write(f"{prefix}.pdf{ext}", gnuplot))
            summary.update(pdf_sup_deviation=pdf.sup_deviation(), pdf_out_of_range=pdf.out_of_range)
    elif name == "paircorr":
        amax = stat["amax"] or 4.0
        hist = st.pair_correlation_histogram(seq, np.linspace(0.0, amax, (stat["bins"] or 16) + 1))
        files.append(hist.write(f"{prefix}{ext}", gnuplot))
        summary.update(max_density_deviation=hist.sup_deviation())
    elif name == "moments":
        boxes = _intervals(stat)
        s = list(parse_vector(stat["exponents"])) if stat["exponents"] else [1.0] * len(boxes)
        method = "grid" if cfg.grid.get("x_grid") else "exact"
        kwargs = {"x_grid_size": cfg.grid["x_grid"]} if method == "grid" else {}
        value = st.moments(seq, boxes, s, method=method, **kwargs)
        summary.update(intervals=[b.to_list() for b in boxes], exponents=s, method=method, value=value)
        if len(boxes) == 1 and s == [1.0]:
            summary["poisson_value"] = boxes[0].length
        elif len(boxes) == 1 and s == [2.0]:
            summary["poisson_value"] = laws.poisson_mixed_second(boxes[0], boxes[0])
        elif len(boxes) == 2 and s == [1.0, 1.0]:
            summary["poisson_value"] = laws.poisson_mixed_second(boxes[0], boxes[1])
    elif name == "counting":
        box = _intervals(stat)[0]
        method = "grid" if cfg.grid.get("x_grid") else "exact"
        kwargs = {"x_grid_size": cfg.grid["x_grid"]} if method == "grid" else {}
        dist = st.empirical_counting_distribution(seq, [box], method=method, **kwargs)
        r_max = max(k[0] for k in dist)
        law = laws.PoissonLaw(box.length)
        rs = np.arange(r_max + 1)
        cols = {"r": rs, "probability": np.array([dist.get((int(r),), 0.0) for r in rs]),
                "poisson": np.array([law.pmf(int(r)) for r in rs])}
        files.append(write_table(f"{prefix}{ext}", cols, {"statistic": "counting", "interval": box.to_list()},
                                 gnuplot))
        summary.update(interval=box.to_list(), method=method,
                       total_variation=laws.total_variation(dist, law.table(r_max + 60)))
    else:  # field
        box = _intervals(stat)[0]
        fld = st.count_field(seq, box, cfg.grid.get("x_grid") or st.DEFAULT_GRID)
        files.append(fld.write(f"{prefix}{ext}", gnuplot))
        summary.update(interval=box.to_list(), mean=fld.mean(), expected_mean=box.length)
    summary["files"] = [str(f) for f in files]
    files.append(_write_summary(prefix, cfg, summary))
    for f in files:
        print(f"wrote {f}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    suite = cfg.statistic["suite"]
    names = sorted(SUITES) if suite == "all" else [suite]
    ok = True
    results = []
    for name in names:
        res = run_suite(name, seed=cfg.seed, tolerance=cfg.tolerance)
        print(res.report(), flush=True)
        ok &= res.passed
        results.append(res.to_dict())
    if cfg.outputs.get("prefix"):
        _write_summary(cfg.outputs["prefix"], cfg, {"passed": ok, "suites": results})
    return EXIT_OK if ok else EXIT_CHECK_FAILED


COMMANDS = {"generate": cmd_generate, "stats": cmd_stats, "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # argparse exits with 2 on usage errors
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg)
    except (UsageError, ValueError, OSError, ResourceLimitError) as exc:
        print(f"localstats: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
