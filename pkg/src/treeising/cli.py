"""Command-line front end: ``treeising <subcommand> [flags]``.

Tables go to ``--output`` as CSV (9 significant digits) with a JSON mirror
next to it (same name, ``.json`` suffix), or to stdout as CSV when no output
is given.

Exit codes: 0 ok, 1 input error, 2 constraint violation, 3 numerical
tolerance failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .distribution import LARGE_N_FFT, expected_allocations, sum_pmf
from .errors import ConstraintViolation, InadmissibleModel, NumericalToleranceError, TreeIsingError
from .model import MeanParamIsing, validate
from .modelfile import dumps_model, load_model
from .params import PARAMETERIZATIONS, convert, kind_of, log_normalizer
from .pmf import tv_distance
from .poisson import build_approx, check_convex_order, mpmrf_sum_pmf, tv_bound
from .sampling import RngStream, mc_confidence_intervals, monte_carlo_sum_pmf, sample_batch, sample_symmetric_batch
from .tables import DEFAULT_SEED, STUDY_LEVEL, STUDY_REPS, Table, reproduce_tables

EXIT_OK, EXIT_INPUT, EXIT_CONSTRAINT, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    model: str | None = None
    output: str | None = None
    n_fft: int | None = None
    seed: int = DEFAULT_SEED
    samples: int | None = None
    reps: int | None = None
    level: float = STUDY_LEVEL
    vertex: str | None = None
    to: str | None = None
    method: str = "direct"
    pmf: bool = False

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        n_fft = getattr(ns, "n_fft", None)
        if n_fft == "large":
            n_fft = LARGE_N_FFT
        return cls(
            subcommand=ns.subcommand,
            model=getattr(ns, "model", None),
            output=getattr(ns, "output", None),
            n_fft=None if n_fft is None else int(n_fft),
            seed=getattr(ns, "seed", DEFAULT_SEED),
            samples=getattr(ns, "n", None),
            reps=getattr(ns, "reps", None),
            level=getattr(ns, "level", STUDY_LEVEL),
            vertex=getattr(ns, "vertex", None),
            to=getattr(ns, "to", None),
            method=getattr(ns, "method", "direct"),
            pmf=getattr(ns, "pmf", False),
        )


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _n_fft(text: str):
    if text == "large":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'large', got {text!r}") from None


def _level(text: str) -> float:
    x = float(text)
    if not (0.0 < x < 1.0):
        raise argparse.ArgumentTypeError("level must be in (0, 1)")
    return x


def _positive(text: str) -> int:
    x = int(text)
    if x < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return x


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="treeising", description="Tree-structured Ising models under mean parameterisation.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def add(name, help, model=True, output=True):
        sp = sub.add_parser(name, help=help)
        if model:
            sp.add_argument("--model", required=True, help="model file (JSON)")
        if output:
            sp.add_argument("--output", help="output path (CSV, plus a .json mirror); stdout if omitted")
        return sp

    def fft_flag(sp):
        sp.add_argument("--n-fft", type=_n_fft, help="transform length (power of two above d) or 'large' for 8192")

    add("validate", "check admissibility of a model file", output=False)
    sp = add("convert", "convert between parameterisations")
    sp.add_argument("--to", required=True, choices=PARAMETERIZATIONS)
    fft_flag(add("pmf-sum", "pmf of the sum K"))
    sp = add("allocations", "expected allocations E[J_v 1{K=k}]")
    sp.add_argument("--vertex", help="vertex label (default: all vertices)")
    fft_flag(sp)
    sp = add("sample", "direct sampling and Monte-Carlo summaries")
    sp.add_argument("--n", type=_positive, required=True, help="draws (per replication with --reps)")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--reps", type=_positive, help="replications; outputs per-k intervals")
    sp.add_argument("--level", type=_level, default=STUDY_LEVEL)
    sp.add_argument("--method", choices=("direct", "symmetric-flip"), default="direct")
    sp.add_argument("--pmf", action="store_true", help="output the empirical pmf of K instead of realisations")
    fft_flag(add("poisson-compare", "compare K with its Poisson approximation M"))
    sp = add("reproduce-tables", "regenerate the four tables of the numerical study", model=False)
    sp.set_defaults(output=None)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--reps", type=_positive, default=STUDY_REPS)
    sp.add_argument("--level", type=_level, default=STUDY_LEVEL)
    return p


def _emit(cfg: RunConfig, tables: list[Table], out=None) -> None:
    out = out or sys.stdout
    if cfg.output is None:
        for i, t in enumerate(tables):
            if i:
                out.write("\n")
            out.write(t.to_csv())
        return
    path = Path(cfg.output)
    if len(tables) == 1:
        path.write_text(tables[0].to_csv())
        path.with_suffix(".json").write_text(tables[0].to_json())
        return
    base = path.with_suffix("")
    for t in tables:
        stem = base.with_name(f"{base.name}_{t.name}")
        stem.with_suffix(".csv").write_text(t.to_csv())
        stem.with_suffix(".json").write_text(t.to_json())


def _mean_model(cfg: RunConfig) -> MeanParamIsing:
    model = load_model(cfg.model)
    m = convert(model, "mean") if kind_of(model) != "mean" else model
    report = validate(m)
    if not report.ok:
        raise InadmissibleModel(report)
    return m


def cmd_validate(cfg: RunConfig, out) -> int:
    model = load_model(cfg.model)
    if kind_of(model) != "mean":
        m = convert(model, "mean")
        out.write(f"{kind_of(model)} model with log normalizer {log_normalizer(model):.9g}\n")
    else:
        m = model
    report = validate(m)
    out.write(str(report) + "\n")
    return EXIT_OK if report.ok else EXIT_CONSTRAINT


def cmd_convert(cfg: RunConfig, out) -> int:
    model = load_model(cfg.model)
    if kind_of(model) == "mean":
        report = validate(model)
        if not report.ok:
            raise InadmissibleModel(report)
    target = convert(model, cfg.to, root=model.rt.root if kind_of(model) == "mean" else 0)
    text = dumps_model(target)
    # the mean form has no normalizer; report the exponential side's
    norm = log_normalizer(model if cfg.to == "mean" else target)
    if cfg.output is None:
        out.write(text)
        sys.stderr.write(f"log normalizer: {norm:.9g}\n")
    else:
        Path(cfg.output).write_text(text)
        out.write(f"log normalizer: {norm:.9g}\n")
    return EXIT_OK


def cmd_pmf_sum(cfg: RunConfig, out) -> int:
    m = _mean_model(cfg)
    p = sum_pmf(m, cfg.n_fft)
    t = Table("pmf_sum", ["k", "probability"], [[k, float(x)] for k, x in enumerate(p.values)], {"d": m.d})
    _emit(cfg, [t], out)
    return EXIT_OK


def cmd_allocations(cfg: RunConfig, out) -> int:
    m = _mean_model(cfg)
    labels = m.tree.labels
    verts = [m.tree.index_of(cfg.vertex)] if cfg.vertex is not None else list(range(m.d))
    allocs = [expected_allocations(m, v, cfg.n_fft).values for v in verts]
    if cfg.vertex is not None:
        cols = ["k", "allocation"]
    else:
        cols = ["k"] + [f"vertex_{labels[v]}" for v in verts]
    rows = [[k] + [float(a[k]) for a in allocs] for k in range(m.d + 1)]
    _emit(cfg, [Table("allocations", cols, rows, {"d": m.d})], out)
    return EXIT_OK


def cmd_sample(cfg: RunConfig, out) -> int:
    m = _mean_model(cfg)
    if cfg.reps is not None:
        ci = mc_confidence_intervals(m, cfg.samples, cfg.reps, cfg.level, seed=cfg.seed, method=cfg.method)
        est = ci.estimates.mean(axis=0)
        rows = [[k, float(est[k]), float(ci.lower[k]), float(ci.upper[k])] for k in range(m.d + 1)]
        meta = {"n": cfg.samples, "reps": cfg.reps, "level": cfg.level, "seed": cfg.seed, "method": cfg.method}
        _emit(cfg, [Table("mc_intervals", ["k", "mean_estimate", "lower", "upper"], rows, meta)], out)
        return EXIT_OK
    rng = RngStream(cfg.seed)
    if cfg.pmf:
        p = monte_carlo_sum_pmf(m, cfg.samples, rng, cfg.method)
        rows = [[k, float(x)] for k, x in enumerate(p.values)]
        _emit(cfg, [Table("mc_pmf", ["k", "probability"], rows, {"n": cfg.samples, "seed": cfg.seed})], out)
        return EXIT_OK
    draw = sample_batch if cfg.method == "direct" else sample_symmetric_batch
    bits = draw(m, cfg.samples, rng).by_vertex()
    cols = list(m.tree.labels)
    _emit(cfg, [Table("samples", cols, bits.tolist(), {"seed": cfg.seed, "method": cfg.method})], out)
    return EXIT_OK


def cmd_poisson_compare(cfg: RunConfig, out) -> int:
    m = _mean_model(cfg)
    approx = build_approx(m)
    pk = sum_pmf(m, cfg.n_fft)
    pm = mpmrf_sum_pmf(approx)
    report = check_convex_order(pk, pm)
    # rows until M's remaining mass is negligible
    last = max(m.d, int(np.max(np.flatnonzero(pm.values > 1e-12))))
    a = pk.padded(last + 1)[: last + 1]
    b = pm.values[: last + 1]
    rows = [
        [k, float(a[k]), float(b[k]), float(abs(a[k] - b[k])), float(report.pi_k[k]), float(report.pi_m[k])]
        for k in range(last + 1)
    ]
    q = float(m.q[0])
    tv = tv_distance(pk, pm)
    bound = tv_bound(m.d, q)
    meta = {"tv_distance": tv, "tv_bound": bound, "convex_order": report.verdict, "truncation_error": pm.truncation_error}
    main = Table("poisson_compare", ["k", "p_K", "p_M", "abs_diff", "pi_K", "pi_M"], rows, meta)
    summary = Table(
        "summary",
        ["metric", "value"],
        [
            ["tv_distance", tv],
            ["tv_bound", bound],
            ["tv_within_bound", tv <= bound],
            ["mean_K", report.mean_k],
            ["mean_M", report.mean_m],
            ["convex_order", report.verdict],
        ],
    )
    _emit(cfg, [main, summary], out)
    return EXIT_OK


def cmd_reproduce_tables(cfg: RunConfig, out) -> int:
    tables = reproduce_tables(seed=cfg.seed, reps=cfg.reps, level=cfg.level)
    if cfg.output is None:
        for i, t in enumerate(tables):
            out.write(("\n" if i else "") + f"# {t.name}\n" + t.to_csv())
        return EXIT_OK
    d = Path(cfg.output)
    d.mkdir(parents=True, exist_ok=True)
    for t in tables:
        (d / f"{t.name}.csv").write_text(t.to_csv())
        (d / f"{t.name}.json").write_text(t.to_json())
    out.write(f"wrote {len(tables)} tables to {d}\n")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "convert": cmd_convert,
    "pmf-sum": cmd_pmf_sum,
    "allocations": cmd_allocations,
    "sample": cmd_sample,
    "poisson-compare": cmd_poisson_compare,
    "reproduce-tables": cmd_reproduce_tables,
}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, NumericalToleranceError):
        return EXIT_NUMERIC
    if isinstance(exc, ConstraintViolation):
        return EXIT_CONSTRAINT
    return EXIT_INPUT


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    ns = parser.parse_args(argv)
    cfg = RunConfig.from_args(ns)
    try:
        return COMMANDS[cfg.subcommand](cfg, out)
    except (TreeIsingError, OSError) as exc:
        sys.stderr.write(f"treeising {cfg.subcommand}: {exc}\n")
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
