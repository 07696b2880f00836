"""The numerical study: a seven-vertex binary tree with ``alpha = 0.7`` on every edge.

Four tables are produced for each ``q`` in ``(0.01, 0.001)``: the pmf of ``K``
(exact, Poisson approximation, Monte-Carlo 90% intervals at two sample
sizes) and the stop-loss transforms of ``K`` and of its approximation ``M``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .distribution import sum_pmf
from .model import MeanParamIsing
from .poisson import build_approx, mpmrf_sum_pmf
from .sampling import mc_confidence_intervals
from .tree import binary_tree

STUDY_QS = (0.01, 0.001)
STUDY_ALPHA = 0.7
STUDY_SAMPLE_SIZES = (1000, 10000)
STUDY_REPS = 1000
STUDY_LEVEL = 0.9
DEFAULT_SEED = 20240101


def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([fmt(x) for x in r])
        return buf.getvalue()

    def to_json(self) -> str:
        def js(x):
            if isinstance(x, float):
                return float(fmt(x))
            return x

        doc = {
            "name": self.name,
            "columns": self.columns,
            "rows": [[js(x) for x in r] for r in self.rows],
            "meta": {k: js(v) for k, v in self.meta.items()},
        }
        return json.dumps(doc, indent=2) + "\n"

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def study_model(q: float, alpha: float = STUDY_ALPHA) -> MeanParamIsing:
    return MeanParamIsing.on(binary_tree(2), q, alpha)


PMF_ROWS = ("Pr(K=0)", "Pr(K=1)", "Pr(K=2)", "Pr(K>=3)")


def pmf_table(q: float, seed: int = DEFAULT_SEED, reps: int = STUDY_REPS, level: float = STUDY_LEVEL,
              sizes=STUDY_SAMPLE_SIZES, name: str | None = None) -> Table:
    m = study_model(q)
    pk = sum_pmf(m)
    pm = mpmrf_sum_pmf(build_approx(m))
    exact = [pk[0], pk[1], pk[2], pk.tail(3)]
    approx = [pm[0], pm[1], pm[2], pm.tail(3)]
    cols = ["quantity", "exact", "poisson"]
    intervals = []
    for i, n in enumerate(sizes):
        ci = mc_confidence_intervals(m, n, reps, level, seed=seed + i)
        intervals.append([ci.point(0), ci.point(1), ci.point(2), ci.tail(3)])
        cols += [f"mc_lower_n{n}", f"mc_upper_n{n}"]
    t = Table(name or f"pmf_q{q:g}", cols, meta={"q": q, "alpha": STUDY_ALPHA, "seed": seed, "reps": reps, "level": level})
    for j, label in enumerate(PMF_ROWS):
        row = [label, float(exact[j]), float(approx[j])]
        for iv in intervals:
            row += [float(iv[j][0]), float(iv[j][1])]
        t.rows.append(row)
    return t


def stop_loss_table(q: float, name: str | None = None) -> Table:
    m = study_model(q)
    pk = sum_pmf(m)
    pm = mpmrf_sum_pmf(build_approx(m))
    t = Table(name or f"stoploss_q{q:g}", ["z", "pi_K", "pi_M"], meta={"q": q, "alpha": STUDY_ALPHA})
    for z in range(m.d + 1):
        t.rows.append([z, float(pk.stop_loss(z)), float(pm.stop_loss(z))])
    return t


def reproduce_tables(seed: int = DEFAULT_SEED, reps: int = STUDY_REPS, level: float = STUDY_LEVEL) -> list[Table]:
    """Tables 1 to 4 in order: pmf and stop-loss at ``q = 0.01``, then at ``q = 0.001``."""
    out = []
    k = 1
    for i, q in enumerate(STUDY_QS):
        out.append(pmf_table(q, seed + 100 * i, reps, level, name=f"table{k}"))
        out.append(stop_loss_table(q, name=f"table{k + 1}"))
        k += 2
    return out
