"""Aggregation over repeated runs, paired t-test, Pearson correlation, report export.

The Student t CDF is computed here from the regularized incomplete beta
function (continued fraction, modified Lentz), so the statistics carry no
dependency beyond the standard library.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

KEY_FIELDS = ("model", "task", "difficulty", "modality", "variant")
CSV_COLUMNS = KEY_FIELDS + ("metric", "mean", "std", "n", "config_digest", "master_seed")

_EPS = 1e-15
_TINY = 1e-300
_MAX_ITER = 500


class StatisticsError(ValueError):
    """Statistic undefined for the given inputs."""


@dataclass(frozen=True)
class StatResult:
    statistic: float
    df: int
    p: float
    degenerate: bool = False
    n: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p-value out of range: {self.p}")
        if self.df < 1:
            raise ValueError(f"degrees of freedom must be >= 1, got {self.df}")

    def as_dict(self) -> dict[str, Any]:
        return {"statistic": self.statistic, "df": self.df, "p": self.p,
                "degenerate": self.degenerate, "n": self.n}


# -- t distribution ----------------------------------------------------------


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), evaluated with the modified Lentz method."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _TINY else _TINY)
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x in (0.0, 1.0):
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    # the continued fraction converges fast on the side below the mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 0.0
    if t == 0:
        return 1.0
    x = df / (df + t * t)
    return min(1.0, max(0.0, betainc(df / 2.0, 0.5, x)))


def t_cdf(t: float, df: float) -> float:
    tail = t_sf_two_sided(t, df) / 2.0
    return 1.0 - tail if t > 0 else tail


# -- descriptive -------------------------------------------------------------


def mean(xs: Sequence[float]) -> float:
    if not xs:
        raise StatisticsError("mean of empty sequence")
    return math.fsum(xs) / len(xs)


def pstdev(xs: Sequence[float]) -> float:
    """Population standard deviation (divisor N)."""
    m = mean(xs)
    return math.sqrt(math.fsum((x - m) ** 2 for x in xs) / len(xs))


def _is_metric(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


@dataclass
class RunSet:
    """Repeated runs sharing one grouping key."""

    key: tuple[str, ...]
    runs: list[dict[str, Any]] = field(default_factory=list)
    config_digest: str = ""
    master_seed: int | None = None

    def __post_init__(self) -> None:
        if len(self.key) != len(KEY_FIELDS):
            raise ValueError(f"grouping key needs {len(KEY_FIELDS)} fields")
        self.key = tuple(str(k) for k in self.key)

    @property
    def repeats(self) -> int:
        return len(self.runs)

    def add(self, key: tuple[str, ...], score: dict[str, Any]) -> None:
        if tuple(str(k) for k in key) != self.key:
            raise ValueError(f"run key {key!r} does not match set key {self.key!r}")
        self.runs.append(score)

    def metrics(self) -> list[str]:
        names: set[str] = set()
        for r in self.runs:
            names.update(k for k, v in r.items() if _is_metric(v))
        return sorted(names)


def aggregate(runs: RunSet | Sequence[dict[str, Any]]) -> dict[str, tuple[float, float, int]]:
    """Per metric: (mean, population std, n) over the runs that report it."""
    items = runs.runs if isinstance(runs, RunSet) else list(runs)
    if not items:
        raise StatisticsError("aggregate needs at least one run")
    names = sorted({k for r in items for k, v in r.items() if _is_metric(v)})
    out = {}
    for name in names:
        vals = [float(r[name]) for r in items if _is_metric(r.get(name))]
        out[name] = (mean(vals), pstdev(vals), len(vals))
    return out


def group_runs(records: Iterable[tuple[tuple[str, ...], dict[str, Any]]]) -> list[RunSet]:
    sets: dict[tuple[str, ...], RunSet] = {}
    for key, score in records:
        key = tuple(str(k) for k in key)
        sets.setdefault(key, RunSet(key)).add(key, score)
    return [sets[k] for k in sorted(sets)]


# -- inferential -------------------------------------------------------------


def paired_t_test(xs: Sequence[float], ys: Sequence[float]) -> StatResult:
    """Two-sided paired t-test on d = ys - xs (sample variance, df = n - 1)."""
    if len(xs) != len(ys):
        raise StatisticsError("paired samples must have equal length")
    n = len(xs)
    if n < 2:
        raise StatisticsError("paired t-test needs at least two pairs")
    d = [y - x for x, y in zip(xs, ys)]
    md = mean(d)
    var = math.fsum((v - md) ** 2 for v in d) / (n - 1)
    df = n - 1
    if var == 0.0:
        if md == 0.0:
            return StatResult(0.0, df, 1.0, True, n)
        return StatResult(math.copysign(math.inf, md), df, 0.0, True, n)
    t = md / math.sqrt(var / n)
    return StatResult(t, df, t_sf_two_sided(t, df), False, n)


def pearson_r(xs: Sequence[float], ys: Sequence[float]) -> StatResult:
    """Product-moment correlation; p from t = r * sqrt(df / (1 - r^2)), df = n - 2."""
    if len(xs) != len(ys):
        raise StatisticsError("samples must have equal length")
    n = len(xs)
    if n < 3:
        raise StatisticsError("correlation needs at least three pairs")
    mx, my = mean(xs), mean(ys)
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    syy = math.fsum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        raise StatisticsError("correlation undefined for zero variance")
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    r = max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))
    df = n - 2
    if abs(r) == 1.0:
        return StatResult(r, df, 0.0, True, n)
    t = r * math.sqrt(df / (1.0 - r * r))
    return StatResult(r, df, t_sf_two_sided(t, df), False, n)


# -- export ------------------------------------------------------------------


def _fmt(value: float) -> str:
    return repr(float(value))


def report_rows(runsets: Sequence[RunSet]) -> list[dict[str, Any]]:
    rows = []
    for rs in sorted(runsets, key=lambda s: s.key):
        if not rs.runs:
            continue
        for metric, (m, s, n) in aggregate(rs).items():
            row = dict(zip(KEY_FIELDS, rs.key))
            row.update(metric=metric, mean=_fmt(m), std=_fmt(s), n=n,
                       config_digest=rs.config_digest,
                       master_seed="" if rs.master_seed is None else rs.master_seed)
            rows.append(row)
    return rows


def render_csv(runsets: Sequence[RunSet]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(report_rows(runsets))
    return buf.getvalue()


def render_stats(stats: dict[str, StatResult | dict[str, Any]], meta: dict[str, Any] | None = None) -> str:
    body = {k: (v.as_dict() if isinstance(v, StatResult) else v) for k, v in stats.items()}
    doc = {"meta": meta or {}, "stats": body}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def export_report(
    runsets: Sequence[RunSet],
    stats: dict[str, StatResult | dict[str, Any]],
    csv_path: str | Path,
    json_path: str | Path,
    meta: dict[str, Any] | None = None,
) -> None:
    """Write the aggregate CSV and the stats JSON; identical inputs give identical bytes."""
    Path(csv_path).write_text(render_csv(runsets), encoding="utf-8")
    Path(json_path).write_text(render_stats(stats, meta), encoding="utf-8")
