"""Plan execution, rescoring from transcripts, and report building.

Output layout under ``<out>/<run-id>/``: ``plan.json``, ``transcripts/*.jsonl``,
``scores.json``, ``report.csv`` and ``stats.json``.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .. import analysis
from ..harness.agents import make_agent
from ..harness.envs import make_env
from ..harness.session import (
    ReplayMismatch,
    Transcript,
    TranscriptError,
    read_transcript,
    replay,
    run_session,
)
from ..rapm import generate_item
from .plan import RunPlan, Trial, variant_label

logger = logging.getLogger(__name__)

SCORES_FILE = "scores.json"
REPORT_FILE = "report.csv"
STATS_FILE = "stats.json"
PLAN_FILE = "plan.json"


@dataclass
class TrialResult:
    trial_id: str
    status: str  # done | skipped | failed
    error: str | None = None


@dataclass
class RunSummary:
    run_dir: Path
    results: list[TrialResult] = field(default_factory=list)

    def count(self, status: str) -> int:
        return sum(r.status == status for r in self.results)

    @property
    def failed(self) -> list[TrialResult]:
        return [r for r in self.results if r.status == "failed"]


def transcript_dir(run_dir: Path) -> Path:
    return Path(run_dir) / "transcripts"


def _dump_json(obj: Any, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def build_env(trial: Trial):
    spec = trial.env_spec()
    if trial.task.startswith("rapm"):
        spec["item"] = generate_item(trial.seed).to_dict()
    return make_env(spec)


def _completed(path: Path) -> bool:
    if not path.exists():
        return False
    try:
        return read_transcript(path).complete
    except (TranscriptError, ValueError, KeyError):
        return False


def run_trial(plan: RunPlan, trial: Trial, run_dir: Path, digest: str, resume: bool = True) -> TrialResult:
    path = transcript_dir(run_dir) / f"{trial.trial_id}.jsonl"
    if resume and _completed(path):
        return TrialResult(trial.trial_id, "skipped")
    try:
        env = build_env(trial)
        cfg = plan.agent_config(trial.task)
        agent = make_agent(cfg)
        info = {"kind": cfg.kind, "model": plan.model_label}
        run_session(env, agent, run_id=plan.run_id, trial_id=trial.trial_id, agent_info=info,
                    config_digest=digest, master_seed=plan.master_seed, path=path)
    except Exception as exc:  # one failing trial must not stop the others
        logger.error("trial %s failed: %s", trial.trial_id, exc)
        return TrialResult(trial.trial_id, "failed", f"{type(exc).__name__}: {exc}")
    return TrialResult(trial.trial_id, "done")


def run_plan(plan: RunPlan, out: str | Path, jobs: int | None = None, resume: bool = True) -> RunSummary:
    """Run every trial of ``plan`` (skipping completed ones), then write scores and report."""
    run_dir = Path(out) / plan.run_id
    transcript_dir(run_dir).mkdir(parents=True, exist_ok=True)
    digest = plan.digest()
    _dump_json({"digest": digest, "plan": plan.to_dict()}, run_dir / PLAN_FILE)
    trials = plan.trials()
    workers = jobs or plan.jobs
    logger.info("run %s: %d trials, %d workers", plan.run_id, len(trials), workers)
    if workers == 1:
        results = [run_trial(plan, t, run_dir, digest, resume) for t in trials]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda t: run_trial(plan, t, run_dir, digest, resume), trials))
    summary = RunSummary(run_dir, results)
    write_scores(run_dir, collect_scores(run_dir))
    write_report(run_dir)
    logger.info("run %s: %d done, %d skipped, %d failed", plan.run_id, summary.count("done"),
                summary.count("skipped"), summary.count("failed"))
    return summary


# -- scores ------------------------------------------------------------------


def score_record(tr: Transcript, score: dict[str, Any]) -> dict[str, Any]:
    spec = tr.spec
    variant = {k: spec[k] for k in ("notes", "hint", "ambiguity") if k in spec}
    if not spec.get("cot", True):
        variant["cot"] = False
    return {
        "trial_id": tr.trial_id,
        "model": str(tr.agent.get("model") or tr.agent.get("kind", "")),
        "task": tr.task,
        "difficulty": spec.get("difficulty", "-"),
        "modality": spec.get("modality", "text"),
        "variant": variant_label(variant),
        "seed": tr.seed,
        "config_digest": tr.config_digest,
        "master_seed": tr.master_seed,
        "score": score,
    }


def _transcripts(run_dir: Path) -> list[Path]:
    d = transcript_dir(run_dir)
    return sorted(d.glob("*.jsonl")) if d.exists() else []


def collect_scores(run_dir: Path) -> list[dict[str, Any]]:
    """Score records of all complete transcripts, as recorded live."""
    out = []
    for path in _transcripts(run_dir):
        tr = read_transcript(path)
        if tr.complete:
            out.append(score_record(tr, tr.score))
    return out


def write_scores(run_dir: Path, records: list[dict[str, Any]]) -> None:
    records = sorted(records, key=lambda r: r["trial_id"])
    digests = sorted({r["config_digest"] for r in records})
    seeds = sorted({r["master_seed"] for r in records if r["master_seed"] is not None})
    meta = {"config_digest": ",".join(digests), "master_seed": seeds[0] if len(seeds) == 1 else seeds}
    _dump_json({"meta": meta, "trials": records}, Path(run_dir) / SCORES_FILE)


@dataclass
class RescoreResult:
    records: list[dict[str, Any]]
    mismatches: list[str]
    incomplete: list[str]


def rescore(run_dir: str | Path) -> RescoreResult:
    """Recompute every score by replaying its transcript; divergences are collected."""
    run_dir = Path(run_dir)
    records, mismatches, incomplete = [], [], []
    for path in _transcripts(run_dir):
        try:
            tr = read_transcript(path)
        except (TranscriptError, ValueError, KeyError) as exc:
            mismatches.append(f"{path.name}: unreadable transcript: {exc}")
            continue
        if not tr.complete:
            incomplete.append(tr.trial_id)
            continue
        try:
            score = replay(tr)
        except (ReplayMismatch, TranscriptError, ValueError, KeyError) as exc:
            mismatches.append(str(exc))
            continue
        records.append(score_record(tr, score))
    stored = run_dir / SCORES_FILE
    if stored.exists() and not mismatches:
        live = {r["trial_id"]: r["score"] for r in json.loads(stored.read_text())["trials"]}
        for r in records:
            if r["trial_id"] in live and live[r["trial_id"]] != r["score"]:
                mismatches.append(f"{r['trial_id']}: {SCORES_FILE} disagrees with replayed score")
    return RescoreResult(records, mismatches, incomplete)


# -- reports -----------------------------------------------------------------


def load_scores(run_dir: Path) -> list[dict[str, Any]]:
    path = Path(run_dir) / SCORES_FILE
    if not path.exists():
        return []
    return json.loads(path.read_text(encoding="utf-8"))["trials"]


def runsets_from_scores(records: list[dict[str, Any]]) -> list[analysis.RunSet]:
    sets: dict[tuple[str, ...], analysis.RunSet] = {}
    for r in records:
        key = tuple(str(r[k]) for k in analysis.KEY_FIELDS)
        if key not in sets:
            sets[key] = analysis.RunSet(key, config_digest=r["config_digest"], master_seed=r["master_seed"])
        sets[key].add(key, r["score"])
    return [sets[k] for k in sorted(sets)]


def pivot(runsets: list[analysis.RunSet]) -> dict[str, dict[str, float]]:
    """model -> {"task/difficulty/modality/variant:metric": mean}."""
    table: dict[str, dict[str, float]] = {}
    for rs in runsets:
        model, *rest = rs.key
        for metric, (m, _s, _n) in analysis.aggregate(rs).items():
            table.setdefault(model, {})["/".join(rest) + ":" + metric] = m
    return table


def read_table(path: str | Path) -> dict[str, dict[str, float]]:
    """CSV with one row per unit: first column the unit name, the rest numeric (blank = missing)."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return {}
    header, table = rows[0], {}
    for row in rows[1:]:
        if not row:
            continue
        cells = {}
        for name, cell in zip(header[1:], row[1:]):
            if cell.strip():
                cells[name] = float(cell)
        table[row[0]] = cells
    return table


def paired_columns(table: dict[str, dict[str, float]], a: str, b: str) -> tuple[list[float], list[float], list[str], list[str]]:
    """Complete pairs of columns a and b, plus the units kept and excluded."""
    xs, ys, kept, dropped = [], [], [], []
    for unit in sorted(table):
        row = table[unit]
        if a in row and b in row and not (math.isnan(row[a]) or math.isnan(row[b])):
            xs.append(row[a])
            ys.append(row[b])
            kept.append(unit)
        else:
            dropped.append(unit)
    return xs, ys, kept, dropped


def compare(table: dict[str, dict[str, float]], a: str, b: str, test: str) -> dict[str, Any]:
    xs, ys, kept, dropped = paired_columns(table, a, b)
    fn = analysis.paired_t_test if test == "paired" else analysis.pearson_r
    out: dict[str, Any] = {"test": test, "x": a, "y": b, "units": kept, "excluded": dropped}
    try:
        out.update(fn(xs, ys).as_dict())
    except analysis.StatisticsError as exc:
        out["error"] = str(exc)
    return out


def write_report(
    run_dir: str | Path,
    table_path: str | Path | None = None,
    paired: list[tuple[str, str]] | None = None,
    correlate: list[tuple[str, str]] | None = None,
) -> dict[str, Any]:
    """Aggregate ``scores.json`` into ``report.csv`` and run the requested comparisons into ``stats.json``."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    runsets = runsets_from_scores(load_scores(run_dir))
    table = read_table(table_path) if table_path else pivot(runsets)
    stats: dict[str, Any] = {}
    for a, b in paired or []:
        stats[f"paired:{a}|{b}"] = compare(table, a, b, "paired")
    for a, b in correlate or []:
        stats[f"pearson:{a}|{b}"] = compare(table, a, b, "pearson")
    digests = sorted({rs.config_digest for rs in runsets})
    seeds = sorted({rs.master_seed for rs in runsets if rs.master_seed is not None})
    meta = {"config_digest": ",".join(digests), "master_seed": seeds[0] if len(seeds) == 1 else seeds}
    analysis.export_report(runsets, stats, run_dir / REPORT_FILE, run_dir / STATS_FILE, meta)
    return stats
