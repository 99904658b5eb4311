"""Run the oracle agents over many seeds and print worst-case statistics per level.

Usage: python scripts/oracle_sweep.py --seeds 100
"""

from __future__ import annotations

import argparse
import logging
import statistics
import time

from neurocog import swm, wcst
from neurocog.harness import RapmEnv, SwmEnv, SwmSweeper, WcstEliminator, WcstEnv, make_agent, run_session
from neurocog.harness.agents import AgentConfig
from neurocog.rapm import generate_items

log = logging.getLogger("oracle_sweep")

WCST_LEVELS = [("easy", "off"), ("hard", "off"), ("hard", "first"), ("hard", "rest")]


def sweep_swm(seeds: int) -> None:
    for difficulty in ("easy", "hard"):
        turns, errs, scores = [], [], []
        for seed in range(seeds):
            tr = run_session(SwmEnv(swm.SwmConfig(difficulty=difficulty, seed=seed)), SwmSweeper())
            turns.append(len(tr.turns))
            errs.append(tr.score["n_err"])
            scores.append(tr.score["s_swm"])
        print(f"swm  {difficulty:5s}       min S_swm={min(scores):.3f}  max n_err={max(errs)}  "
              f"turns mean={statistics.mean(turns):.1f} max={max(turns)}")


def sweep_wcst(seeds: int) -> None:
    for difficulty, amb in WCST_LEVELS:
        worst, s_vals, incomplete, pr, fms = 0, [], 0, [], []
        for seed in range(seeds):
            env = WcstEnv(wcst.WcstConfig(difficulty=difficulty, ambiguity=amb, seed=seed))
            s = run_session(env, WcstEliminator()).score
            worst = max(worst, max(s["block_guesses"]))
            s_vals.append(s["s_wcst"])
            pr.append(s["pr"])
            fms.append(s["fms"])
            incomplete += s["completed_rules"] != env.trial.config.rule_instances
        print(f"wcst {difficulty:5s} {amb:5s} max g_i={worst}  min S_wcst={min(s_vals):.3f}  "
              f"incomplete={incomplete}  max PR={max(pr):.3f}  max FMS={max(fms):.3f}")


def sweep_rapm(seeds: int) -> None:
    items = list(generate_items(seeds, 0))
    for mode in ("mc", "gen"):
        agent = make_agent(AgentConfig("oracle-rapm-solver"))
        acc = [run_session(RapmEnv(item, mode), agent).score["accuracy"] for item in items]
        print(f"rapm {mode:5s}       accuracy={statistics.mean(acc):.3f} over {len(items)} items")


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--task", choices=["swm", "wcst", "rapm", "all"], default="all")
    p.add_argument("-v", "--verbose", action="store_true")
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    start = time.perf_counter()
    for name, fn in (("swm", sweep_swm), ("wcst", sweep_wcst), ("rapm", sweep_rapm)):
        if args.task in (name, "all"):
            fn(args.seeds)
    log.info("done in %.1fs", time.perf_counter() - start)


if __name__ == "__main__":
    main()
