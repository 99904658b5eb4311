"""Print one oracle session as a readable conversation, for inspecting prompts and feedback.

Usage: python scripts/show_session.py --task wcst --difficulty hard --notes
"""

from __future__ import annotations

import argparse

from neurocog.harness import make_agent, make_env, run_session
from neurocog.orchestration.plan import ORACLE_FOR
from neurocog.harness.agents import AgentConfig
from neurocog.rapm import generate_item


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--task", choices=sorted(ORACLE_FOR), default="swm")
    p.add_argument("--difficulty", choices=["easy", "hard"], default="easy")
    p.add_argument("--modality", default="text")
    p.add_argument("--notes", action="store_true")
    p.add_argument("--hint", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-turns", type=int, default=6, help="turns to print (0 = all)")
    args = p.parse_args()

    spec = {"task": args.task, "seed": args.seed}
    if args.task.startswith("rapm"):
        spec.update(hint=args.hint, item=generate_item(args.seed).to_dict())
    else:
        spec.update(difficulty=args.difficulty, modality=args.modality, notes=args.notes)
        if args.task == "wcst":
            spec["ambiguity"] = "off" if args.difficulty == "easy" else "first"
    tr = run_session(make_env(spec), make_agent(AgentConfig(ORACLE_FOR[args.task])))

    limit = 2 + 2 * args.max_turns if args.max_turns else len(tr.messages)
    for m in tr.messages[:limit]:
        print(f"--- {m['role']}")
        print(m["content"])
        if m.get("image"):
            print(f"[svg stimulus, {len(m['image'])} bytes]")
    if limit < len(tr.messages):
        print(f"... {len(tr.messages) - limit} more messages")
    print("--- score")
    for k, v in sorted(tr.score.items()):
        print(f"{k}: {v}")


if __name__ == "__main__":
    main()
