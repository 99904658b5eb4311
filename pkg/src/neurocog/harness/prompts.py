"""System prompt templates and per-turn text for every task."""

from __future__ import annotations

TASKS = ("rapm-text-mc", "rapm-text-gen", "swm", "wcst")

RAPM_THINK_BUDGET = 30000
TURN_THINK_BUDGET = 4000

RAPM_INTRO = (
    "You are solving a TEXT-BASED 3x3 pattern matrix (Raven-style). Each cell contains a string; "
    "the bottom-right cell is missing ('?').\n\n"
    "Goal: Infer the rule(s) acting across rows and columns.\n"
)

RAPM_HINT = (
    "Possible dimensions (one or more):\n"
    "- Character set restriction (digits / letters / symbols)\n"
    "- Quantitative constant (exact length / count / unique)\n"
    "- Quantitative progression (arithmetic step across row/column)\n"
    "- Parity / multiple rules (all even / all odd / multiples of N)\n"
    "- Positional constraints (first/last/even/odd positions restricted)\n"
    "- Ordering (ascending / descending / mixed)\n"
    "- Layered combinations (e.g. constant + parity, progression + positional)\n"
)

RAPM_MC = (
    "You will be given 8 answer options (1-8). Select the single option that correctly fills the "
    "missing cell while satisfying ALL inferred row and column constraints.\n"
    "Respond with <answer>NUMBER</answer> using just the chosen option number.\n"
)

RAPM_GEN = (
    "You must GENERATE the exact missing cell string that satisfies ALL inferred row and column "
    "constraints.\n"
    "Respond with <answer>STRING</answer> containing only the candidate string "
    "(no quotes or extra text).\n"
)

SWM_BODY = (
    "You will be performing the Spatial Working Memory task.\n"
    "You will be given {presentation} containing {N_BOXES} yellow boxes{where}.\n"
    "There are {N_TOKENS} types of tokens, hidden in any one of {N_BOXES} boxes.\n"
    "Each token type is represented by a distinct color.\n"
    "Your goal is to find the {N_TOKENS} types of tokens {N_BOXES} times each, by repeatedly "
    "selecting a box to open.\n"
    "A box can contain multiple types of tokens, but only one token of each type.\n"
    "If the box contains multiple tokens, a token with mixed colors corresponding to the tokens "
    "will be shown.\n"
    "Once the token is found, another will be generated in another box.\n"
    "The token will be generated in a box that has never contained a token of that type before "
    "in the trial.\n"
    "The token may be generated in a box that has been opened and found empty before, as long as "
    "it never contained that type of token previously.\n\n"
)
SWM_TEXT_ANSWER = (
    "Your final answer should be a number from 1-{N_BOXES}, the index of the box you selected\n"
)
SWM_IMAGE_ANSWER = (
    "Your final answer should be a grid coordinate (x, y), the grid coordinate of the box you choose\n"
)

WCST_BODY = (
    "You are performing the Wisconsin Card Sorting Test (WCST).\n"
    "You will be shown a given card with a symbol on it, and you will have to match it to one of "
    "four option cards according to an attribute that you have to figure out.\n"
    "The cards will be described by the following attributes:\n"
    "1. Number of symbols\n"
    "2. Color of symbols\n"
    "3. Shape of symbols\n"
)
WCST_HARD_LINE = "4. Background color of the card\n"
WCST_TAIL = (
    "\n"
    'You will be told "Correct!" if you are correct and "Incorrect. Please try again." if you '
    "are incorrect.\n"
    "If you are incorrect, you either made a mistake or the rule has changed.\n"
    "If you believe you have made a mistake, correct it and try again.\n"
    "If you believe the rule has changed, you have to figure out the correct rule to match the "
    "cards.\n"
    "If you are correct, you have to stick with the same attribute until you are incorrect.\n"
    "There is always a true answer in the task, and you have to keep performing the task until "
    "the end of the test.\n"
    "Your final answer should be a number between 1-4 corresponding to the index of the card you "
    "think is the correct match.\n"
)

COT_TURN_TASKS = (
    "Explain your thought process regarding the problem and the feedbacks you received in maximum "
    "{think_budget} tokens wrapped with <think> and </think>. Then, provide a really short summary "
    "of your reasoning after the closing </think> tag.\n"
)
COT_RAPM = (
    "Explain your thought process (max {think_budget} tokens) inside <think>...</think> then give "
    "final answer.\n"
)
NO_COT = "Answer only with your final answer.\n"

SWM_TURN_COT = (
    "Answer concisely. Think step-by-step, utilizing information from previous feedbacks, and "
    "state your reasoning in maximum {think_budget} tokens, wrapped with <think> and </think>. "
    "Then, provide a really short summary of your reasoning after the closing </think> tag."
)


def build_system_prompt(
    task: str,
    *,
    difficulty: str = "easy",
    modality: str = "text",
    hint: bool = False,
    cot: bool = True,
    think_budget: int | None = None,
    n_boxes: int | None = None,
    n_tokens: int | None = None,
) -> str:
    """System prompt for ``task`` with parameters substituted."""
    if task in ("rapm-text-mc", "rapm-text-gen"):
        budget = think_budget or RAPM_THINK_BUDGET
        parts = [RAPM_INTRO, "\n"]
        if hint:
            parts.append(RAPM_HINT + "\n")
        parts.append(RAPM_MC if task == "rapm-text-mc" else RAPM_GEN)
        parts.append(COT_RAPM.format(think_budget=budget) if cot else NO_COT)
        return "".join(parts)
    budget = think_budget or TURN_THINK_BUDGET
    cot_text = COT_TURN_TASKS.format(think_budget=budget) if cot else NO_COT
    if task == "swm":
        if n_boxes is None or n_tokens is None:
            n_boxes, n_tokens = (8, 1) if difficulty == "easy" else (12, 2)
        image = modality != "text"
        body = SWM_BODY.format(
            presentation="an image" if image else "a description",
            where=" in a grid" if image else " numbered 1-{}".format(n_boxes),
            N_BOXES=n_boxes,
            N_TOKENS=n_tokens,
        )
        answer = SWM_IMAGE_ANSWER if image else SWM_TEXT_ANSWER.format(N_BOXES=n_boxes)
        return body + answer + cot_text
    if task == "wcst":
        body = WCST_BODY + (WCST_HARD_LINE if difficulty == "hard" else "") + WCST_TAIL
        return body + cot_text
    raise ValueError(f"unknown task {task!r}")


def answer_instruction(kind: str) -> str:
    what = {
        "box": "a box number",
        "coordinate": "a grid coordinate (x, y)",
        "card": "a number between 1-4",
    }[kind]
    return f"Your final answer should be {what}, wrapped with <answer> and </answer>"
