"""Benchmark loading, presumption insertion and scripted-dialog evaluation.

Records are line-delimited JSON. The shipped seed corpus transcribes the
commands printed in the benchmark description and is deliberately partial;
the full collection lives outside this repository. Reported human success
rates are kept as reference metadata only, never as test targets.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Tuple

from .dialog import DialogSession, SystemAction, user_answer
from .errors import ScriptExhausted, ValidationError

DOMAINS = ("restricted", "everyday")
BECAUSE_TYPES = ("goal", "anti-goal", "modifier", "conjunction")

#: reference numbers reported for the original human study; metadata only
REFERENCE_METADATA = {
    "success_rates": {
        "no_feedback": {"novice": 0.0, "expert": 0.0},
        "soft_unification": {"novice": 0.1561, "expert": 0.35},
        "oracle_unification": {"novice": 0.2162, "expert": 0.4571},
    },
    "rules_contributed": 96,
    "unique_rules": 31,
    "command_counts": {"restricted": 83, "everyday": 77},
}


@dataclass
class CommandRecord:
    command: str
    domain: str
    because_type: str
    template: int
    presumptions: List[Tuple[int, str]] = field(default_factory=list)

    def validate(self) -> "CommandRecord":
        if self.domain not in DOMAINS:
            raise ValidationError(self, "domain", f"unknown domain {self.domain!r}")
        if self.because_type not in BECAUSE_TYPES:
            raise ValidationError(self, "because_type",
                                  f"unknown tag {self.because_type!r}")
        if self.template not in (1, 2, 3, 4, 5):
            raise ValidationError(self, "template", "must be 1..5")
        n_words = len(self.command.split())
        for index, text in self.presumptions:
            if not (0 <= index <= n_words):
                raise ValidationError(self, "presumptions",
                                      f"index {index} outside [0, {n_words}]")
            if not text:
                raise ValidationError(self, "presumptions", "empty text")
        return self

    def to_json(self) -> str:
        return json.dumps({
            "command": self.command, "domain": self.domain,
            "because_type": self.because_type, "template": self.template,
            "presumptions": [[i, t] for i, t in self.presumptions],
        }, sort_keys=True)


def load_dataset(path) -> List[CommandRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            raw = json.loads(line)
            record = CommandRecord(
                command=raw["command"], domain=raw["domain"],
                because_type=raw["because_type"], template=raw["template"],
                presumptions=[(int(i), str(t))
                              for i, t in raw.get("presumptions", [])])
            records.append(record.validate())
    return records


def dataset_stats(records: List[CommandRecord]) -> Dict[str, int]:
    counts = Counter()
    for r in records:
        counts[f"{r.domain}/{r.because_type}"] += 1
        counts[r.domain] += 1
    counts["total"] = len(records)
    return dict(counts)


def insert_presumptions(record: CommandRecord) -> str:
    """Command text with every presumption spliced in at its word index.

    Indices address the original command; insertions apply from the highest
    index down so earlier splices never shift later ones. Ties keep their
    listed order.
    """
    words = record.command.split()
    order = sorted(enumerate(record.presumptions),
                   key=lambda item: (item[1][0], item[0]), reverse=True)
    for _, (index, text) in order:
        words[index:index] = text.split()
    return " ".join(words)


@dataclass
class ReplayScript:
    task_id: str
    command: str
    turns: List[str]
    expected: str  # "succeed" | "fail"

    def validate(self, n: int = 3) -> "ReplayScript":
        if self.expected not in ("succeed", "fail"):
            raise ValidationError(self, "expected", self.expected)
        if len(self.turns) > n + 1:
            raise ValidationError(self, "turns", f"more than n+1={n + 1} turns")
        return self


def load_scripts(path, n: int = 3) -> List[ReplayScript]:
    scripts = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            raw = json.loads(line)
            scripts.append(ReplayScript(
                task_id=raw["task_id"], command=raw["command"],
                turns=list(raw.get("turns", [])),
                expected=raw["expected"]).validate(n))
    return scripts


@dataclass
class TaskOutcome:
    task_id: str
    outcome: str          # "succeed" | "fail"
    expected: str
    matched: bool
    turns_used: int
    note: str = ""
    actions: List[dict] = field(default_factory=list)
    rules: List[str] = field(default_factory=list)
    presumptions: List[dict] = field(default_factory=list)


@dataclass
class EvalReport:
    success_rate: float
    outcomes: List[TaskOutcome]
    rules_contributed: int
    unique_rules: int
    warnings: List[str] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "success_rate": self.success_rate,
            "rules_contributed": self.rules_contributed,
            "unique_rules": self.unique_rules,
            "warnings": self.warnings,
            "reference": REFERENCE_METADATA,
            "outcomes": [{
                "task_id": o.task_id, "outcome": o.outcome,
                "expected": o.expected, "matched": o.matched,
                "turns_used": o.turns_used, "note": o.note,
                "actions": o.actions, "rules": o.rules,
                "presumptions": o.presumptions,
            } for o in self.outcomes],
        }


EngineFactory = Callable[[str], Tuple[DialogSession, SystemAction]]


def evaluate(scripts: List[ReplayScript], engine_factory: EngineFactory
             ) -> EvalReport:
    """Replay every script; a task succeeds when the engine says Succeed.

    A script that runs out of turns while the engine is still asking counts
    as a failure (note "exhausted").
    """
    outcomes: List[TaskOutcome] = []
    warnings: List[str] = []
    all_rules: List[str] = []
    for script in scripts:
        actions: List[dict] = []
        note = ""
        try:
            session, action = engine_factory(script.command)
            actions.append(action.to_record())
            turns_used = 0
            while action.type == "ask":
                if turns_used >= len(script.turns):
                    raise ScriptExhausted(script.task_id)
                action = user_answer(session, script.turns[turns_used])
                turns_used += 1
                actions.append(action.to_record())
            outcome = "succeed" if action.type == "succeed" else "fail"
            rules = list(session.contributed_rules)
            presumptions = [p.to_record() for p in session.presumptions]
        except ScriptExhausted:
            outcome, turns_used = "fail", len(script.turns)
            note = "exhausted"
            rules = list(session.contributed_rules)
            presumptions = []
        except Exception as exc:  # engine errors count as failures, recorded
            outcome, turns_used, rules, presumptions = "fail", 0, [], []
            note = f"error: {exc}"
        all_rules.extend(rules)
        outcomes.append(TaskOutcome(
            task_id=script.task_id, outcome=outcome, expected=script.expected,
            matched=outcome == script.expected, turns_used=turns_used,
            note=note, actions=actions, rules=rules,
            presumptions=presumptions))
    if outcomes:
        rate = sum(1 for o in outcomes if o.outcome == "succeed") / len(outcomes)
    else:
        rate = 0.0
        warnings.append("empty task list; success_rate undefined, reported as 0")
    return EvalReport(success_rate=rate, outcomes=outcomes,
                      rules_contributed=len(all_rules),
                      unique_rules=len(set(all_rules)), warnings=warnings)


def write_report(report: EvalReport, outdir) -> Dict[str, str]:
    """Write report.json, outcomes.tsv and rendered figures under `outdir`."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {}

    json_path = outdir / "report.json"
    json_path.write_text(json.dumps(report.to_record(), indent=2) + "\n",
                         encoding="utf-8")
    paths["report"] = str(json_path)

    tsv_path = outdir / "outcomes.tsv"
    with open(tsv_path, "w", encoding="utf-8") as fh:
        fh.write("task_id\toutcome\texpected\tmatched\tturns_used\t"
                 "rules_contributed\tnote\n")
        for o in report.outcomes:
            fh.write(f"{o.task_id}\t{o.outcome}\t{o.expected}\t"
                     f"{int(o.matched)}\t{o.turns_used}\t{len(o.rules)}\t"
                     f"{o.note}\n")
    paths["outcomes"] = str(tsv_path)

    figures = outdir / "figures"
    figures.mkdir(exist_ok=True)
    paths.update(_render_figures(report, figures))
    return paths


def _render_figures(report: EvalReport, figdir: Path) -> Dict[str, str]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    paths = {}
    counts = Counter(o.outcome for o in report.outcomes)
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    labels = ["succeed", "fail"]
    ax.bar(labels, [counts.get(l, 0) for l in labels],
           color=["#4c9f70", "#c45b4d"])
    ax.set_ylabel("tasks")
    ax.set_title(f"Replay outcomes (success rate {report.success_rate:.0%})")
    fig.tight_layout()
    out = figdir / "outcomes.png"
    fig.savefig(out, dpi=150)
    plt.close(fig)
    paths["outcomes_figure"] = str(out)

    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    per_task = [len(o.rules) for o in report.outcomes]
    ax.bar(range(len(per_task)), per_task, color="#4a6fa5")
    ax.set_xlabel("task")
    ax.set_ylabel("rules contributed")
    ax.set_title(f"Learned rules: {report.rules_contributed} total, "
                 f"{report.unique_rules} unique")
    fig.tight_layout()
    out = figdir / "rules.png"
    fig.savefig(out, dpi=150)
    plt.close(fig)
    paths["rules_figure"] = str(out)
    return paths
