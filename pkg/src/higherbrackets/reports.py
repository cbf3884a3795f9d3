"""Verification reports: verdicts plus exact, re-parseable witnesses."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Case:
    check: str
    inputs: list[str]
    residual: str
    arity: int | None = None
    trial: int | None = None

    def to_dict(self) -> dict:
        d = {"check": self.check, "inputs": list(self.inputs), "residual": self.residual}
        if self.arity is not None:
            d["arity"] = self.arity
        if self.trial is not None:
            d["trial"] = self.trial
        return d


@dataclass
class Report:
    """Outcome of a randomized or exhaustive identity check.

    ``verdicts`` maps a check name (e.g. ``"n=3"``) to pass/fail.  Every
    failure carries a :class:`Case` whose residual is an exact printed
    expression.  ``notes`` hold observations that are not failures, such as
    a witness found by a best-effort search.
    """

    command: str
    seed: int | None = None
    trials: int = 0
    verdicts: dict[str, bool] = field(default_factory=dict)
    cases: list[Case] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    witnesses: list[Case] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values()) and not self.cases

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def fail(self, check: str, inputs, residual: str, arity=None, trial=None):
        self.verdicts[check] = False
        self.cases.append(Case(check, list(inputs), residual, arity, trial))

    def ok(self, check: str):
        self.verdicts.setdefault(check, True)

    def merge(self, other: Report, prefix: str = "") -> Report:
        for k, v in other.verdicts.items():
            key = prefix + k
            self.verdicts[key] = self.verdicts.get(key, True) and v
        for c in other.cases:
            self.cases.append(Case(prefix + c.check, c.inputs, c.residual, c.arity, c.trial))
        self.witnesses.extend(other.witnesses)
        self.notes.extend(other.notes)
        self.trials += other.trials
        return self

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "seed": self.seed,
            "verdict": self.verdict,
            "trials": self.trials,
            "verdicts": {k: ("pass" if v else "fail") for k, v in sorted(self.verdicts.items())},
            "cases": [c.to_dict() for c in self.cases],
            "witnesses": [c.to_dict() for c in self.witnesses],
            "notes": list(self.notes),
        }

    def summary(self) -> str:
        bad = [k for k, v in self.verdicts.items() if not v]
        tail = f" failing: {', '.join(sorted(bad))}" if bad else ""
        return f"{self.command}: {self.verdict} ({self.trials} trials){tail}"
