"""Check results, witnesses, and report assembly.

Every verifier in the package reports through this module: a check either
passes, fails with printed residual witnesses, is skipped because an
earlier check it depends on failed, or errors on ill-formed input.  The
per-check random stream is derived from (seed, check name), so checks can
run in any order, or concurrently, without changing their verdicts, and a
report is reproducible byte for byte apart from timings.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field

__all__ = ["CheckConfig", "Witness", "CheckResult", "Check", "Report"]

MAX_WITNESSES = 5


@dataclass(frozen=True)
class CheckConfig:
    """Trial count, degree bound and seed for randomized identity checks."""

    seed: int = 0
    trials: int = 8
    max_degree: int = 2

    def rng_for(self, check_name):
        # string seeding hashes with sha512, so this is platform-stable
        return random.Random("%d:%s" % (self.seed, check_name))


@dataclass
class Witness:
    inputs: dict
    residual: str

    def to_dict(self):
        return {"inputs": dict(self.inputs), "residual": self.residual}


@dataclass
class CheckResult:
    name: str
    status: str                       # pass | fail | skipped | error
    witnesses: list = field(default_factory=list)
    note: str = ""
    seed: int = 0
    trials: int = 0
    max_degree: int = 0
    time_s: float = 0.0

    @property
    def passed(self):
        return self.status == "pass"

    def to_dict(self, timing=True):
        d = {
            "name": self.name,
            "status": self.status,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "seed": self.seed,
            "trials": self.trials,
            "max_degree": self.max_degree,
        }
        if self.note:
            d["note"] = self.note
        if timing:
            d["time_s"] = round(self.time_s, 6)
        return d


class Check:
    """Accumulator for one named check.

    Usage: c = Check("courant.axiom_2", config); record witnesses with
    c.witness(residual, c1=..., c2=...); finish with c.result().
    """

    def __init__(self, name, config=None):
        self.name = name
        self.config = config or CheckConfig()
        self.witnesses = []
        self.note = ""
        self._t0 = time.perf_counter()
        self._truncated = False

    def rng(self):
        return self.config.rng_for(self.name)

    def witness(self, residual, **inputs):
        if len(self.witnesses) >= MAX_WITNESSES:
            self._truncated = True
            return
        printed = {k: str(v) for k, v in inputs.items()}
        self.witnesses.append(Witness(printed, str(residual)))

    @property
    def failed(self):
        return bool(self.witnesses)

    def result(self, status=None, note=None):
        if status is None:
            status = "fail" if self.witnesses else "pass"
        n = note if note is not None else self.note
        if self._truncated:
            n = (n + "; " if n else "") + "further witnesses truncated"
        return CheckResult(
            name=self.name, status=status, witnesses=self.witnesses,
            note=n, seed=self.config.seed, trials=self.config.trials,
            max_degree=self.config.max_degree,
            time_s=time.perf_counter() - self._t0)

    def skipped(self, why):
        return self.result(status="skipped", note=why)


class Report:
    """An order-stable collection of check results for one suite run."""

    SCHEMA = 1

    def __init__(self, suite, instance=None, config=None):
        self.suite = suite
        self.instance = instance
        self.config = config or CheckConfig()
        self.results = []

    def add(self, *results):
        for r in results:
            if isinstance(r, (list, tuple)):
                self.results.extend(r)
            else:
                self.results.append(r)

    def sorted_results(self):
        return sorted(self.results, key=lambda r: r.name)

    @property
    def all_passed(self):
        return all(r.status == "pass" for r in self.results)

    def to_dict(self, timing=True):
        return {
            "schema": self.SCHEMA,
            "suite": self.suite,
            "instance": self.instance,
            "seed": self.config.seed,
            "trials": self.config.trials,
            "max_degree": self.config.max_degree,
            "all_passed": self.all_passed,
            "checks": [r.to_dict(timing=timing) for r in self.sorted_results()],
        }

    def to_json(self, timing=True):
        return json.dumps(self.to_dict(timing=timing), indent=2) + "\n"

    def to_text(self, timing=True):
        lines = ["suite: %s" % self.suite]
        if self.instance:
            lines.append("instance: %s" % self.instance)
        lines.append("seed=%d trials=%d max_degree=%d"
                     % (self.config.seed, self.config.trials,
                        self.config.max_degree))
        for r in self.sorted_results():
            stamp = ("  [%6.3fs]" % r.time_s) if timing else ""
            lines.append("%-8s %s%s" % (r.status.upper(), r.name, stamp))
            if r.note:
                lines.append("         note: %s" % r.note)
            for w in r.witnesses:
                ins = ", ".join("%s=%s" % kv for kv in sorted(w.inputs.items()))
                lines.append("         witness: %s" % ins)
                lines.append("           residual: %s" % w.residual)
        lines.append("result: %s" % ("PASS" if self.all_passed else "FAIL"))
        return "\n".join(lines) + "\n"
