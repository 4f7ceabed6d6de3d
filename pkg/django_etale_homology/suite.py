import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .conf import get_setting
from .logging import logger


@dataclass
class CaseResult:
    label: str
    ok: bool
    detail: str = ""


@dataclass
class SuiteResult:
    name: str
    seed: int
    cases: List[CaseResult] = field(default_factory=list)
    duration: float = 0.0

    @property
    def passed(self) -> int:
        return sum(1 for c in self.cases if c.ok)

    @property
    def failures(self) -> List[CaseResult]:
        return [c for c in self.cases if not c.ok]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "seed": self.seed,
            "passed": self.passed,
            "failed": len(self.failures),
            "failures": [{"label": c.label, "detail": c.detail} for c in self.failures],
        }

    def __str__(self):
        icon = "✔️" if self.ok else "❌"
        return f"Suite '{self.name}' {icon} {self.passed}/{len(self.cases)} cases passed"


class Suite:
    """A seeded property check over generated cases.

    The callable receives a numpy random generator and the requested case count, and
    yields one CaseResult per case. Suites are typically registered in `suites.py`."""

    def __init__(
        self,
        name: str,
        callable: Callable,
        module: str,
        cases: int = 20,
        slow: bool = False,
        description: str = "",
    ):
        self.name = name
        self.callable = callable
        self.module = module
        self.cases = cases
        self.slow = slow
        self.description = description

    def run(self, seed: Optional[int] = None, cases: Optional[int] = None) -> SuiteResult:
        if seed is None:
            seed = get_setting("ETALE_DEFAULT_SEED")
        result = SuiteResult(self.name, seed)
        start = time.perf_counter()
        rng = np.random.default_rng(seed)
        for case in self.callable(rng, cases or self.cases):
            if not case.ok:
                logger.warning(f"{self}: case {case.label} failed: {case.detail}")
            result.cases.append(case)
        result.duration = time.perf_counter() - start
        logger.info(str(result))
        return result

    def __str__(self):
        return f"Suite {self.name}"
