"""Three-valued verdicts, search budgets and an ordered parallel map."""

import contextlib
import contextvars
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

PROVEN = "Proven"
REFUTED = "Refuted"
UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Verdict:
    status: str
    witness: Any = None
    note: str = ""

    @property
    def proven(self):
        return self.status == PROVEN

    @property
    def refuted(self):
        return self.status == REFUTED

    @property
    def unknown(self):
        return self.status == UNKNOWN

    def exit_code(self):
        return {PROVEN: 0, REFUTED: 1, UNKNOWN: 2}[self.status]


def Proven(witness=None, note=""):
    return Verdict(PROVEN, witness, note)


def Refuted(witness=None, note=""):
    return Verdict(REFUTED, witness, note)


def Unknown(bound=None, note=""):
    return Verdict(UNKNOWN, bound, note)


class BudgetExhausted(Exception):
    """Raised by a tracker when a search runs past its budget."""

    def __init__(self, what, limit):
        super().__init__(f"budget exhausted: {what} > {limit}")
        self.what = what
        self.limit = limit

    def bound(self):
        return {"exhausted": self.what, "limit": self.limit}


@dataclass(frozen=True)
class SearchBudget:
    max_elements: int = 200_000
    max_steps: int = 20_000_000
    wall_time: float = 600.0

    def __post_init__(self):
        if self.max_elements <= 0 or self.max_steps <= 0 or self.wall_time <= 0:
            raise ValueError("budget fields must be positive")

    def tracker(self):
        return Tracker(self)

    def as_dict(self):
        # wall time is left out on purpose: reports must not depend on it
        return {"elements": self.max_elements, "steps": self.max_steps}

    @classmethod
    def parse(cls, text):
        """Parse 'elements=...,steps=...,seconds=...' (any subset)."""
        kw = {}
        names = {"elements": "max_elements", "steps": "max_steps", "seconds": "wall_time"}
        for part in filter(None, (p.strip() for p in text.split(","))):
            key, _, val = part.partition("=")
            if key not in names or not val:
                raise ValueError(f"bad budget item {part!r}")
            kw[names[key]] = float(val) if key == "seconds" else int(val)
        return cls(**kw)


DEFAULT_BUDGET = SearchBudget()


@dataclass
class Tracker:
    budget: SearchBudget
    steps: int = 0
    started: float = field(default_factory=time.monotonic)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def step(self, n=1):
        with self._lock:
            self.steps += n
            steps = self.steps
        if steps > self.budget.max_steps:
            raise BudgetExhausted("steps", self.budget.max_steps)
        if steps & 0x3FF < n and time.monotonic() - self.started > self.budget.wall_time:
            raise BudgetExhausted("seconds", self.budget.wall_time)

    def elements(self, count):
        if count > self.budget.max_elements:
            raise BudgetExhausted("elements", self.budget.max_elements)


def as_tracker(budget):
    if budget is None:
        return DEFAULT_BUDGET.tracker()
    if isinstance(budget, Tracker):
        return budget
    return budget.tracker()


_workers = contextvars.ContextVar("ua_workers", default=None)


def worker_count():
    n = _workers.get()
    if n is None:
        n = int(os.environ.get("UA_WORKERS", "1") or 1)
    return max(1, n)


@contextlib.contextmanager
def use_workers(n):
    token = _workers.set(n)
    try:
        yield
    finally:
        _workers.reset(token)


def map_ordered(fn, items):
    """Map fn over items, possibly in threads; results keep input order."""
    items = list(items)
    n = worker_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    ctx = contextvars.copy_context()
    with ThreadPoolExecutor(max_workers=n) as ex:
        futures = [ex.submit(ctx.copy().run, fn, x) for x in items]
        return [f.result() for f in futures]
