"""Runtime scaling smoke test for the mechanism."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Sequence

from .choice import choice_functions
from .core import Instance
from .generators import random_preferences, random_school
from .mechanism import spda

ENVELOPE_EXPONENT = 4
FUDGE = 2.0


@dataclass
class BenchResult:
    sizes: list[int]
    seconds: list[float]
    n_schools: int
    capacity: int
    # measured growth over envelope growth between consecutive sizes
    ratios: list[float] = field(default_factory=list)

    @property
    def within_envelope(self) -> bool:
        return all(r <= FUDGE for r in self.ratios)


def bench_instance(seed: int, n: int, n_schools: int, capacity: int):
    rng = random.Random(seed)
    schools = tuple(random_school(rng, f"s{j + 1}", n, capacity, 2) for j in range(n_schools))
    inst = Instance(tuple(str(i + 1) for i in range(n)), schools)
    return inst, random_preferences(rng, n, n_schools, p_accept=1.0)


def run_bench(sizes: Sequence[int] = (20, 40, 80), n_schools: int = 3, capacity: int = 5,
              reps: int = 3, seed: int = 0) -> BenchResult:
    """Best-of-``reps`` time of the mechanism per size, fresh choice memo each run."""
    seconds = []
    for n in sizes:
        best = float("inf")
        for r in range(reps):
            inst, P = bench_instance(seed * 1000 + r, n, n_schools, capacity)
            t0 = time.perf_counter()
            spda(inst, P, choice_functions(inst))
            best = min(best, time.perf_counter() - t0)
        seconds.append(best)
    res = BenchResult(list(sizes), seconds, n_schools, capacity)
    for (n1, t1), (n2, t2) in zip(zip(sizes, seconds), zip(sizes[1:], seconds[1:])):
        res.ratios.append((t2 / t1) / (n2 / n1) ** ENVELOPE_EXPONENT)
    return res
