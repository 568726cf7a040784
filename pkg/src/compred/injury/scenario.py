"""Scenario inputs for the priority-tree simulator, and a seeded generator."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from ..machina import library
from ..machina.machine import MultiTapeTM, _execute, value_of
from ..relcore import PreorderTable, random_preorder
from .tree import Tree

__all__ = [
    "Functional",
    "MachineFunctional",
    "TableFunctional",
    "Scenario",
    "ScenarioError",
    "functional_from_json",
    "random_preorder",
    "generate_scenario",
]


class ScenarioError(ValueError):
    pass


class Functional:
    """An oracle computation ``l -> (converged, value, use)`` at a step budget."""

    def compute(self, l: int, oracle: np.ndarray, budget: int) -> tuple:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class MachineFunctional(Functional):
    machine: MultiTapeTM
    ref: Optional[dict] = None

    def compute(self, l, oracle, budget):
        if budget <= 0:
            return False, None, 0
        status, out, _, use = _execute(self.machine, "1" * l, budget, oracle)
        if status != 0:
            return False, None, use
        return True, value_of(out), use

    def to_json(self):
        return dict(self.ref) if self.ref is not None else {"machine": self.machine.to_json()}


@dataclass(frozen=True)
class TableFunctional(Functional):
    """Oracle-independent computations given as ``{l: (value, use)}``."""

    table: Mapping

    def compute(self, l, oracle, budget):
        hit = self.table.get(l)
        if hit is None:
            return False, None, 0
        value, use = hit
        if use > len(oracle):
            return False, None, use
        return True, value, use

    def to_json(self):
        return {"table": {str(k): list(v) for k, v in sorted(self.table.items())}}


def functional_from_json(data: Mapping) -> Functional:
    if "name" in data:
        args = data.get("args", [])
        return MachineFunctional(library.functional(data["name"], *args), dict(data))
    if "machine" in data:
        return MachineFunctional(MultiTapeTM.from_json(data["machine"]))
    if "table" in data:
        table = {}
        for k, v in data["table"].items():
            value, use = v
            table[int(k)] = (int(value), int(use))
        return TableFunctional(table)
    raise ScenarioError(f"functional needs one of name/machine/table, got keys {sorted(data)}")


@dataclass(frozen=True)
class Scenario:
    depth: int
    stages: int
    feeds: Mapping  # level -> tuple of counts, one per stage (last value persists)
    functionals: tuple
    seed: Optional[int] = None

    def __post_init__(self):
        if self.depth < 0 or self.stages < 0:
            raise ScenarioError("depth and stages must be natural")
        feeds = {int(k): tuple(int(c) for c in v) for k, v in self.feeds.items()}
        for level in range(self.depth):
            if level not in feeds or not feeds[level]:
                raise ScenarioError(f"level {level} has no feed")
        for level, seq in feeds.items():
            if any(b < a for a, b in zip(seq, seq[1:])):
                raise ScenarioError(f"feed for level {level} decreases")
        object.__setattr__(self, "feeds", feeds)
        object.__setattr__(self, "functionals", tuple(self.functionals))

    def count(self, level: int, s: int) -> int:
        seq = self.feeds[level]
        return seq[s] if s < len(seq) else seq[-1]

    def functional(self, e: int) -> Optional[Functional]:
        if not self.functionals:
            return None
        return self.functionals[e % len(self.functionals)]

    def tree(self) -> Tree:
        return Tree(self.depth)

    @classmethod
    def from_json(cls, data: Mapping) -> "Scenario":
        funcs = tuple(functional_from_json(f) for f in data.get("functionals", []))
        return cls(int(data["depth"]), int(data["stages"]),
                   {int(k): v for k, v in data["feeds"].items()}, funcs, data.get("seed"))

    def to_json(self) -> dict:
        out = {
            "depth": self.depth,
            "stages": self.stages,
            "feeds": {str(k): list(v) for k, v in sorted(self.feeds.items())},
            "functionals": [f.to_json() for f in self.functionals],
        }
        if self.seed is not None:
            out["seed"] = self.seed
        return out


_GENERATED_FUNCTIONALS = (
    {"name": "const0"},
    {"name": "bit", "args": [0]},
    {"name": "negbit", "args": [0]},
    {"name": "bit", "args": [1]},
    {"name": "const1"},
)


def generate_scenario(seed: int, depth: int, stages: int, convergent: bool = False,
                      preorder: Optional[PreorderTable] = None, early: int = 40,
                      extra_unbounded: float = 0.0) -> tuple:
    """Feeds mirroring a preorder ``R`` on the label indices; returns ``(scenario, R)``.

    For each ``(i, j, e)`` with ``not i R j`` one level carrying that label
    grows without bound; every other level gets at most three early
    increments.  Convergent scenarios freeze all feeds after ``stages // 3``.

    ``extra_unbounded`` lets any other level grow without bound with that
    probability.  The feeds then fit a preorder in which the extra pairs are
    unrelated, with the remaining witnesses below the tree.
    """
    rng = random.Random(seed)
    tree = Tree(depth)
    n = tree.indices()
    R = preorder if preorder is not None else random_preorder(rng, n)
    if R.n < n:
        raise ScenarioError(f"preorder has {R.n} points but the labels use {n} indices")
    groups = {}
    for level in range(depth):
        lab = tree.labels[level]
        if not R(lab.i, lab.j):
            groups.setdefault((lab.i, lab.j, lab.e), []).append(level)
    unbounded = {rng.choice(levels) for _, levels in sorted(groups.items())}
    if extra_unbounded:
        unbounded |= {level for level in range(depth) if rng.random() < extra_unbounded}
    stop = stages // 3 if convergent else stages
    feeds = {}
    for level in range(depth):
        bumps = set()
        if level in unbounded:
            period = rng.randint(1, 4)
            start = rng.randint(1, period)
            bumps.update(range(start, stop + 1, period))
        else:
            for _ in range(rng.randint(0, 3)):
                bumps.add(rng.randint(1, max(1, min(early, stop))))
        count, seq = 0, []
        for s in range(stages + 1):
            if s in bumps and s <= stop:
                count += 1
            seq.append(count)
        feeds[level] = seq
    order = list(_GENERATED_FUNCTIONALS)
    rng.shuffle(order)
    funcs = tuple(functional_from_json(f) for f in order)
    return Scenario(depth, stages, feeds, funcs, seed), R
