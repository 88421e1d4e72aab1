"""Brute-force ground truth.

Every search here is deliberately naive: plain enumeration plus
feasibility checks, bounded by a node budget.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Optional, Sequence, Union

from .digraph import Digraph, Embedding, RayLabel, ResultCapExceeded
from .rays import RaySpec, prefix_isomorphic
from .tribe import Tribe, avoids


@dataclass(frozen=True)
class SearchBudget:
    max_nodes: int = 2_000_000
    max_results: int = 100_000
    time_hint: Optional[float] = None

    def __post_init__(self) -> None:
        if self.max_nodes < 1 or self.max_results < 1:
            raise ValueError("budgets must be positive")

    @classmethod
    def from_env(cls, default: int = 2_000_000) -> "SearchBudget":
        raw = os.environ.get("RAYLAB_BUDGET")
        return cls(max_nodes=int(raw) if raw else default)


class BudgetExceeded(RuntimeError):
    def __init__(self, best: int) -> None:
        self.best = best
        super().__init__(f"search budget exceeded (best found: {best})")


@dataclass(frozen=True)
class AtLeast:
    k: int


@dataclass(frozen=True)
class Exactly:
    k: int


@dataclass(frozen=True)
class OverBudget:
    best: int


CopyCount = Union[AtLeast, Exactly, OverBudget]


class _Counter:
    def __init__(self, budget: SearchBudget) -> None:
        self.left = budget.max_nodes

    def tick(self) -> bool:
        self.left -= 1
        return self.left >= 0


def all_embeddings(D: Digraph, spec: RaySpec, length: int,
                   budget: SearchBudget = SearchBudget()) -> list[Embedding]:
    out: list[Embedding] = []
    for v in D.vertices:
        out.extend(D.trace_pattern(v, spec, length, budget.max_results))
        if len(out) > budget.max_results:
            raise BudgetExceeded(0)
    return out


def max_disjoint_copies(D: Digraph, spec: RaySpec, prefix_len: int, target: int,
                        budget: SearchBudget = SearchBudget()) -> CopyCount:
    """Largest family of pairwise vertex-disjoint embeddings of the prefix,
    stopping early once ``target`` is reached."""
    if prefix_len < 1:
        raise ValueError("prefix_len must be >= 1")
    try:
        cands = [e.vertex_set() for e in all_embeddings(D, spec, prefix_len, budget)]
    except (BudgetExceeded, ResultCapExceeded):
        return OverBudget(0)
    counter = _Counter(budget)
    best = 0

    def search(start: int, used: frozenset[int], size: int) -> bool:
        nonlocal best
        best = max(best, size)
        if best >= target:
            return True
        for i in range(start, len(cands)):
            if not counter.tick():
                raise BudgetExceeded(best)
            if not cands[i] & used:
                if search(i + 1, used | cands[i], size + 1):
                    return True
        return False

    try:
        search(0, frozenset(), 0)
    except BudgetExceeded as exc:
        return OverBudget(exc.best)
    return AtLeast(target) if best >= target else Exactly(best)


@dataclass(frozen=True)
class Confined:
    label: RayLabel


@dataclass(frozen=True)
class Mixed:
    labels: tuple


def tail_confinement(D: Digraph, emb: Embedding, window: int) -> Union[Confined, Mixed]:
    if window > len(emb):
        raise ValueError("window longer than the embedding")
    arcs = [D.arc(a) for a in emb.arcs[len(emb) - window:]]
    labels = tuple(dict.fromkeys(a.label for a in arcs))
    if len(labels) == 1 and labels[0] is not None:
        idx = [a.index for a in arcs]
        diffs = {y - x for x, y in zip(idx, idx[1:])}
        if len(idx) <= 1 or diffs in ({1}, {-1}):
            return Confined(labels[0])
    return Mixed(labels)


# -- dipaths ---------------------------------------------------------------


def strict_dipaths(H: Digraph, U: Iterable[int], W: Iterable[int]) -> list[tuple[int, ...]]:
    """All directed U--W paths meeting U only in the first and W only in the
    last vertex (a single vertex of U and W counts)."""
    U, W = set(U) & set(H.vertices), set(W) & set(H.vertices)
    out = []
    for u in sorted(U):
        if u in W:
            out.append((u,))
            continue
        stack = [(u, (u,))]
        while stack:
            x, path = stack.pop()
            for y, _ in H.successors(x):
                if y in path or y in U:
                    continue
                if y in W:
                    out.append(path + (y,))
                else:
                    stack.append((y, path + (y,)))
    return out


def _max_by_start(groups: Sequence[Sequence[frozenset[int]]], counter: _Counter,
                  stop_at: Optional[int] = None) -> int:
    """Pick at most one candidate per group, pairwise disjoint; maximise
    the number picked."""
    best = 0

    def search(g: int, used: frozenset[int], size: int) -> bool:
        nonlocal best
        best = max(best, size)
        if stop_at is not None and best >= stop_at:
            return True
        if g == len(groups):
            return False
        for cand in groups[g]:
            if not counter.tick():
                raise BudgetExceeded(best)
            if not cand & used and search(g + 1, used | cand, size + 1):
                return True
        return search(g + 1, used, size)

    search(0, frozenset(), 0)
    return best


def brute_max_disjoint_dipaths(H: Digraph, U: Iterable[int], W: Iterable[int],
                               budget: SearchBudget = SearchBudget()) -> int:
    paths = strict_dipaths(H, U, W)
    by_start: dict[int, list[frozenset[int]]] = {}
    for p in paths:
        by_start.setdefault(p[0], []).append(frozenset(p))
    groups = [by_start[u] for u in sorted(by_start)]
    return _max_by_start(groups, _Counter(budget))


def out_dipaths_of_length(D: Digraph, x: int, length: int) -> list[tuple[int, ...]]:
    out = []
    stack = [(x, (x,))]
    while stack:
        v, path = stack.pop()
        if len(path) - 1 == length:
            out.append(path)
            continue
        for y, _ in D.successors(v):
            if y not in path:
                stack.append((y, path + (y,)))
    return out


def brute_disjoint_out_dipaths(D: Digraph, X: Iterable[int], n: int, min_len: int,
                               budget: SearchBudget = SearchBudget()) -> bool:
    """Whether n pairwise disjoint out-dipaths of length >= min_len start in X."""
    groups = [[frozenset(p) for p in out_dipaths_of_length(D, x, min_len)]
              for x in sorted(set(X) & set(D.vertices))]
    groups = [g for g in groups if g]
    return _max_by_start(groups, _Counter(budget), stop_at=n) >= n


# -- forked selections -----------------------------------------------------


def is_forked_selection(t: Tribe, layers: Sequence[Sequence[Embedding]], max_layer: int) -> bool:
    if len(layers) != max_layer + 1:
        return False
    members = [m for layer in layers for m in layer]
    if len(set(members)) != len(members):
        return False
    for n, layer in enumerate(layers):
        if len(layer) != n:
            return False
        if n and not any(set(layer) <= set(src) for src in t.layers):
            return False
    return all(avoids(a, b, t.hat_len) for a, b in combinations(members, 2))


def enumerate_forked_selections(t: Tribe, max_layer: int,
                                budget: SearchBudget = SearchBudget()
                                ) -> Iterator[tuple[tuple[Embedding, ...], ...]]:
    """Every sequence (F_0, ..., F_max_layer) with |F_n| = n, each F_n inside
    one input layer, distinct members, forked at the hat.  F_n is reported as
    a tuple in input-layer order."""
    counter = _Counter(budget)
    candidates: dict[int, list[tuple[Embedding, ...]]] = {}
    for n in range(1, max_layer + 1):
        seen = set()
        opts = []
        for src in t.layers:
            for subset in combinations(src, n):
                key = frozenset(subset)
                if key not in seen and all(avoids(a, b, t.hat_len)
                                           for a, b in combinations(subset, 2)):
                    seen.add(key)
                    opts.append(subset)
        candidates[n] = opts

    def extend(n: int, chosen: list, used: list[Embedding]):
        if n > max_layer:
            yield tuple([()] + chosen)
            return
        for subset in candidates[n]:
            if not counter.tick():
                raise BudgetExceeded(len(chosen))
            if any(m in used for m in subset):
                continue
            if all(avoids(a, b, t.hat_len) for a in subset for b in used):
                yield from extend(n + 1, chosen + [subset], used + list(subset))

    yield from extend(1, [], [])


# -- periodicity -----------------------------------------------------------


@dataclass(frozen=True)
class Aperiodic:
    pass


@dataclass(frozen=True)
class PeriodicWitness:
    k1: int
    k2: int


def periodicity_probe(spec: RaySpec, shift_bound: int, window: int
                      ) -> Union[Aperiodic, PeriodicWitness]:
    """First pair k1 < k2 <= shift_bound whose tails agree on ``window`` arcs."""
    if shift_bound < 1 or window < 1:
        raise ValueError("bounds must be >= 1")
    for k1 in range(shift_bound + 1):
        for k2 in range(k1 + 1, shift_bound + 1):
            if prefix_isomorphic(spec, k1, spec, k2, window):
                return PeriodicWitness(k1, k2)
    return Aperiodic()
