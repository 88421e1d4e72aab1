"""Tribes of disjoint embeddings and extraction of forked subtribes.

A member's *hat* is the vertex set of its first ``hat_len`` arcs (empty when
``hat_len`` is 0).  A tribe is forked when no member's hat meets any other
member at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import chain, combinations
from typing import Optional, Sequence

from .digraph import Embedding
from .rays import RaySpec


class InsufficientThickness(ValueError):
    def __init__(self, n: int, bound: int, largest: int, detail: str = "") -> None:
        self.n, self.bound, self.largest = n, bound, largest
        msg = (f"layer {n} cannot be drawn: need a refined layer of size >= {bound}, "
               f"largest available is {largest}")
        super().__init__(msg + (f" ({detail})" if detail else ""))


@dataclass(frozen=True)
class Tribe:
    layers: tuple[tuple[Embedding, ...], ...]
    pattern: RaySpec
    hat_len: int = 0
    sources: tuple[Optional[int], ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", tuple(tuple(layer) for layer in self.layers))
        for layer in self.layers:
            seen: set[int] = set()
            for member in layer:
                if len(member) < self.hat_len:
                    raise ValueError("member shorter than the hat")
                if seen & member.vertex_set():
                    raise ValueError("members of a layer must be pairwise disjoint")
                seen |= member.vertex_set()

    @property
    def hat_size(self) -> int:
        """Number of hat vertices, ``h``."""
        return self.hat_len + 1 if self.hat_len > 0 else 0

    def hat(self, member: Embedding) -> frozenset[int]:
        if self.hat_len == 0:
            return frozenset()
        return frozenset(member.vertices[: self.hat_len + 1])

    def members(self) -> list[Embedding]:
        out: list[Embedding] = []
        seen: set[Embedding] = set()
        for layer in self.layers:
            for member in layer:
                if member not in seen:
                    seen.add(member)
                    out.append(member)
        return out

    def layer_sizes(self) -> list[int]:
        return [len(layer) for layer in self.layers]


def is_thick_upto(t: Tribe, n: int) -> bool:
    if n < 1:
        raise ValueError("n must be >= 1")
    return max(t.layer_sizes(), default=0) >= n


def _hat(member: Embedding, hat_len: int) -> frozenset[int]:
    return frozenset(member.vertices[: hat_len + 1]) if hat_len > 0 else frozenset()


def avoids(a: Embedding, b: Embedding, hat_len: int) -> bool:
    """Neither member's hat meets the other member."""
    va, vb = a.vertex_set(), b.vertex_set()
    return not (_hat(a, hat_len) & vb) and not (_hat(b, hat_len) & va)


def is_forked(t: Tribe) -> bool:
    if t.hat_len == 0:
        return True
    members = t.members()
    hats = [t.hat(m) for m in members]
    sets = [m.vertex_set() for m in members]
    for i in range(len(members)):
        for j in range(len(members)):
            if i != j and hats[i] & sets[j]:
                return False
    return True


@dataclass
class _Search:
    tribe: Tribe
    sizes: tuple[int, ...]
    max_choice: Optional[int]
    budget: int
    nodes: int = 0
    deepest: tuple[int, int, int] = (0, 0, 0)
    pigeonhole_checks: int = 0


def forked_subtribe(t: Tribe, max_layer: int, max_choice: Optional[int] = 20,
                    budget: int = 200_000, sizes: Optional[Sequence[int]] = None) -> Tribe:
    """Subtribe with layers of sizes ``0, 1, ..., max_layer`` forked at the hat.

    Layer ``n`` is an ``n``-subset of a layer ``L`` of size at least ``h + n``
    of the current refined tribe.  The remaining layers are cut down to the
    members compatible with the chosen subset.  The subset tried first is the
    one the pigeonhole selector map favours on the largest remaining layer;
    other subsets and layers are tried only when a later layer cannot be
    drawn.  A layer larger than ``max_choice`` is refused when it would be
    drawn from (``None`` lifts the guard).

    ``sizes`` replaces the default sizes ``1..max_layer`` of the drawn layers.
    """
    if max_layer < 0:
        raise ValueError("max_layer must be >= 0")
    sizes = tuple(range(1, max_layer + 1)) if sizes is None else tuple(sizes)
    search = _Search(t, sizes, max_choice, budget)
    start = [(i, layer) for i, layer in enumerate(t.layers) if layer]
    chosen = _extend(search, 1, [], start)
    if chosen is None:
        n, bound, largest = search.deepest
        detail = "search budget exhausted" if search.nodes > budget else ""
        raise InsufficientThickness(n, bound, largest, detail)
    layers = [()] + [members for _, members in chosen]
    sources = (None,) + tuple(src for src, _ in chosen)
    return Tribe(tuple(layers), t.pattern, t.hat_len, sources)


def _selector(layer: Sequence[Embedding], member: Embedding, n: int, hat_len: int):
    """Lexicographically least n-subset (as indices) of ``layer`` avoiding
    ``member``'s hat, or None."""
    hat = _hat(member, hat_len)
    free = [i for i, h in enumerate(layer) if not (h.vertex_set() & hat)]
    return tuple(free[:n]) if len(free) >= n else None


def _pigeonhole_choice(search: _Search, L, others, n: int) -> Optional[tuple[int, ...]]:
    hat_len = search.tribe.hat_len
    hats_of_L = frozenset().union(*(_hat(h, hat_len) for h in L))
    refined = [[h for h in members if not (h.vertex_set() & hats_of_L)] for _, members in others]
    if not refined or not max(map(len, refined)):
        return None
    largest = max(refined, key=len)
    counts: dict[tuple[int, ...], int] = {}
    for member in largest:
        subset = _selector(L, member, n, hat_len)
        assert subset is not None, "hat avoids fewer than n members of L"
        counts[subset] = counts.get(subset, 0) + 1
    best = min(counts, key=lambda s: (-counts[s], s))
    j = math.ceil(len(largest) / math.comb(len(L), n))
    assert counts[best] >= j, "pigeonhole bound violated"
    search.pigeonhole_checks += 1
    return best


def _extend(search: _Search, step: int, chosen, layers):
    if step > len(search.sizes):
        return chosen
    n = search.sizes[step - 1]
    search.nodes += 1
    if search.nodes > search.budget:
        return None
    h = search.tribe.hat_size
    hat_len = search.tribe.hat_len
    order = sorted((k for k, (_, members) in enumerate(layers) if len(members) >= h + n),
                   key=lambda k: (len(layers[k][1]), k))
    if not order:
        largest = max((len(m) for _, m in layers), default=0)
        if step > search.deepest[0]:
            search.deepest = (step, h + n, largest)
        return None
    for k in order:
        src, L = layers[k]
        if search.max_choice is not None and len(L) > search.max_choice:
            raise ValueError(f"layer of size {len(L)} exceeds the subset guard "
                             f"{search.max_choice}; pass max_choice=None to override")
        others = layers[:k] + layers[k + 1:]
        first = _pigeonhole_choice(search, L, others, n)
        rest = (s for s in combinations(range(len(L)), n) if s != first)
        subsets = rest if first is None else chain([first], rest)
        for subset in subsets:
            search.nodes += 1
            if search.nodes > search.budget:
                return None
            picked = tuple(L[i] for i in subset)
            refined = []
            for osrc, members in others:
                keep = tuple(x for x in members if all(avoids(x, p, hat_len) for p in picked))
                if keep:
                    refined.append((osrc, keep))
            result = _extend(search, step + 1, chosen + [(src, picked)], refined)
            if result is not None:
                return result
            if search.nodes > search.budget:
                return None
    return None
