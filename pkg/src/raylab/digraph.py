"""Finite multidigraphs built from labelled ray prefixes plus vertex
identifications.

Vertex ids are dense integers handed out by the builder.  Identifying two
vertices keeps the smaller id as the live one; arcs are never merged, so the
arc set is the same before and after any identification.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from .rays import IN, OUT, Orientation, RaySpec, orientations


class CapExceeded(RuntimeError):
    pass


class ResultCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True, order=True)
class RayLabel:
    n: int
    m: int

    def __post_init__(self) -> None:
        if not 0 <= self.n <= self.m:
            raise ValueError(f"ray label needs 0 <= n <= m, got ({self.n}, {self.m})")

    def __str__(self) -> str:
        return f"({self.n},{self.m})"


@dataclass(frozen=True)
class Arc:
    id: int
    tail: int
    head: int
    orig_tail: int
    orig_head: int
    label: Optional[RayLabel] = None
    index: Optional[int] = None


@dataclass(frozen=True)
class Identification:
    step: Optional[int]
    merged: int
    members: tuple[int, int]


@dataclass(frozen=True)
class Embedding:
    """A path in the underlying graph, with a traversal flag per arc
    (True when the arc is traversed tail to head)."""

    vertices: tuple[int, ...]
    arcs: tuple[int, ...] = ()
    forward: tuple[bool, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "arcs", tuple(self.arcs))
        object.__setattr__(self, "forward", tuple(self.forward))
        if len(self.arcs) != len(self.vertices) - 1 or len(self.forward) != len(self.arcs):
            raise ValueError("embedding needs one arc and one flag between consecutive vertices")

    def __len__(self) -> int:
        return len(self.arcs)

    @property
    def first(self) -> int:
        return self.vertices[0]

    @property
    def last(self) -> int:
        return self.vertices[-1]

    def word(self) -> tuple[Orientation, ...]:
        return tuple(OUT if f else IN for f in self.forward)

    def vertex_set(self) -> frozenset[int]:
        cached = self.__dict__.get("_vertex_set")
        if cached is None:
            cached = frozenset(self.vertices)
            self.__dict__["_vertex_set"] = cached
        return cached

    def prefix(self, k: int) -> "Embedding":
        """The initial segment with ``k`` arcs."""
        return Embedding(self.vertices[: k + 1], self.arcs[:k], self.forward[:k])

    def suffix(self, k: int) -> "Embedding":
        """The tail starting at vertex index ``k``."""
        return Embedding(self.vertices[k:], self.arcs[k:], self.forward[k:])

    def then(self, other: "Embedding") -> "Embedding":
        if other.first != self.last:
            raise ValueError("embeddings do not share the junction vertex")
        return Embedding(self.vertices + other.vertices[1:], self.arcs + other.arcs,
                         self.forward + other.forward)

    def reversed_flags(self) -> "Embedding":
        return Embedding(self.vertices, self.arcs, tuple(not f for f in self.forward))

    def is_path(self) -> bool:
        return len(set(self.vertices)) == len(self.vertices)


class DigraphBuilder:
    """Mutable construction stage.  Call :meth:`freeze` for queries."""

    def __init__(self) -> None:
        self._parent: list[int] = []
        self._aliases: dict[int, set[int]] = {}
        self._arcs: list[tuple[int, int, Optional[RayLabel], Optional[int]]] = []
        self._constituents: dict[RayLabel, list[int]] = {}
        self._identifications: list[Identification] = []

    def add_vertex(self) -> int:
        v = len(self._parent)
        self._parent.append(v)
        self._aliases[v] = {v}
        return v

    def find(self, v: int) -> int:
        while self._parent[v] != v:
            self._parent[v] = self._parent[self._parent[v]]
            v = self._parent[v]
        return v

    def add_arc(self, u: int, v: int, label: Optional[RayLabel] = None,
                index: Optional[int] = None) -> int:
        self._arcs.append((self.find(u), self.find(v), label, index))
        return len(self._arcs) - 1

    def add_ray_prefix(self, label: RayLabel, spec: RaySpec, length: int) -> int:
        if label in self._constituents:
            raise ValueError(f"duplicate ray label {label}")
        if length < 1:
            raise ValueError("ray prefix length must be >= 1")
        ids = [self.add_vertex() for _ in range(length + 1)]
        for k, o in enumerate(orientations(spec, length)):
            if o is OUT:
                self.add_arc(ids[k], ids[k + 1], label, k)
            else:
                self.add_arc(ids[k + 1], ids[k], label, k)
        self._constituents[label] = ids
        return ids[0]

    def identify(self, u: int, v: int, step: Optional[int] = None) -> int:
        u, v = self.find(u), self.find(v)
        if u == v:
            raise ValueError("cannot identify a vertex with itself")
        keep, drop = min(u, v), max(u, v)
        self._parent[drop] = keep
        self._aliases[keep] |= self._aliases.pop(drop)
        self._identifications.append(Identification(step, keep, (u, v)))
        return keep

    def freeze(self) -> "Digraph":
        n = len(self._parent)
        rep = tuple(self.find(v) for v in range(n))
        arcs = tuple(
            Arc(i, rep[t], rep[h], t, h, label, index)
            for i, (t, h, label, index) in enumerate(self._arcs)
        )
        return Digraph(
            rep=rep,
            aliases={v: frozenset(a) for v, a in self._aliases.items()},
            arcs=arcs,
            constituents={k: tuple(v) for k, v in self._constituents.items()},
            identifications=tuple(self._identifications),
        )


class Digraph:
    """Frozen multidigraph.  All queries are pure."""

    def __init__(self, rep: Sequence[int], aliases: dict[int, frozenset[int]],
                 arcs: Sequence[Arc], constituents: dict[RayLabel, tuple[int, ...]],
                 identifications: Sequence[Identification],
                 vertices: Optional[Iterable[int]] = None) -> None:
        self.rep = tuple(rep)
        self.aliases = dict(aliases)
        self.arcs = tuple(arcs)
        self._arc_by_id = {a.id: a for a in self.arcs}
        self.constituents = dict(constituents)
        self.identifications = tuple(identifications)
        self.vertices = tuple(sorted(aliases if vertices is None else vertices))
        self._vertex_set = frozenset(self.vertices)
        incident: dict[int, list[tuple[int, int, bool]]] = {v: [] for v in self.vertices}
        for a in self.arcs:
            if a.tail not in self._vertex_set or a.head not in self._vertex_set:
                raise ValueError(f"arc {a.id} has an endpoint outside the vertex set")
            incident[a.tail].append((a.head, a.id, True))
            if a.head != a.tail:
                incident[a.head].append((a.tail, a.id, False))
        self._incident = {v: tuple(sorted(x)) for v, x in incident.items()}
        self._positions: Optional[dict[int, list[tuple[RayLabel, int]]]] = None

    # -- basic structure ---------------------------------------------------

    def __contains__(self, v: int) -> bool:
        return v in self._vertex_set

    def __len__(self) -> int:
        return len(self.vertices)

    def live(self, original: int) -> int:
        return self.rep[original]

    def incident(self, v: int) -> tuple[tuple[int, int, bool], ...]:
        """(neighbour, arc id, outgoing) triples, ascending by neighbour id."""
        return self._incident[v]

    def arc(self, arc_id: int) -> Arc:
        return self._arc_by_id[arc_id]

    def degree(self, v: int) -> int:
        return len(self._incident[v])

    def successors(self, v: int) -> list[tuple[int, int]]:
        return [(w, a) for w, a, out in self._incident[v] if out]

    def position(self, label: RayLabel, k: int) -> int:
        """Live vertex at position ``k`` of constituent ``label``."""
        return self.rep[self.constituents[label][k]]

    def ray_length(self, label: RayLabel) -> int:
        return len(self.constituents[label]) - 1

    def positions_of(self, v: int) -> list[tuple[RayLabel, int]]:
        """All (label, position) pairs at which live vertex ``v`` sits."""
        if self._positions is None:
            table: dict[int, list[tuple[RayLabel, int]]] = {}
            for label in sorted(self.constituents):
                for k, orig in enumerate(self.constituents[label]):
                    table.setdefault(self.rep[orig], []).append((label, k))
            self._positions = table
        return self._positions.get(v, [])

    def ray_arc(self, label: RayLabel, k: int) -> Arc:
        """The ``k``-th arc of a constituent, found through its endpoints."""
        u, w = self.position(label, k), self.position(label, k + 1)
        for _, a, _ in self._incident[u]:
            arc = self.arc(a)
            if arc.label == label and arc.index == k:
                return arc
        raise KeyError((label, k, u, w))

    def ray_orientation(self, label: RayLabel, k: int) -> Orientation:
        """Orientation of arc ``k`` of a constituent as stored in the digraph."""
        arc = self.ray_arc(label, k)
        return OUT if arc.orig_tail == self.constituents[label][k] else IN

    def identification_vertices(self) -> frozenset[int]:
        return frozenset(v for v, a in self.aliases.items() if len(a) > 1 and v in self)

    # -- derived digraphs --------------------------------------------------

    def restrict(self, vertices: Optional[Iterable[int]] = None,
                 arcs: Optional[Iterable[int]] = None) -> "Digraph":
        """Sub-digraph on the given vertices/arcs, keeping every id."""
        keep_v = self._vertex_set if vertices is None else frozenset(vertices) & self._vertex_set
        keep_a = None if arcs is None else frozenset(arcs)
        new_arcs = [a for a in self.arcs
                    if a.tail in keep_v and a.head in keep_v and (keep_a is None or a.id in keep_a)]
        return Digraph(self.rep, self.aliases, new_arcs, self.constituents,
                       self.identifications, vertices=keep_v)

    def without(self, vertices: Iterable[int]) -> "Digraph":
        return self.restrict(self._vertex_set - frozenset(vertices))

    def reversed(self) -> "Digraph":
        arcs = [Arc(a.id, a.head, a.tail, a.orig_head, a.orig_tail, a.label, a.index)
                for a in self.arcs]
        return Digraph(self.rep, self.aliases, arcs, self.constituents,
                       self.identifications, vertices=self.vertices)

    def rollback(self, last_step: Optional[int]) -> "Digraph":
        """Rebuild with only the identifications whose step is <= last_step
        (``None`` gives the disjoint union before any identification)."""
        builder = DigraphBuilder()
        for _ in self.rep:
            builder.add_vertex()
        for a in sorted(self.arcs, key=lambda a: a.id):
            builder.add_arc(a.orig_tail, a.orig_head, a.label, a.index)
        builder._constituents = {k: list(v) for k, v in self.constituents.items()}
        for ident in self.identifications:
            if last_step is not None and ident.step is not None and ident.step <= last_step:
                builder.identify(*ident.members, step=ident.step)
        return builder.freeze()

    # -- queries ------------------------------------------------------------

    def underlying_distance(self, u: int, v: int) -> Optional[int]:
        """Hop distance ignoring arc directions, None when disconnected."""
        if u == v:
            return 0
        seen = {u}
        queue = deque([(u, 0)])
        while queue:
            x, d = queue.popleft()
            for y, _, _ in self._incident[x]:
                if y == v:
                    return d + 1
                if y not in seen:
                    seen.add(y)
                    queue.append((y, d + 1))
        return None

    def enumerate_paths(self, u: int, v: int, cap: int = 100_000) -> list[Embedding]:
        """Every path from ``u`` to ``v`` in the underlying multigraph."""
        if u == v:
            raise ValueError("enumerate_paths needs u != v")
        found: list[Embedding] = []
        verts, arcs, flags = [u], [], []
        on_path = {u}
        stack: list[Iterator[tuple[int, int, bool]]] = [iter(self._incident[u])]
        while stack:
            step = next(stack[-1], None)
            if step is None:
                stack.pop()
                on_path.discard(verts.pop())
                if arcs:
                    arcs.pop()
                    flags.pop()
                continue
            w, a, out = step
            if w in on_path:
                continue
            if w == v:
                found.append(Embedding(verts + [w], arcs + [a], flags + [out]))
                if len(found) > cap:
                    raise CapExceeded(f"more than {cap} paths between {u} and {v}")
                continue
            verts.append(w)
            arcs.append(a)
            flags.append(out)
            on_path.add(w)
            stack.append(iter(self._incident[w]))
        return found

    def iter_pattern(self, start: int, word: Sequence[Orientation]) -> Iterator[Embedding]:
        """Embeddings of an orientation word starting at ``start``, lowest
        neighbour first."""
        n = len(word)
        if n == 0:
            yield Embedding((start,))
            return
        verts, arcs, flags = [start], [], []
        on_path = {start}

        def candidates(x: int, depth: int) -> Iterator[tuple[int, int, bool]]:
            want_out = word[depth] is OUT
            return (t for t in self._incident[x] if t[2] == want_out)

        stack = [candidates(start, 0)]
        while stack:
            step = next(stack[-1], None)
            if step is None:
                stack.pop()
                on_path.discard(verts.pop())
                if arcs:
                    arcs.pop()
                    flags.pop()
                continue
            w, a, out = step
            if w in on_path:
                continue
            if len(arcs) + 1 == n:
                yield Embedding(verts + [w], arcs + [a], flags + [out])
                continue
            verts.append(w)
            arcs.append(a)
            flags.append(out)
            on_path.add(w)
            stack.append(candidates(w, len(arcs)))

    def trace_pattern(self, start: int, spec: RaySpec, length: int,
                      max_results: int = 100_000) -> list[Embedding]:
        if length < 1:
            raise ValueError("pattern length must be >= 1")
        found = []
        for emb in self.iter_pattern(start, orientations(spec, length)):
            found.append(emb)
            if len(found) > max_results:
                raise ResultCapExceeded(f"more than {max_results} embeddings from {start}")
        return found

    def is_embedding(self, emb: Embedding) -> bool:
        """Consecutive incidence and traversal flags agree with the arcs."""
        if not emb.is_path() or any(v not in self for v in emb.vertices):
            return False
        for i, (a, fwd) in enumerate(zip(emb.arcs, emb.forward)):
            if a not in self._arc_by_id:
                return False
            arc = self.arc(a)
            ends = (arc.tail, arc.head) if fwd else (arc.head, arc.tail)
            if ends != (emb.vertices[i], emb.vertices[i + 1]):
                return False
            if not any(x[1] == a for x in self._incident[emb.vertices[i]]):
                return False
        return True

    def embedding_from_vertices(self, vertices: Sequence[int],
                                word: Optional[Sequence[Orientation]] = None) -> Embedding:
        """Resolve the arcs of a vertex sequence (lowest arc id first),
        honouring an orientation word when one is given."""
        arcs, flags = [], []
        for i in range(len(vertices) - 1):
            x, y = vertices[i], vertices[i + 1]
            options = [(a, out) for w, a, out in self._incident[x] if w == y]
            if word is not None:
                options = [(a, out) for a, out in options if out == (word[i] is OUT)]
            if not options:
                raise ValueError(f"no suitable arc between {x} and {y}")
            a, out = min(options)
            arcs.append(a)
            flags.append(out)
        return Embedding(tuple(vertices), tuple(arcs), tuple(flags))

    def labels_along(self, emb: Embedding) -> list[tuple[Optional[RayLabel], Optional[int]]]:
        return [(self.arc(a).label, self.arc(a).index) for a in emb.arcs]
