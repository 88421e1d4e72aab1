"""Packing disjoint out-dipaths out of a thick tribe.

``extend_family`` is one induction step of the Halin-style argument for
digraphs: old rays that meet few members of a fresh layer are kept, the
others are cut at a fixed crossing vertex and rerouted along a maximum family
of vertex-disjoint dipaths into members of the layer.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .digraph import Digraph, Embedding
from .rays import IN, OUT, AllIn, AllOut, RaySpec, classify, orientations, reverse
from .tribe import InsufficientThickness, Tribe, forked_subtribe


class PackingError(RuntimeError):
    pass


class LayerTooSmall(PackingError):
    def __init__(self, level: int, demand: int, size: int) -> None:
        self.level, self.demand, self.size = level, demand, size
        super().__init__(f"level {level}: layer of size {size} < demand {demand}")


class LayerTooShort(PackingError):
    def __init__(self, level: int, what: str) -> None:
        self.level = level
        super().__init__(f"level {level}: {what} runs off the end of a finite member")


class RerouteFailed(PackingError):
    def __init__(self, level: int, found: int, needed: int, cut: frozenset[int]) -> None:
        self.level, self.found, self.needed, self.cut = level, found, needed, cut
        super().__init__(f"level {level}: only {found} of {needed} disjoint dipaths; "
                         f"separator {sorted(cut)}")


class InsufficientTribe(PackingError):
    def __init__(self, level: int, demand: int, largest: int, detail: str = "") -> None:
        self.level, self.demand, self.largest = level, demand, largest
        msg = f"level {level}: needs a layer of size >= {demand}, largest usable is {largest}"
        super().__init__(msg + (f" ({detail})" if detail else ""))


# -- Menger step -----------------------------------------------------------


@dataclass(frozen=True)
class MengerResult:
    paths: tuple[Embedding, ...]
    cut: frozenset[int]

    def __len__(self) -> int:
        return len(self.paths)


def vertex_disjoint_dipaths(H: Digraph, U: Iterable[int], W: Iterable[int]) -> MengerResult:
    """Maximum family of pairwise vertex-disjoint directed U--W paths.

    Unit vertex capacities via vertex splitting; augmenting paths are found by
    breadth-first search in ascending vertex order.  The returned cut is a
    minimum U--W separator of the same size.
    """
    U = sorted(set(U) & set(H.vertices))
    W_set = set(W) & set(H.vertices)
    index = {v: i for i, v in enumerate(H.vertices)}
    big = len(H.vertices) + 1
    source, sink = 2 * len(index), 2 * len(index) + 1
    cap: dict[int, dict[int, int]] = {x: {} for x in range(sink + 1)}

    def add(x: int, y: int, c: int) -> None:
        cap[x][y] = cap[x].get(y, 0) + c
        cap[y].setdefault(x, 0)

    for v, i in index.items():
        add(2 * i, 2 * i + 1, 1)
    for a in H.arcs:
        if a.tail != a.head:
            add(2 * index[a.tail] + 1, 2 * index[a.head], big)
    for u in U:
        add(source, 2 * index[u], big)
    for w in sorted(W_set):
        add(2 * index[w] + 1, sink, big)
    original = {x: dict(ys) for x, ys in cap.items()}
    order = {x: sorted(ys) for x, ys in cap.items()}

    def augment() -> Optional[set[int]]:
        parent = {source: source}
        queue = deque([source])
        while queue:
            x = queue.popleft()
            for y in order[x]:
                if y not in parent and cap[x][y] > 0:
                    parent[y] = x
                    if y == sink:
                        y2 = sink
                        while y2 != source:
                            p = parent[y2]
                            cap[p][y2] -= 1
                            cap[y2][p] += 1
                            y2 = p
                        return None
                    queue.append(y)
        return set(parent)

    while True:
        reached = augment()
        if reached is not None:
            break

    cut = frozenset(v for v, i in index.items() if 2 * i in reached and 2 * i + 1 not in reached)
    flow = {x: {y: original[x][y] - cap[x][y] for y in original[x] if original[x][y] > 0}
            for x in original}
    paths = []
    for u in U:
        x = 2 * index[u]
        if flow[source].get(x, 0) <= 0:
            continue
        flow[source][x] -= 1
        seq = [u]
        while True:
            out = x + 1
            nxt = next((y for y in order[out] if flow[out].get(y, 0) > 0), None)
            if nxt is None:
                raise AssertionError("flow decomposition lost its way")
            flow[out][nxt] -= 1
            if nxt == sink:
                break
            x = nxt
            seq.append(H.vertices[x // 2])
        paths.append(_trim(H, seq, set(U), W_set))
    return MengerResult(tuple(paths), cut)


def _trim(H: Digraph, seq: Sequence[int], U: set[int], W: set[int]) -> Embedding:
    end = next(k for k, v in enumerate(seq) if v in W)
    start = max(k for k in range(end + 1) if seq[k] in U)
    seq = seq[start: end + 1]
    arcs = []
    for x, y in zip(seq, seq[1:]):
        arcs.append(min(a for w, a, out in H.incident(x) if w == y and out))
    return Embedding(tuple(seq), tuple(arcs), (True,) * len(arcs))


def is_separator(H: Digraph, U: Iterable[int], W: Iterable[int], cut: Iterable[int]) -> bool:
    """No directed U--W path avoids ``cut`` (plain reachability)."""
    cut = set(cut)
    W = set(W) - cut
    frontier = [u for u in set(U) - cut]
    seen = set(frontier)
    while frontier:
        x = frontier.pop()
        if x in W:
            return False
        for y, _ in H.successors(x):
            if y not in seen and y not in cut:
                seen.add(y)
                frontier.append(y)
    return True


# -- family extension ------------------------------------------------------


@dataclass(frozen=True)
class FamilyState:
    level: int
    rays: tuple[Embedding, ...] = ()
    markers: tuple[int, ...] = ()

    def prefix_vertices(self) -> frozenset[int]:
        out: set[int] = set()
        for ray, k in zip(self.rays, self.markers):
            out.update(ray.vertices[: k + 1])
        return frozenset(out)


@dataclass
class LevelTrace:
    level: int
    layer_size: int = 0
    demand: int = 0
    deleted_prefix: int = 0
    survivors: int = 0
    adopted: list[int] = field(default_factory=list)
    deleted_adopt: int = 0
    f_prime: int = 0
    rerouted: int = 0
    cut_size: Optional[int] = None
    guard_survivors: bool = True
    guard_f_prime: bool = True

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def extend_family(state: FamilyState, layer: Sequence[Embedding], D: Digraph,
                  trace: Optional[list[LevelTrace]] = None) -> FamilyState:
    ell = state.level
    record = LevelTrace(level=ell, layer_size=len(layer))
    if trace is not None:
        trace.append(record)
    if ell == 0:
        if not layer:
            raise LayerTooSmall(0, 1, 0)
        return FamilyState(1, (layer[0],), (0,))

    prefix = state.prefix_vertices()
    demand = len(prefix) + ell * ell + 1
    record.demand = demand
    if len(layer) < demand:
        raise LayerTooSmall(ell, demand, len(layer))

    F = [S for S in layer if not (S.vertex_set() & prefix)]
    record.deleted_prefix = len(layer) - len(F)
    record.survivors = len(F)
    record.guard_survivors = len(F) >= ell * ell + 1
    assert record.guard_survivors, "fewer than l^2+1 members survive the prefix deletion"

    rays: list[Optional[Embedding]] = [None] * ell
    markers: list[Optional[int]] = [None] * ell
    progress = True
    while progress:
        progress = False
        for i in range(ell):
            if rays[i] is not None:
                continue
            ray_vs = state.rays[i].vertex_set()
            meeting = [S for S in F if S.vertex_set() & ray_vs]
            if len(meeting) <= ell:
                if state.markers[i] + 1 >= len(state.rays[i].vertices):
                    raise LayerTooShort(ell, f"marker of ray {i}")
                rays[i] = state.rays[i]
                markers[i] = state.markers[i] + 1
                F = [S for S in F if S not in meeting]
                record.adopted.append(i)
                record.deleted_adopt += len(meeting)
                progress = True
                break
    m = len(record.adopted)
    record.f_prime = len(F)
    record.guard_f_prime = len(F) >= (ell - m) * ell + 1
    assert record.guard_f_prime, "|F'| < (l-m)l+1"

    J = [j for j in range(ell) if rays[j] is None]
    owner = {v: k for k, S in enumerate(F) for v in S.vertices}
    crossing: dict[int, int] = {}
    for j in J:
        met: list[int] = []
        for idx, v in enumerate(state.rays[j].vertices):
            k = owner.get(v)
            if k is not None and k not in met:
                met.append(k)
                if len(met) == ell:
                    crossing[j] = idx
                    break
        assert j in crossing, "ray meets more than l members but no l-th crossing found"
        assert crossing[j] > state.markers[j]

    cut_off = set()
    for j in J:
        cut_off.update(state.rays[j].vertices[: crossing[j] + 1])
    fresh = next((S for S in F if not (S.vertex_set() & cut_off)), None)
    assert fresh is not None, "no member avoids the cut-off rays"
    rest = [S for S in F if S is not fresh]

    if J:
        segments = set()
        arcs: set[int] = set()
        for j in J:
            ray, lo, hi = state.rays[j], state.markers[j], crossing[j]
            segments.update(ray.vertices[lo: hi + 1])
            arcs.update(ray.arcs[lo:hi])
        hat_ends = []
        verts = set(segments)
        for S in rest:
            hits = [k for k, v in enumerate(S.vertices) if v in segments]
            w = max(hits) + 1 if hits else 0
            if w >= len(S.vertices):
                raise LayerTooShort(ell, "a target vertex beyond the crossing segments")
            hat_ends.append(w)
            verts.update(S.vertices[: w + 1])
            arcs.update(S.arcs[:w])
        H = D.restrict(vertices=verts, arcs=arcs)
        U = {state.rays[j].vertices[state.markers[j]]: j for j in J}
        W = {S.vertices[w]: (S, w) for S, w in zip(rest, hat_ends)}
        result = vertex_disjoint_dipaths(H, U, W)
        record.cut_size = len(result.cut)
        record.rerouted = len(result.paths)
        if len(result.paths) < len(J):
            raise RerouteFailed(ell, len(result.paths), len(J), result.cut)
        for P in result.paths:
            j = U[P.first]
            S, w = W[P.last]
            old = state.rays[j].prefix(state.markers[j])
            new = old.then(P).then(S.suffix(w))
            assert all(new.forward), "rerouted walk is not a dipath"
            rays[j] = new
            markers[j] = state.markers[j] + len(P)

    new_state = FamilyState(ell + 1, tuple(rays) + (fresh,), tuple(markers) + (0,))
    check_family(new_state, previous=state)
    return new_state


def check_family(state: FamilyState, previous: Optional[FamilyState] = None,
                 starts: Optional[Iterable[int]] = None) -> None:
    """Pairwise disjointness, start set and strict growth of marker prefixes."""
    seen: set[int] = set()
    for ray, k in zip(state.rays, state.markers):
        assert ray.is_path() and all(ray.forward), "family member is not a dipath"
        assert not (seen & ray.vertex_set()), "family members intersect"
        seen |= ray.vertex_set()
        assert 0 <= k < len(ray.vertices)
    if starts is not None:
        starts = set(starts)
        assert all(ray.first in starts for ray in state.rays)
    if previous is not None:
        for i, (ray, k) in enumerate(zip(previous.rays, previous.markers)):
            old = ray.vertices[: k + 1]
            new = state.rays[i].vertices[: state.markers[i] + 1]
            assert len(new) > len(old) and new[: len(old)] == old, "marker prefix did not grow"


# -- drivers ---------------------------------------------------------------


def level_demand_floor(level: int) -> int:
    """Smallest layer that can possibly feed the step from ``level``."""
    return 1 if level == 0 else level + level * level + 1


def pack_out_rays(D: Digraph, tribe: Tribe, X: Iterable[int], n: int, min_len: int,
                  trace: Optional[list[LevelTrace]] = None) -> list[Embedding]:
    """``n`` pairwise disjoint out-dipaths starting in X, each with at least
    ``min_len`` arcs."""
    X = frozenset(X)
    if n < 1:
        raise ValueError("n must be >= 1")
    for layer in tribe.layers:
        for member in layer:
            if member.first not in X or not all(member.forward):
                raise ValueError("tribe members must be out-dipaths starting in X")
    layers = sorted((layer for layer in tribe.layers if layer), key=len)
    largest = max(map(len, layers), default=0)
    if largest < level_demand_floor(n - 1):
        raise InsufficientTribe(n - 1, level_demand_floor(n - 1), largest, "up-front floor")
    state = FamilyState(0)
    while state.level < n:
        demand = (len(state.prefix_vertices()) + state.level ** 2 + 1) if state.level else 1
        usable = [layer for layer in layers if len(layer) >= demand]
        if not usable:
            raise InsufficientTribe(state.level, demand, largest)
        last_error: Optional[PackingError] = None
        for layer in usable:
            try:
                state = extend_family(state, layer, D, trace)
                break
            except (LayerTooShort, RerouteFailed) as exc:
                last_error = exc
        else:
            raise InsufficientTribe(state.level, demand, largest, str(last_error))
    check_family(state, starts=X)
    short = [len(r) for r in state.rays if len(r) < min_len]
    if short:
        raise InsufficientTribe(n, min_len, max(short), "members too short for min_len")
    return list(state.rays)


def hat_length(pattern: RaySpec) -> int:
    """Arcs in the union of all finite phases of a ray with an out tail:
    everything up to and including the last in-oriented arc."""
    last_in = max((k for k, o in enumerate(pattern.prefix) if o is IN), default=-1)
    return last_in + 1


@dataclass
class AssemblyReport:
    hat_len: int = 0
    sizes: list[int] = field(default_factory=list)
    reversed: bool = False
    levels: list[LevelTrace] = field(default_factory=list)


def assemble_positive(D: Digraph, tribe: Tribe, n: int, min_len: int,
                      report: Optional[AssemblyReport] = None) -> list[Embedding]:
    """``n`` disjoint embeddings of the pattern prefix, each with at least
    ``min_len`` arcs, for a pattern with finitely many turns."""
    pattern = tribe.pattern
    if not classify(pattern).ubiquitous:
        raise ValueError(f"pattern {pattern} has infinitely many turns")
    report = report if report is not None else AssemblyReport()
    if isinstance(pattern.tail, AllIn):
        report.reversed = True
        flipped = Tribe(tuple(tuple(m.reversed_flags() for m in layer) for layer in tribe.layers),
                        reverse(pattern), tribe.hat_len)
        out = assemble_positive(D.reversed(), flipped, n, min_len, report)
        return [e.reversed_flags() for e in out]

    hat_len = hat_length(pattern)
    report.hat_len = hat_len
    members = [m for layer in tribe.layers for m in layer]
    if any(len(m) < hat_len + 1 for m in members):
        raise ValueError("members must extend past the finite phases")
    hatted = Tribe(tribe.layers, pattern, hat_len)
    tail_min = max(min_len - hat_len - 1, 0) if hat_len else min_len
    largest = max(hatted.layer_sizes(), default=0)
    last_error: Exception = InsufficientTribe(n - 1, level_demand_floor(n - 1), largest)
    # sizes of the forked layers start at the level floors; a level whose
    # demand turns out larger gets its size raised to that demand
    sizes = [level_demand_floor(lvl) for lvl in range(n)]
    for _ in range(largest + n + 1):
        try:
            forked = forked_subtribe(hatted, n, max_choice=None, budget=20_000,
                                     sizes=sorted(set(sizes)))
        except InsufficientThickness as exc:
            last_error = exc
            break
        report.sizes = sorted(set(sizes))
        result = _pack_forked(D, forked, hat_len, n, tail_min, report)
        if not isinstance(result, Exception):
            return result
        last_error = result
        if isinstance(result, InsufficientTribe) and result.level < n:
            lvl = result.level
            sizes[lvl] = max(sizes[lvl] + 1, result.demand)
        else:
            sizes[-1] += 1
    raise last_error


def _pack_forked(D, forked: Tribe, hat_len: int, n: int, tail_min: int, report):
    if hat_len == 0:
        tails = forked.layers
        owners: dict[int, Embedding] = {}
        hats: frozenset[int] = frozenset()
    else:
        hats = frozenset().union(*(forked.hat(m) for m in forked.members()))
        tails = tuple(tuple(m.suffix(hat_len + 1) for m in layer) for layer in forked.layers)
        owners = {}
        for m in forked.members():
            owners.setdefault(m.vertices[hat_len + 1], m)
    X = frozenset(t.first for layer in tails for t in layer)
    out_pattern = RaySpec((), AllOut())
    levels: list[LevelTrace] = []
    try:
        rays = pack_out_rays(D.without(hats), Tribe(tails, out_pattern, 0), X, n, tail_min, levels)
    except PackingError as exc:
        return exc
    report.levels = levels
    if hat_len == 0:
        copies = rays
    else:
        copies = [owners[r.first].prefix(hat_len + 1).then(r) for r in rays]
    word_ok = all(c.word() == orientations(forked.pattern, len(c)) for c in copies)
    assert word_ok and all(D.is_embedding(c) for c in copies), "assembled copy is not an embedding"
    return copies
