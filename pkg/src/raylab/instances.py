"""Seeded instance generators used by tests, the acceptance suite and the CLI."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .digraph import Digraph, DigraphBuilder, Embedding
from .rays import IN, OUT, AllIn, AllOut, Growing, Periodic, RaySpec, orientations
from .tribe import Tribe


def random_digraph(seed: int, n_vertices: int = 8, p: float = 0.3) -> Digraph:
    """Simple random digraph without loops (at most one arc per ordered pair)."""
    rng = random.Random(seed)
    b = DigraphBuilder()
    for _ in range(n_vertices):
        b.add_vertex()
    for u in range(n_vertices):
        for v in range(n_vertices):
            if u != v and rng.random() < p:
                b.add_arc(u, v)
    return b.freeze()


@dataclass
class GridInstance:
    digraph: Digraph
    tribe: Tribe
    X: frozenset[int]
    rows: int
    cols: int
    hat_len: int = 0
    grid_ids: dict[tuple[int, int], int] = field(default_factory=dict)


def _lattice_layer(rng: random.Random, rows: range, size: int, cols: int) -> list[list[int]]:
    """``size`` lattice paths through the given row band, one row per path
    per column, each step moving at most one row.  Paths keep their relative
    order so they stay disjoint."""
    paths = [[r] for r in sorted(rng.sample(list(rows), size))]
    for _ in range(1, cols):
        below = rows.start - 1
        for i, path in enumerate(paths):
            room = rows.stop - 1 - (size - 1 - i)
            r = path[-1]
            options = [x for x in (r - 1, r, r + 1) if below < x <= room]
            nxt = r if r in options and rng.random() < 0.4 else rng.choice(options)
            path.append(nxt)
            below = nxt
    return paths


def _band(kind: str, k: int, size: int, rows: int) -> range:
    if kind == "disjoint":
        return range(k * (size + 2), (k + 1) * (size + 2))
    if kind == "star":
        return range(0, min(rows, size + 4))
    if kind == "chained":
        lo = k * ((size + 2) // 2)
        return range(lo, lo + size + 2)
    raise ValueError(f"unknown overlap kind {kind!r}")


def grid_instance(seed: int, kind: str = "star", layer_sizes=(1, 3, 8, 14, 24, 30),
                  cols: int = 60, pattern: Optional[RaySpec] = None) -> GridInstance:
    """A layered grid DAG with a tribe of out-dipath layers.

    Vertices are ``(row, column)``; arcs go from column c to c+1 between rows at
    most one apart.  Layer k consists of ``layer_sizes[k]`` disjoint lattice
    paths inside a row band; ``kind`` decides how the bands of different
    layers overlap (``disjoint``, ``star`` or ``chained``).  With a pattern
    whose prefix is not all-out, each member is preceded by a private hat
    embedding that prefix and ending at its column-0 grid vertex.
    """
    rng = random.Random(seed)
    pattern = pattern or RaySpec((), AllOut())
    last_in = max((k for k, o in enumerate(pattern.prefix) if o is IN), default=-1)
    hat_len = last_in + 1
    bands = [_band(kind, k, s, max(layer_sizes) + 4) for k, s in enumerate(layer_sizes)]
    rows = max(b.stop for b in bands)
    b = DigraphBuilder()
    ids: dict[tuple[int, int], int] = {}
    for r in range(rows):
        for c in range(cols):
            ids[(r, c)] = b.add_vertex()
    for r in range(rows):
        for c in range(cols - 1):
            for r2 in (r - 1, r, r + 1):
                if 0 <= r2 < rows:
                    b.add_arc(ids[(r, c)], ids[(r2, c + 1)])
    raw_layers = [_lattice_layer(rng, band, s, cols) for band, s in zip(bands, layer_sizes)]
    hats: list[list[list[int]]] = []
    word = orientations(pattern, hat_len)
    for layer in raw_layers:
        layer_hats = []
        for path in layer:
            if hat_len == 0:
                layer_hats.append([])
                continue
            verts = [b.add_vertex() for _ in range(hat_len)] + [ids[(path[0], 0)]]
            for i, o in enumerate(word):
                if o is OUT:
                    b.add_arc(verts[i], verts[i + 1])
                else:
                    b.add_arc(verts[i + 1], verts[i])
            layer_hats.append(verts)
        hats.append(layer_hats)
    d = b.freeze()
    layers = []
    for layer, layer_hats in zip(raw_layers, hats):
        members = []
        for path, hat in zip(layer, layer_hats):
            verts = (hat[:-1] if hat else []) + [ids[(r, c)] for c, r in enumerate(path)]
            members.append(d.embedding_from_vertices(verts, orientations(pattern, len(verts) - 1)))
        layers.append(tuple(members))
    tribe = Tribe(tuple(layers), pattern, hat_len)
    X = frozenset(m.first for layer in layers for m in layer)
    return GridInstance(d, tribe, X, rows, cols, hat_len, ids)


def random_spec(rng: random.Random, max_prefix: int = 4) -> RaySpec:
    """Spec drawn from all four tail families."""
    prefix = tuple(rng.choice((OUT, IN)) for _ in range(rng.randint(0, max_prefix)))
    kind = rng.randrange(4)
    first = rng.choice((OUT, IN))
    if kind == 0:
        tail = AllOut()
    elif kind == 1:
        tail = AllIn()
    elif kind == 2:
        tail = Periodic(tuple(rng.randint(1, 3) for _ in range(rng.randint(1, 3))), first)
    else:
        tail = Growing(rng.randint(1, 3), rng.randint(1, 2), first)
    return RaySpec(prefix, tail)


def spec_corpus(seed: int, size: int) -> list[RaySpec]:
    rng = random.Random(seed)
    return [random_spec(rng) for _ in range(size)]


def synthetic_tribe(seed: int, layer_sizes: Sequence[int], length: int = 4, hat_len: int = 2,
                    pool: Optional[int] = None) -> tuple[Digraph, Tribe]:
    """Layers of disjoint out-dipaths drawn from a shared vertex pool; a
    smaller pool means more overlap between layers."""
    rng = random.Random(seed)
    widest = max(layer_sizes)
    pool = pool if pool is not None else 2 * widest * (length + 1)
    if pool < widest * (length + 1):
        raise ValueError("pool too small for the widest layer")
    b = DigraphBuilder()
    for _ in range(pool):
        b.add_vertex()
    raw = []
    for size in layer_sizes:
        verts = rng.sample(range(pool), size * (length + 1))
        layer = []
        for i in range(size):
            seq = verts[i * (length + 1):(i + 1) * (length + 1)]
            arcs = tuple(b.add_arc(x, y) for x, y in zip(seq, seq[1:]))
            layer.append(Embedding(tuple(seq), arcs, (True,) * length))
        raw.append(tuple(layer))
    return b.freeze(), Tribe(tuple(raw), RaySpec((), AllOut()), hat_len)
