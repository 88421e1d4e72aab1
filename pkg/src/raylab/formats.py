"""File formats: native digraph JSON, DOT export and tribe dumps.

Every writer produces byte-identical output for identical input (sorted
keys, fixed orders, trailing newline).
"""

from __future__ import annotations

import json
from typing import Any

from .digraph import Arc, Digraph, Embedding, Identification, RayLabel
from .rays import format_spec, orientations, parse_spec


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _label(label):
    return None if label is None else [label.n, label.m]


def _unlabel(value):
    return None if value is None else RayLabel(*value)


def digraph_to_dict(d: Digraph) -> dict:
    return {
        "format": "raylab-digraph/1",
        "n_original": len(d.rep),
        "vertices": [{"id": v, "aliases": sorted(d.aliases[v])} for v in d.vertices],
        "arcs": [
            {"id": a.id, "tail": a.tail, "head": a.head, "label": _label(a.label),
             "arc_index": a.index, "orig": [a.orig_tail, a.orig_head]}
            for a in d.arcs
        ],
        "identifications": [
            {"step": i.step, "merged_id": i.merged, "members": list(i.members)}
            for i in d.identifications
        ],
        "constituents": [
            {"label": _label(label), "vertices": list(d.constituents[label])}
            for label in sorted(d.constituents)
        ],
    }


def digraph_from_dict(data: dict) -> Digraph:
    n = data["n_original"]
    rep = list(range(n))
    aliases = {}
    for entry in data["vertices"]:
        aliases[entry["id"]] = frozenset(entry["aliases"])
        for orig in entry["aliases"]:
            rep[orig] = entry["id"]
    arcs = [
        Arc(a["id"], a["tail"], a["head"], a["orig"][0], a["orig"][1],
            _unlabel(a["label"]), a["arc_index"])
        for a in data["arcs"]
    ]
    idents = [Identification(i["step"], i["merged_id"], tuple(i["members"]))
              for i in data["identifications"]]
    constituents = {RayLabel(*c["label"]): tuple(c["vertices"]) for c in data["constituents"]}
    return Digraph(rep, aliases, arcs, constituents, idents, vertices=aliases)


def dump_digraph(d: Digraph) -> str:
    return dumps(digraph_to_dict(d))


def load_digraph(text: str) -> Digraph:
    return digraph_from_dict(json.loads(text))


def to_dot(d: Digraph, name: str = "D") -> str:
    merged = d.identification_vertices()
    lines = [f"digraph {name} {{"]
    for v in d.vertices:
        shape = "doublecircle" if v in merged else "circle"
        lines.append(f'  {v} [shape={shape}];')
    for a in d.arcs:
        attrs = [f'id={a.id}']
        if a.label is not None:
            attrs.append(f'label="{a.label}"')
            attrs.append(f'arc_index={a.index}')
        lines.append(f'  {a.tail} -> {a.head} [{", ".join(attrs)}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- tribes ----------------------------------------------------------------


def tribe_to_dict(tribe) -> dict:
    return {
        "format": "raylab-tribe/1",
        "pattern": format_spec(tribe.pattern),
        "hat_len": tribe.hat_len,
        "layers": [[list(member.vertices) for member in layer] for layer in tribe.layers],
    }


def tribe_from_dict(data: dict, d: Digraph):
    from .tribe import Tribe

    pattern = parse_spec(data["pattern"])
    layers = []
    for layer in data["layers"]:
        members = []
        for verts in layer:
            word = orientations(pattern, len(verts) - 1)
            members.append(d.embedding_from_vertices(verts, word))
        layers.append(tuple(members))
    return Tribe(tuple(layers), pattern, data["hat_len"])


def dump_tribe(tribe) -> str:
    return dumps(tribe_to_dict(tribe))


def embedding_to_dict(emb: Embedding) -> dict:
    return {"vertices": list(emb.vertices), "arcs": list(emb.arcs),
            "forward": [int(f) for f in emb.forward]}
