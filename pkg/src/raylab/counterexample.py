"""Finite truncations of the non-ubiquity host digraphs.

Constituents ``R(n,m)`` for ``n <= m <= M`` are copies of the pattern ray cut
to ``L`` arcs, created in lexicographic label order.  Vertex pairs are chosen
along a fixed enumeration of ``J`` and identified one step at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Any, Iterator, Optional, Sequence

from .digraph import Digraph, DigraphBuilder, Embedding, RayLabel
from .rays import (OUT, Growing, Orientation, Periodic, RaySpec, classify, format_spec,
                   orientations, out_phase_lengths_recur, parse_spec, reverse)


class SpecNotBounded(ValueError):
    pass


class SpecNotUnbounded(ValueError):
    pass


class DepthExhausted(RuntimeError):
    def __init__(self, step: int, reason: str) -> None:
        self.step = step
        super().__init__(f"stopped at step {step}: {reason}")


# -- J enumeration ---------------------------------------------------------


Pair = tuple[RayLabel, RayLabel]


@dataclass(frozen=True)
class JEnumeration:
    rounds: int
    emitted: tuple[Pair, ...]


def j_round(r: int, M: Optional[int] = None) -> list[Pair]:
    """All J elements with every coordinate at most r (and m <= M if given),
    lexicographically."""
    top = r if M is None else min(r, M)
    labels = [RayLabel(n, m) for n in range(top + 1) for m in range(n, top + 1)]
    return [(a, b) for a, b in product(labels, labels) if a.m < b.m]


def enumerate_J(rounds: int) -> JEnumeration:
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    out: list[Pair] = []
    for r in range(1, rounds + 1):
        out.extend(j_round(r))
    return JEnumeration(rounds, tuple(out))


def j_sequence(M: int) -> Iterator[Pair]:
    """The round-lexicographic sequence restricted to labels with m <= M."""
    if M < 1:
        raise ValueError("M must be >= 1 (J is empty otherwise)")
    r = 1
    while True:
        yield from j_round(r, M)
        r += 1


# -- plans -----------------------------------------------------------------


Site = tuple[RayLabel, int]


@dataclass(frozen=True)
class PlanEntry:
    step: int
    pair: Pair
    g0: Site
    g1: Site
    meta: dict = field(default_factory=dict, compare=False, hash=False)


@dataclass
class IdentificationPlan:
    mode: str
    spec: RaySpec
    source_spec: RaySpec
    M: int
    L: int
    requested: int
    entries: list[PlanEntry] = field(default_factory=list)
    c: Optional[int] = None
    reversed: bool = False
    stop_reason: Optional[str] = None

    @property
    def completed(self) -> int:
        return len(self.entries)

    def deepest(self) -> int:
        """Largest ray position of any identified vertex."""
        return max((p for e in self.entries for _, p in (e.g0, e.g1)), default=0)


def labels_upto(M: int) -> list[RayLabel]:
    return [RayLabel(n, m) for n in range(M + 1) for m in range(n, M + 1)]


def base_builder(spec: RaySpec, M: int, L: int) -> DigraphBuilder:
    b = DigraphBuilder()
    for label in labels_upto(M):
        b.add_ray_prefix(label, spec, L)
    return b


@dataclass(frozen=True)
class Phase:
    first_arc: int
    length: int
    orientation: Orientation
    complete: bool

    @property
    def start(self) -> int:
        return self.first_arc

    @property
    def end(self) -> int:
        """Position of the vertex ending the phase."""
        return self.first_arc + self.length


def word_phases(word: Sequence[Orientation]) -> list[Phase]:
    """Maximal runs of a finite word; only the last run is incomplete."""
    out: list[Phase] = []
    start = 0
    for i in range(1, len(word) + 1):
        if i == len(word) or word[i] != word[i - 1]:
            out.append(Phase(start, i - start, word[start], i < len(word)))
            start = i
    return out


def phase_containing(phases_: Sequence[Phase], pos: int) -> list[Phase]:
    return [ph for ph in phases_ if ph.start <= pos <= ph.end]


def ray_word(D: Digraph, label: RayLabel) -> tuple[Orientation, ...]:
    return tuple(D.ray_orientation(label, k) for k in range(D.ray_length(label)))


# -- bounded case ----------------------------------------------------------


def _reduce_bounded(spec: RaySpec) -> tuple[RaySpec, int, bool]:
    verdict = classify(spec)
    if verdict.kind != "bounded":
        raise SpecNotBounded(f"{format_spec(spec)} is {verdict}")
    c = verdict.c
    if out_phase_lengths_recur(spec, c):
        return spec, c, False
    flipped = reverse(spec)
    assert out_phase_lengths_recur(flipped, c)
    return flipped, c, True


def build_bounded(spec: RaySpec, M: int, L: int, steps: int,
                  strict: bool = False) -> tuple[Digraph, IdentificationPlan]:
    """g1 is the earliest turn starting a complete out-phase of length c,
    g0 the earliest turn ending one with a strictly longer initial segment;
    both beyond every earlier g on their ray."""
    work, c, flipped = _reduce_bounded(spec)
    plan = IdentificationPlan("bounded", work, spec, M, L, steps, c=c, reversed=flipped)
    b = base_builder(work, M, L)
    word = orientations(work, L)
    runs = [ph for ph in word_phases(word) if ph.orientation is OUT and ph.length == c
            and ph.complete]
    used: dict[RayLabel, int] = {}
    pairs = j_sequence(M)
    for i in range(steps):
        r0, r1 = next(pairs)
        floor1, floor0 = used.get(r1, 0), used.get(r0, 0)
        p1 = next((ph.start for ph in runs if ph.start >= 1 and ph.start > floor1), None)
        p0 = None if p1 is None else next(
            (ph.end for ph in runs if ph.end > max(floor0, p1)), None)
        if p1 is None or p0 is None:
            plan.stop_reason = f"step {i}: no admissible turn within L={L}"
            if strict:
                raise DepthExhausted(i, plan.stop_reason)
            break
        phase1 = next(ph for ph in runs if ph.start == p1)
        phase0 = next(ph for ph in runs if ph.end == p0)
        g0 = b._constituents[r0][p0]
        g1 = b._constituents[r1][p1]
        b.identify(g0, g1, step=i)
        used[r0], used[r1] = p0, p1
        plan.entries.append(PlanEntry(i, (r0, r1), (r0, p0), (r1, p1), {
            "phase0": [phase0.start, phase0.end],
            "phase1": [phase1.start, phase1.end],
        }))
    return b.freeze(), plan


# -- unbounded case --------------------------------------------------------


def _first_mismatch(word: Sequence[Orientation], a: int, b: int) -> Optional[int]:
    """Smallest j >= 1 with word[a+j-1] != word[b+j-1] inside the word."""
    j = 1
    while a + j - 1 < len(word) and b + j - 1 < len(word):
        if word[a + j - 1] != word[b + j - 1]:
            return j
        j += 1
    return None


def _x_position(D: Digraph, label: RayLabel, marked: set[int], phases_: Sequence[Phase]) -> int:
    hits = [p for v in marked for lab, p in D.positions_of(v) if lab == label]
    if not hits:
        return 0
    ends = [ph.end for p in hits for ph in phase_containing(phases_, p)]
    return max(ends) + 1


def initial_segment_paths(D: Digraph, starts: Sequence[int], target: int,
                          word: Sequence[Orientation], cap: int = 100_000) -> list[Embedding]:
    """Paths from any start to ``target`` whose orientation, read from the
    start, is an initial segment of ``word``."""
    out = []
    for s in starts:
        if s == target:
            out.append(Embedding((s,)))
            continue
        for P in D.enumerate_paths(s, target, cap):
            if len(P) <= len(word) and P.word() == tuple(word[: len(P)]):
                out.append(P)
    return out


def _z_position(D: Digraph, label: RayLabel, x: int, starts, word, cap) -> tuple[int, dict]:
    target = D.position(label, x)
    paths = initial_segment_paths(D, starts, target, word, cap)
    Q = [P for P in paths if len(P) != x]
    ys = []
    for P in Q:
        j = _first_mismatch(word, len(P), x)
        if j is None:
            return -1, {}
        ys.append(x + j)
    z = max(ys) if ys else x
    return z, {"paths": len(paths), "Q": len(Q), "y": sorted(set(ys))}


def build_unbounded(spec: RaySpec, M: int, L: int, steps: int, strict: bool = False,
                    cap: int = 100_000) -> tuple[Digraph, IdentificationPlan]:
    verdict = classify(spec)
    if verdict.kind != "unbounded":
        raise SpecNotUnbounded(f"{format_spec(spec)} is {verdict}")
    plan = IdentificationPlan("unbounded", spec, spec, M, L, steps)
    b = base_builder(spec, M, L)
    word = orientations(spec, L)
    phases_ = word_phases(word)
    pairs = j_sequence(M)
    gs: list[int] = []  # original ids of identified vertices
    for i in range(steps):
        r0, r1 = next(pairs)
        D = b.freeze()
        starts = sorted({D.live(k) for k in range(i + 1)})
        marked = set(starts) | {D.live(g) for g in gs}
        meta: dict[str, Any] = {}
        zs = []
        for eps, label in enumerate((r0, r1)):
            x = _x_position(D, label, marked, phases_)
            if x > L:
                zs = None
                break
            z, info = _z_position(D, label, x, starts, word, cap)
            if z < 0 or z > L:
                zs = None
                break
            zs.append(z)
            meta[f"x{eps}"], meta[f"z{eps}"], meta[f"paths{eps}"] = x, z, info
        M0 = None if zs is None else next(
            (ph for ph in phases_ if ph.start >= zs[0] and ph.length >= 3 and ph.complete), None)
        M1 = None if M0 is None else next(
            (ph for ph in phases_ if ph.start >= zs[1] and ph.length >= 2 * M0.length + 1
             and ph.complete), None)
        if M1 is None:
            plan.stop_reason = f"step {i}: selection runs past L={L}"
            if strict:
                raise DepthExhausted(i, plan.stop_reason)
            break
        p0, p1 = M0.start + 1, M1.start + M0.length
        meta.update({
            "M0": [M0.start, M0.end], "M1": [M1.start, M1.end],
            "distances": [1, M0.length - 1, M0.length, M1.length - M0.length],
        })
        o0, o1 = b._constituents[r0][p0], b._constituents[r1][p1]
        b.identify(o0, o1, step=i)
        gs.extend((o0, o1))
        plan.entries.append(PlanEntry(i, (r0, r1), (r0, p0), (r1, p1), meta))
    return b.freeze(), plan


# -- verification ----------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    step: Optional[int]
    condition: str
    detail: str

    def __str__(self) -> str:
        where = "global" if self.step is None else f"step {self.step}"
        return f"{where}: {self.condition}: {self.detail}"


@dataclass
class CheckReport:
    mode: str
    checked: dict[str, int] = field(default_factory=dict)
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def count(self, name: str, k: int = 1) -> None:
        self.checked[name] = self.checked.get(name, 0) + k

    def flag(self, step, condition, detail) -> None:
        self.violations.append(Violation(step, condition, detail))

    def as_dict(self) -> dict:
        return {"mode": self.mode, "ok": self.ok, "checked": dict(sorted(self.checked.items())),
                "violations": [str(v) for v in self.violations]}


def check_framework(D: Digraph, plan: IdentificationPlan, report: CheckReport) -> None:
    """Same-m constituents stay disjoint; every pair covered by the plan is
    glued at least once and nothing else is glued."""
    sets = {label: {D.live(v) for v in verts} for label, verts in D.constituents.items()}
    for m in range(plan.M + 1):
        group = [RayLabel(n, m) for n in range(m + 1)]
        for a in range(len(group)):
            for c in range(a + 1, len(group)):
                report.count("same-m disjoint")
                if sets[group[a]] & sets[group[c]]:
                    report.flag(None, "framework", f"{group[a]} meets {group[c]}")
    covered = {frozenset(e.pair) for e in plan.entries}
    for e in plan.entries:
        report.count("parity")
        if e.pair[0].m == e.pair[1].m:
            report.flag(e.step, "parity", f"equal m in {e.pair}")
    for a, c in product(sets, sets):
        if a < c and a.m != c.m and frozenset((a, c)) in covered:
            report.count("covered pair glued")
            if not sets[a] & sets[c]:
                report.flag(None, "parity", f"{a} and {c} never glued")


def _plan_matches_digraph(D: Digraph, plan: IdentificationPlan, report: CheckReport) -> None:
    sites: set[Site] = set()
    for e in plan.entries:
        report.count("pairs disjoint")
        for site in (e.g0, e.g1):
            if site in sites:
                report.flag(e.step, "disjoint pairs", f"{site} used twice")
            sites.add(site)
        if D.position(*e.g0) != D.position(*e.g1):
            report.flag(e.step, "identification", f"{e.g0} and {e.g1} are not merged")
        if e.g0[0] != e.pair[0] or e.g1[0] != e.pair[1]:
            report.flag(e.step, "identification", "g lies on the wrong constituent")


def _beyond(plan: IdentificationPlan, report: CheckReport) -> None:
    last: dict[RayLabel, int] = {}
    for e in plan.entries:
        for label, p in (e.g0, e.g1):
            report.count("beyond")
            if p <= last.get(label, -1):
                report.flag(e.step, "beyond", f"{label} position {p} not beyond {last[label]}")
        for label, p in (e.g0, e.g1):
            last[label] = max(last.get(label, -1), p)


def check_plan(D: Digraph, plan: IdentificationPlan, mode: Optional[str] = None,
               cap: int = 100_000) -> CheckReport:
    """Re-verify every recorded choice from the digraph alone."""
    mode = mode or plan.mode
    report = CheckReport(mode)
    check_framework(D, plan, report)
    _plan_matches_digraph(D, plan, report)
    _beyond(plan, report)
    if mode == "bounded":
        _check_bounded(D, plan, report)
    elif mode == "unbounded":
        _check_unbounded(D, plan, report, cap)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return report


def _check_bounded(D: Digraph, plan: IdentificationPlan, report: CheckReport) -> None:
    c = plan.c
    for e in plan.entries:
        (l0, p0), (l1, p1) = e.g0, e.g1
        w0, w1 = ray_word(D, l0), ray_word(D, l1)
        report.count("(i)")
        ok1 = (1 <= p1 and p1 + c < len(w1) and w1[p1 - 1] is not OUT
               and all(w1[p1 + k] is OUT for k in range(c)) and w1[p1 + c] is not OUT)
        if not ok1:
            report.flag(e.step, "(i)", f"g1={p1} on {l1} does not start an out-phase of length {c}")
        report.count("(ii)")
        ok2 = (c <= p0 < len(w0) and w0[p0] is not OUT
               and all(w0[p0 - 1 - k] is OUT for k in range(c))
               and (p0 - c == 0 or w0[p0 - c - 1] is not OUT))
        if not ok2:
            report.flag(e.step, "(ii)", f"g0={p0} on {l0} does not end an out-phase of length {c}")
        if not p0 > p1:
            report.flag(e.step, "(ii)", f"|R0 g0| = {p0} is not > |R1 g1| = {p1}")
        report.count("degree four")
        if D.degree(D.position(l0, p0)) != 4:
            report.flag(e.step, "degree", f"merged vertex has degree {D.degree(D.position(l0, p0))}")


def _phase_of(word: Sequence[Orientation], p: int) -> Optional[Phase]:
    found = phase_containing(word_phases(word), p)
    inner = [ph for ph in found if ph.start < p < ph.end]
    return inner[0] if inner else None


def _check_unbounded(D: Digraph, plan: IdentificationPlan, report: CheckReport, cap: int) -> None:
    g_vertices = {e.step: D.position(*e.g0) for e in plan.entries}
    spec_word = orientations(plan.spec, plan.L)
    for e in plan.entries:
        dists = []
        for eps, (label, p) in enumerate((e.g0, e.g1)):
            word = ray_word(D, label)
            report.count("(ii) not a turn")
            ph = _phase_of(word, p)
            if ph is None:
                report.flag(e.step, "(ii)", f"g{eps} at {p} on {label} is a turn or an end")
                continue
            dists += [p - ph.start, ph.end - p]
            report.count("(ii) phase exclusive")
            for other, g in g_vertices.items():
                if other == e.step:
                    continue
                if any(lab == label and ph.start <= q <= ph.end for lab, q in D.positions_of(g)):
                    report.flag(e.step, "(ii)", f"phase of g{eps} contains g_{other}")
        report.count("(ii) distances")
        if len(dists) == 4 and len(set(dists)) != 4:
            report.flag(e.step, "(ii)", f"distances {dists} not pairwise distinct")
        # (i) in D_i, exhaustively over all k <= i
        Di = D.rollback(e.step)
        g = Di.position(*e.g0)
        allowed = {e.g0[1], e.g1[1]}
        starts = sorted({Di.live(k) for k in range(e.step + 1)})
        for S in initial_segment_paths(Di, starts, g, spec_word, cap):
            report.count("(i) paths")
            if len(S) not in allowed:
                report.flag(e.step, "(i)", f"path of length {len(S)} from {S.first} reaches g")


# -- embedding audit -------------------------------------------------------


@dataclass
class AuditReport:
    embeddings: int = 0
    starts: int = 0
    confined: int = 0
    not_confined: list[Embedding] = field(default_factory=list)
    g_visits: int = 0
    case_counts: dict[int, int] = field(default_factory=dict)
    case_failures: list[tuple[Embedding, int]] = field(default_factory=list)
    direction_checked: int = 0
    direction_failures: list[Embedding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.not_confined or self.case_failures or self.direction_failures)


def case_at(D: Digraph, entry: PlanEntry, a: int, b: int) -> list[int]:
    """Which of the three cases hold at a bounded identification vertex for
    the two embedding arcs ``a`` and ``b`` incident with it."""
    (l0, p0), (l1, p1) = entry.g0, entry.g1
    arcs = [D.arc(a), D.arc(b)]
    out = []
    if all(x.label == l0 for x in arcs):
        out.append(1)
    if all(x.label == l1 for x in arcs):
        out.append(2)
    before1 = [x.label == l1 and x.index < p1 for x in arcs]
    after0 = [x.label == l0 and x.index >= p0 for x in arcs]
    if (before1[0] and after0[1]) or (before1[1] and after0[0]):
        out.append(3)
    return out


def settled_start(spec: RaySpec, length: int, c: int) -> int:
    """First turn index of the pattern word at or after the end of its last
    phase longer than c (at least 1)."""
    word = orientations(spec, length)
    long_end = max((ph.end for ph in word_phases(word) if ph.length > c and ph.complete),
                   default=1)
    turns_ = [j for j in range(max(long_end, 1), length) if word[j - 1] != word[j]]
    return turns_[0] if turns_ else length


def _forward_along(D: Digraph, emb: Embedding, k: int) -> Optional[bool]:
    """Whether arc k of the embedding runs along its constituent's direction
    (from position index to index+1)."""
    arc = D.arc(emb.arcs[k])
    if arc.label is None:
        return None
    return D.position(arc.label, arc.index) == emb.vertices[k]


def confined(D: Digraph, emb: Embedding, window: int) -> bool:
    if window <= 0:
        return True
    tail = [D.arc(a) for a in emb.arcs[-window:]]
    labels = {a.label for a in tail}
    if len(labels) != 1 or None in labels:
        return False
    idx = [a.index for a in tail]
    step = {y - x for x, y in zip(idx, idx[1:])}
    return len(idx) == 1 or step in ({1}, {-1})


def audit_embeddings(D: Digraph, plan: IdentificationPlan, length: Optional[int] = None,
                     window: Optional[int] = None, max_results: int = 100_000) -> AuditReport:
    """Exhaustive pattern embeddings of a bounded construction from every
    vertex: tail confinement, the three-case split at inner identification
    vertices of the settled part, and direction absorption there."""
    deepest = plan.deepest()
    length = length if length is not None else 2 * deepest
    window = window if window is not None else deepest
    g_at = {D.position(*e.g0): e for e in plan.entries}
    s0 = settled_start(plan.spec, length, plan.c or 0)
    report = AuditReport()
    for v in D.vertices:
        report.starts += 1
        for emb in D.trace_pattern(v, plan.spec, length, max_results):
            report.embeddings += 1
            if confined(D, emb, window):
                report.confined += 1
            else:
                report.not_confined.append(emb)
            for t in range(max(s0, 1), len(emb)):
                e = g_at.get(emb.vertices[t])
                if e is None:
                    continue
                report.g_visits += 1
                cases = case_at(D, e, emb.arcs[t - 1], emb.arcs[t])
                if len(cases) == 1:
                    report.case_counts[cases[0]] = report.case_counts.get(cases[0], 0) + 1
                else:
                    report.case_failures.append((emb, t))
            flags = [_forward_along(D, emb, k) for k in range(s0, len(emb))]
            report.direction_checked += 1
            opposite = [k for k, f in enumerate(flags) if f is False]
            if opposite and any(f is not False for f in flags[opposite[0]:]):
                report.direction_failures.append(emb)
    return report


# -- plan files ------------------------------------------------------------


def _site(site: Site) -> list:
    return [[site[0].n, site[0].m], site[1]]


def plan_to_dict(plan: IdentificationPlan) -> dict:
    return {
        "format": "raylab-plan/1",
        "mode": plan.mode,
        "spec": format_spec(plan.spec),
        "source_spec": format_spec(plan.source_spec),
        "reversed": plan.reversed,
        "c": plan.c,
        "M": plan.M,
        "L": plan.L,
        "requested": plan.requested,
        "completed": plan.completed,
        "stop_reason": plan.stop_reason,
        "entries": [
            {"step": e.step, "pair": [[e.pair[0].n, e.pair[0].m], [e.pair[1].n, e.pair[1].m]],
             "g0": _site(e.g0), "g1": _site(e.g1), "meta": e.meta}
            for e in plan.entries
        ],
    }


def plan_from_dict(data: dict) -> IdentificationPlan:
    plan = IdentificationPlan(data["mode"], parse_spec(data["spec"]), parse_spec(data["source_spec"]),
                              data["M"], data["L"], data["requested"], c=data["c"],
                              reversed=data["reversed"], stop_reason=data["stop_reason"])
    for e in data["entries"]:
        pair = (RayLabel(*e["pair"][0]), RayLabel(*e["pair"][1]))
        g0 = (RayLabel(*e["g0"][0]), e["g0"][1])
        g1 = (RayLabel(*e["g1"][0]), e["g1"][1])
        plan.entries.append(PlanEntry(e["step"], pair, g0, g1, e["meta"]))
    return plan


def build(spec: RaySpec, M: int, L: int, steps: int, strict: bool = False):
    """Dispatch on the classifier verdict."""
    kind = classify(spec).kind
    if kind == "bounded":
        return build_bounded(spec, M, L, steps, strict)
    if kind == "unbounded":
        return build_unbounded(spec, M, L, steps, strict)
    raise ValueError(f"{format_spec(spec)} has finitely many turns; no counterexample exists")
