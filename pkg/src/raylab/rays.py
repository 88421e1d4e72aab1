"""Finitely described oriented rays.

A ray is encoded as the orientation sequence of its arcs, read from the
vertex of degree one.  ``OUT`` means the arc points away from that origin.
The sequence is an explicit finite prefix followed by a tail generator.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union


class Orientation(enum.Enum):
    OUT = "+"
    IN = "-"

    def flip(self) -> "Orientation":
        return Orientation.IN if self is Orientation.OUT else Orientation.OUT

    def __repr__(self) -> str:
        return f"Orientation.{self.name}"


OUT = Orientation.OUT
IN = Orientation.IN


@dataclass(frozen=True)
class AllOut:
    pass


@dataclass(frozen=True)
class AllIn:
    pass


@dataclass(frozen=True)
class Periodic:
    """Phases of lengths ``period[0], period[1], ...`` repeated forever,
    orientations alternating from ``first``."""

    period: tuple[int, ...]
    first: Orientation = OUT

    def __post_init__(self) -> None:
        object.__setattr__(self, "period", tuple(self.period))
        if not self.period or any(p < 1 for p in self.period):
            raise ValueError(f"period must be a nonempty sequence of lengths >= 1: {self.period}")

    @property
    def arc_length(self) -> int:
        return sum(self.period)


@dataclass(frozen=True)
class Growing:
    """Phases of lengths ``start, start+step, start+2*step, ...``."""

    start: int
    step: int
    first: Orientation = OUT

    def __post_init__(self) -> None:
        if self.start < 1 or self.step < 1:
            raise ValueError("Growing needs start >= 1 and step >= 1")


TailGen = Union[AllOut, AllIn, Periodic, Growing]


@dataclass(frozen=True)
class RaySpec:
    prefix: tuple[Orientation, ...] = ()
    tail: TailGen = AllOut()

    def __post_init__(self) -> None:
        object.__setattr__(self, "prefix", tuple(self.prefix))

    def __str__(self) -> str:
        return format_spec(self)


@dataclass(frozen=True)
class PhaseView:
    index: int
    length: int
    orientation: Orientation
    first_arc: int
    last_arc: int
    truncated: bool = False


@dataclass(frozen=True)
class Verdict:
    """``kind`` is one of ``finitely_many_turns``, ``bounded``, ``unbounded``."""

    kind: str
    c: Optional[int] = None

    @property
    def ubiquitous(self) -> bool:
        return self.kind == "finitely_many_turns"

    def __str__(self) -> str:
        if self.kind == "finitely_many_turns":
            return "Ubiquitous (finitely many turns)"
        if self.kind == "bounded":
            return f"NonUbiquitous (bounded, c={self.c})"
        return "NonUbiquitous (unbounded)"


# --------------------------------------------------------------------------
# arc sequences


def _tail_phases(tail: TailGen) -> Iterator[tuple[int, Orientation]]:
    """Yield (length, orientation) for the phases of a generator with at
    least one turn."""
    if isinstance(tail, Periodic):
        orientation = tail.first
        for length in itertools.cycle(tail.period):
            yield length, orientation
            orientation = orientation.flip()
    elif isinstance(tail, Growing):
        orientation = tail.first
        length = tail.start
        while True:
            yield length, orientation
            orientation = orientation.flip()
            length += tail.step
    else:
        raise TypeError(f"{tail!r} has a single infinite phase")


def _tail_arcs(tail: TailGen) -> Iterator[Orientation]:
    if isinstance(tail, AllOut):
        return itertools.repeat(OUT)
    if isinstance(tail, AllIn):
        return itertools.repeat(IN)
    return (o for length, o in _tail_phases(tail) for _ in range(length))


def iter_arcs(spec: RaySpec) -> Iterator[Orientation]:
    """Lazy infinite orientation sequence of the ray."""
    return itertools.chain(spec.prefix, _tail_arcs(spec.tail))


def orientations(spec: RaySpec, n: int, start: int = 0) -> tuple[Orientation, ...]:
    """Orientations of arcs ``start, ..., start+n-1``."""
    if start > 0 and start >= len(spec.prefix):
        return orientations(tail_spec(spec, start), n)
    return tuple(itertools.islice(iter_arcs(spec), start, start + n))


def orientation_at(spec: RaySpec, i: int) -> Orientation:
    if i < 0:
        raise ValueError("arc index must be >= 0")
    if i < len(spec.prefix):
        return spec.prefix[i]
    i -= len(spec.prefix)
    tail = spec.tail
    if isinstance(tail, AllOut):
        return OUT
    if isinstance(tail, AllIn):
        return IN
    if isinstance(tail, Periodic):
        cycles, i = divmod(i, tail.arc_length)
        orientation = tail.first
        if (cycles * len(tail.period)) % 2:
            orientation = orientation.flip()
        for length in tail.period:
            if i < length:
                return orientation
            i -= length
            orientation = orientation.flip()
        raise AssertionError("unreachable")
    for length, orientation in _tail_phases(tail):
        if i < length:
            return orientation
        i -= length
    raise AssertionError("unreachable")


def phases(spec: RaySpec, upto_arc: int) -> list[PhaseView]:
    """Maximal same-orientation runs over arcs ``[0, upto_arc)``.

    The last run is flagged ``truncated`` when arc ``upto_arc`` continues it.
    """
    if upto_arc < 1:
        raise ValueError("upto_arc must be >= 1")
    arcs = orientations(spec, upto_arc + 1)
    views = []
    start = 0
    for i in range(1, upto_arc + 1):
        if i == upto_arc or arcs[i] != arcs[i - 1]:
            views.append(PhaseView(len(views), i - start, arcs[start], start, i - 1))
            start = i
    last = views[-1]
    if arcs[upto_arc] == last.orientation:
        views[-1] = PhaseView(last.index, last.length, last.orientation,
                              last.first_arc, last.last_arc, truncated=True)
    return views


def turns(spec: RaySpec, upto_vertex: int) -> list[int]:
    if upto_vertex < 1:
        raise ValueError("upto_vertex must be >= 1")
    arcs = orientations(spec, upto_vertex)
    return [j for j in range(1, upto_vertex) if arcs[j - 1] != arcs[j]]


def has_turns_forever(spec: RaySpec) -> bool:
    return isinstance(spec.tail, (Periodic, Growing))


def representing_sequence(spec: RaySpec, n_terms: int) -> Optional[list[int]]:
    """First ``n_terms`` phase lengths, or None when the ray has finitely
    many turns (no representing sequence exists)."""
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    if not has_turns_forever(spec):
        return None
    lengths: list[int] = []
    current: Optional[Orientation] = None
    run = 0
    for o in iter_arcs(spec):
        if o == current:
            run += 1
            continue
        if current is not None:
            lengths.append(run)
            if len(lengths) == n_terms:
                return lengths
        current, run = o, 1
    raise AssertionError("unreachable")


def _reverse_tail(tail: TailGen) -> TailGen:
    if isinstance(tail, AllOut):
        return AllIn()
    if isinstance(tail, AllIn):
        return AllOut()
    if isinstance(tail, Periodic):
        return Periodic(tail.period, tail.first.flip())
    return Growing(tail.start, tail.step, tail.first.flip())


def reverse(spec: RaySpec) -> RaySpec:
    return RaySpec(tuple(o.flip() for o in spec.prefix), _reverse_tail(spec.tail))


# --------------------------------------------------------------------------
# shifting and normal form


def _shift_tail(tail: TailGen, k: int) -> RaySpec:
    if k == 0 or isinstance(tail, (AllOut, AllIn)):
        return RaySpec((), tail)
    if isinstance(tail, Periodic):
        cycles, k = divmod(k, tail.arc_length)
        first = tail.first.flip() if (cycles * len(tail.period)) % 2 else tail.first
        period = list(tail.period)
        j = 0
        while k >= period[j]:
            k -= period[j]
            j += 1
            first = first.flip()
        if k == 0:
            return RaySpec((), Periodic(tuple(period[j:] + period[:j]), first))
        rest = (first,) * (period[j] - k)
        j += 1
        rotated = tuple(period[j:] + period[:j])
        return RaySpec(rest, Periodic(rotated, first.flip()))
    start, first = tail.start, tail.first
    while k >= start:
        k -= start
        start += tail.step
        first = first.flip()
    if k == 0:
        return RaySpec((), Growing(start, tail.step, first))
    return RaySpec((first,) * (start - k), Growing(start + tail.step, tail.step, first.flip()))


def normalize(spec: RaySpec) -> RaySpec:
    """Fold trailing prefix arcs into the generator where the generator
    can be extended backwards by whole phases."""
    prefix = list(spec.prefix)
    tail = spec.tail
    while prefix:
        if isinstance(tail, AllOut) and prefix[-1] is OUT:
            prefix.pop()
        elif isinstance(tail, AllIn) and prefix[-1] is IN:
            prefix.pop()
        elif isinstance(tail, Periodic):
            length, o = tail.period[-1], tail.first.flip()
            if len(prefix) < length or any(x is not o for x in prefix[-length:]):
                break
            del prefix[-length:]
            tail = Periodic((length,) + tail.period[:-1], o)
        elif isinstance(tail, Growing):
            length, o = tail.start - tail.step, tail.first.flip()
            if length < 1 or len(prefix) < length or any(x is not o for x in prefix[-length:]):
                break
            del prefix[-length:]
            tail = Growing(length, tail.step, o)
        else:
            break
    return RaySpec(tuple(prefix), tail)


def tail_spec(spec: RaySpec, k: int) -> RaySpec:
    """The tail of the ray starting at vertex ``k``, in normal form."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k < len(spec.prefix):
        return normalize(RaySpec(spec.prefix[k:], spec.tail))
    shifted = _shift_tail(spec.tail, k - len(spec.prefix))
    return normalize(shifted)


def prefix_isomorphic(a: RaySpec, offset_a: int, b: RaySpec, offset_b: int, length: int) -> bool:
    """Rooted prefixes are isomorphic iff their orientation words agree."""
    if length < 0:
        raise ValueError("length must be >= 0")
    return orientations(a, length, offset_a) == orientations(b, length, offset_b)


def matches_prefix(spec: RaySpec, word: Sequence[Orientation]) -> bool:
    return tuple(word) == orientations(spec, len(word))


# --------------------------------------------------------------------------
# classification


def classify(spec: RaySpec) -> Verdict:
    tail = spec.tail
    if isinstance(tail, (AllOut, AllIn)):
        return Verdict("finitely_many_turns")
    if isinstance(tail, Periodic):
        return Verdict("bounded", max(tail.period))
    return Verdict("unbounded")


def out_phase_lengths_recur(spec: RaySpec, length: int) -> bool:
    """Whether out-oriented phases of the given length occur infinitely often."""
    tail = spec.tail
    if isinstance(tail, Periodic):
        if len(tail.period) % 2:
            return length in tail.period
        return any(p == length and (j % 2 == 0) == (tail.first is OUT)
                   for j, p in enumerate(tail.period))
    if isinstance(tail, Growing):
        return True
    return False


# --------------------------------------------------------------------------
# text grammar:  prefix=<+-word>;tail=out|in|period:<+-word>|grow:<start>,<step>,<+|->


class SpecSyntaxError(ValueError):
    pass


def _word(text: str) -> tuple[Orientation, ...]:
    try:
        return tuple(Orientation(ch) for ch in text)
    except ValueError:
        raise SpecSyntaxError(f"orientation word may only contain '+' and '-': {text!r}") from None


def _runs(word: Sequence[Orientation]) -> list[int]:
    return [len(list(group)) for _, group in itertools.groupby(word)]


def _periodic_from_word(word: tuple[Orientation, ...]) -> RaySpec:
    if len(set(word)) == 1:
        return RaySpec((), AllOut() if word[0] is OUT else AllIn())
    if word[0] != word[-1]:
        return RaySpec((), Periodic(tuple(_runs(word)), word[0]))
    k = _runs(word)[0]
    rotated = word[k:] + word[:k]
    return RaySpec(word[:k], Periodic(tuple(_runs(rotated)), rotated[0]))


def parse_spec(text: str) -> RaySpec:
    fields = {}
    for part in text.strip().split(";"):
        if not part.strip():
            continue
        key, sep, value = part.partition("=")
        if not sep:
            raise SpecSyntaxError(f"expected key=value, got {part!r}")
        fields[key.strip()] = value.strip()
    unknown = set(fields) - {"prefix", "tail"}
    if unknown:
        raise SpecSyntaxError(f"unknown field(s): {', '.join(sorted(unknown))}")
    if "tail" not in fields:
        raise SpecSyntaxError("missing tail=")
    prefix = _word(fields.get("prefix", ""))
    tail_text = fields["tail"]
    if tail_text == "out":
        return RaySpec(prefix, AllOut())
    if tail_text == "in":
        return RaySpec(prefix, AllIn())
    if tail_text.startswith("period:"):
        word = _word(tail_text[len("period:"):])
        if not word:
            raise SpecSyntaxError("period word must be nonempty")
        generated = _periodic_from_word(word)
        return normalize(RaySpec(prefix + generated.prefix, generated.tail))
    if tail_text.startswith("grow:"):
        parts = tail_text[len("grow:"):].split(",")
        if len(parts) != 3 or parts[2] not in ("+", "-"):
            raise SpecSyntaxError(f"expected grow:<start>,<step>,<+|->, got {tail_text!r}")
        try:
            start, step = int(parts[0]), int(parts[1])
        except ValueError:
            raise SpecSyntaxError(f"grow start/step must be integers: {tail_text!r}") from None
        if start < 1 or step < 1:
            raise SpecSyntaxError("grow start and step must be >= 1")
        return RaySpec(prefix, Growing(start, step, Orientation(parts[2])))
    raise SpecSyntaxError(f"unknown tail {tail_text!r}")


def format_spec(spec: RaySpec) -> str:
    prefix = "".join(o.value for o in spec.prefix)
    tail = spec.tail
    if isinstance(tail, AllOut):
        tail_text = "out"
    elif isinstance(tail, AllIn):
        tail_text = "in"
    elif isinstance(tail, Periodic):
        cycle = tail.arc_length * (2 if len(tail.period) % 2 else 1)
        tail_text = "period:" + "".join(o.value for o in itertools.islice(_tail_arcs(tail), cycle))
    else:
        tail_text = f"grow:{tail.start},{tail.step},{tail.first.value}"
    return f"prefix={prefix};tail={tail_text}"
