import networkx as nx
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from raylab import counterexample as cx
from raylab.digraph import DigraphBuilder, RayLabel
from raylab.instances import random_digraph, spec_corpus
from raylab.oracle import (Aperiodic, AtLeast, Confined, Exactly, Mixed, OverBudget,
                           PeriodicWitness, SearchBudget, brute_disjoint_out_dipaths,
                           brute_max_disjoint_dipaths, max_disjoint_copies, periodicity_probe,
                           strict_dipaths, tail_confinement)
from raylab.rays import OUT, AllOut, Growing, Periodic, RaySpec

PROPS = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
OUT_RAY = RaySpec((), AllOut())
ALT = RaySpec((), Periodic((1, 1), OUT))


def dipaths(*paths):
    b = DigraphBuilder()
    for _ in range(max(v for p in paths for v in p) + 1):
        b.add_vertex()
    for p in paths:
        for x, y in zip(p, p[1:]):
            b.add_arc(x, y)
    return b.freeze()


class TestDisjointCopies:
    def test_two_disjoint_dipaths(self):
        d = dipaths((0, 1, 2, 3), (4, 5, 6, 7))
        assert max_disjoint_copies(d, OUT_RAY, 3, 5) == Exactly(2)
        assert max_disjoint_copies(d, OUT_RAY, 3, 2) == AtLeast(2)

    def test_shared_vertex(self):
        d = dipaths((0, 1, 2), (3, 1, 4))
        assert max_disjoint_copies(d, OUT_RAY, 2, 5) == Exactly(1)

    def test_budget(self):
        d = random_digraph(1, 10, 0.5)
        assert isinstance(max_disjoint_copies(d, OUT_RAY, 4, 10, SearchBudget(max_nodes=5)),
                          OverBudget)

    def test_rejects_empty_prefix(self):
        with pytest.raises(ValueError):
            max_disjoint_copies(dipaths((0, 1)), OUT_RAY, 0, 1)

    @PROPS
    @given(st.integers(0, 10**6), st.integers(3, 9))
    def test_single_arcs_match_a_maximum_matching(self, seed, n):
        # vertex-disjoint arcs are a matching of the underlying graph
        d = random_digraph(seed, n, 0.3)
        g = nx.Graph()
        g.add_edges_from((a.tail, a.head) for a in d.arcs)
        expected = len(nx.max_weight_matching(g, maxcardinality=True))
        assert max_disjoint_copies(d, OUT_RAY, 1, n) == Exactly(expected)

    @PROPS
    @given(st.integers(0, 10**6))
    def test_adding_a_disjoint_copy_adds_one(self, seed):
        d = random_digraph(seed, 7, 0.3)
        before = max_disjoint_copies(d, OUT_RAY, 2, 20)
        b = DigraphBuilder()
        for _ in range(10):
            b.add_vertex()
        for a in d.arcs:
            b.add_arc(a.tail, a.head)
        b.add_arc(7, 8)
        b.add_arc(8, 9)
        after = max_disjoint_copies(b.freeze(), OUT_RAY, 2, 20)
        assert after == Exactly(before.k + 1)


class TestDipathOracles:
    def test_strict_paths(self):
        d = dipaths((0, 1, 2, 3))
        assert sorted(strict_dipaths(d, {0, 1}, {2, 3})) == [(1, 2)]

    @PROPS
    @given(st.integers(0, 10**6))
    def test_monotone_in_targets(self, seed):
        d = random_digraph(seed, 8, 0.3)
        assert (brute_max_disjoint_dipaths(d, {0, 1, 2}, {6, 7})
                <= brute_max_disjoint_dipaths(d, {0, 1, 2}, {5, 6, 7}))

    def test_disjoint_out_dipaths(self):
        d = dipaths((0, 1, 2, 3), (4, 1, 5, 6), (7, 8, 9, 10))
        assert brute_disjoint_out_dipaths(d, {0, 4, 7}, 2, 3)
        assert not brute_disjoint_out_dipaths(d, {0, 4, 7}, 3, 3)
        assert not brute_disjoint_out_dipaths(d, {0, 7}, 1, 4)


class TestTailConfinement:
    def setup_method(self):
        self.D, self.plan = cx.build_bounded(ALT, 1, 20, 1)

    def test_along_one_ray(self):
        label = RayLabel(0, 0)
        start = self.D.position(label, 10)
        emb = next(e for e in self.D.trace_pattern(start, ALT, 6)
                   if all(self.D.arc(a).label == label for a in e.arcs))
        assert tail_confinement(self.D, emb, 6) == Confined(label)

    def test_switching_rays(self):
        b = DigraphBuilder()
        b.add_ray_prefix(RayLabel(0, 0), OUT_RAY, 4)
        b.add_ray_prefix(RayLabel(0, 1), OUT_RAY, 4)
        b.identify(2, 7, step=0)
        d = b.freeze()
        walks = {tuple(d.arc(a).label for a in e.arcs): e for e in d.trace_pattern(0, OUT_RAY, 4)}
        mixed = walks[(RayLabel(0, 0), RayLabel(0, 0), RayLabel(0, 1), RayLabel(0, 1))]
        assert tail_confinement(d, mixed, 3) == Mixed((RayLabel(0, 0), RayLabel(0, 1)))
        assert tail_confinement(d, mixed, 2) == Confined(RayLabel(0, 1))

    def test_no_switch_at_identified_vertices(self):
        # in the bounded construction, short alternating walks through g
        # stay on one constituent
        e = self.plan.entries[0]
        g = self.D.position(*e.g0)
        for v in self.D.vertices:
            for emb in self.D.trace_pattern(v, ALT, 4):
                if g in emb.vertices[1:-1]:
                    assert isinstance(tail_confinement(self.D, emb, 4), Confined)

    def test_window_too_long(self):
        emb = self.D.trace_pattern(0, ALT, 3)[0]
        with pytest.raises(ValueError):
            tail_confinement(self.D, emb, 4)


class TestPeriodicity:
    def test_examples(self):
        assert periodicity_probe(ALT, 30, 100) == PeriodicWitness(0, 2)
        assert periodicity_probe(RaySpec((), Periodic((2, 1), OUT)), 30, 100) == \
            PeriodicWitness(0, 3)
        assert periodicity_probe(RaySpec((), Growing(1, 1, OUT)), 30, 100) == Aperiodic()

    def test_constant_tail_is_periodic(self):
        assert periodicity_probe(OUT_RAY, 5, 50) == PeriodicWitness(0, 1)

    def test_bounds(self):
        with pytest.raises(ValueError):
            periodicity_probe(ALT, 0, 10)

    def test_corpus_dichotomy(self):
        for spec in spec_corpus(21, 150):
            probe = periodicity_probe(spec, 30, 100)
            if isinstance(spec.tail, Growing):
                assert probe == Aperiodic()
            elif isinstance(spec.tail, Periodic):
                if len(spec.prefix) + 2 * sum(spec.tail.period) <= 30:
                    assert isinstance(probe, PeriodicWitness)
            else:
                assert isinstance(probe, PeriodicWitness)
