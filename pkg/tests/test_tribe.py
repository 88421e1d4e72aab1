import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from raylab.digraph import Embedding
from raylab.instances import synthetic_tribe
from raylab.oracle import enumerate_forked_selections, is_forked_selection
from raylab.rays import AllOut, RaySpec
from raylab.tribe import InsufficientThickness, Tribe, forked_subtribe, is_forked, is_thick_upto

PROPS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
OUT_RAY = RaySpec((), AllOut())


def path(*vs):
    return Embedding(tuple(vs), tuple(range(len(vs) - 1)), (True,) * (len(vs) - 1))


def tribe_of_sizes(sizes, hat_len=0):
    layers, v = [], 0
    for size in sizes:
        layer = []
        for _ in range(size):
            layer.append(path(v, v + 1, v + 2))
            v += 3
        layers.append(layer)
    return Tribe(tuple(layers), OUT_RAY, hat_len)


def as_sets(layers):
    return tuple(frozenset(layer) for layer in layers)


class TestThickness:
    def test_examples(self):
        assert is_thick_upto(tribe_of_sizes([1, 2, 3]), 3)
        assert is_thick_upto(tribe_of_sizes([5]), 5)
        assert not is_thick_upto(tribe_of_sizes([1, 1]), 2)

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            is_thick_upto(tribe_of_sizes([1]), 0)


class TestIsForked:
    def test_empty_hat(self):
        a, b = path(0, 1, 2), path(0, 5, 6)
        assert is_forked(Tribe(((a,), (b,)), OUT_RAY, 0))

    def test_shared_hat_vertex(self):
        a, b = path(0, 1, 2, 3), path(9, 1, 8, 7)
        assert not is_forked(Tribe(((a,), (b,)), OUT_RAY, 2))

    def test_hat_meets_far_tail(self):
        a, b = path(0, 1, 2, 3), path(9, 8, 7, 1)
        assert not is_forked(Tribe(((a,), (b,)), OUT_RAY, 2))

    def test_tails_may_meet(self):
        a, b = path(0, 1, 2, 3, 4), path(9, 8, 7, 4)
        assert is_forked(Tribe(((a,), (b,)), OUT_RAY, 1))

    def test_disjoint(self):
        assert is_forked(tribe_of_sizes([2, 3], hat_len=2))

    def test_layer_members_must_be_disjoint(self):
        with pytest.raises(ValueError):
            Tribe(((path(0, 1), path(1, 2)),), OUT_RAY)


class TestForkedSubtribe:
    def test_zero_layers(self):
        out = forked_subtribe(tribe_of_sizes([3]), 0)
        assert out.layers == ((),)

    def test_disjoint_input(self):
        t = tribe_of_sizes([3, 4, 5, 6], hat_len=1)
        out = forked_subtribe(t, 3)
        assert out.layer_sizes() == [0, 1, 2, 3]
        assert is_forked(out)

    def test_engineered_overlap(self):
        # two layers of six members over a shared pool; the search and the
        # exhaustive oracle must agree on a forked selection
        found = 0
        for seed in range(12):
            _, t = synthetic_tribe(seed, (6, 6), length=4, hat_len=2, pool=40)
            selections = {tuple(as_sets(s)) for s in enumerate_forked_selections(t, 2)}
            assert selections  # a forked selection exists
            try:
                out = forked_subtribe(t, 2)
            except InsufficientThickness as exc:
                assert exc.bound == t.hat_size + 2
                continue
            found += 1
            assert is_forked(out)
            assert as_sets(out.layers) in selections
        assert found >= 3

    def test_insufficient_reports_the_bound(self):
        t = tribe_of_sizes([2, 2], hat_len=2)
        with pytest.raises(InsufficientThickness) as info:
            forked_subtribe(t, 1)
        assert info.value.n == 1 and info.value.bound == 4 and info.value.largest == 2

    def test_guard_on_large_layers(self):
        t = tribe_of_sizes([25], hat_len=1)
        with pytest.raises(ValueError):
            forked_subtribe(t, 1)
        assert forked_subtribe(t, 1, max_choice=None).layer_sizes() == [0, 1]

    def test_explicit_sizes(self):
        t = tribe_of_sizes([4, 6, 9], hat_len=1)
        out = forked_subtribe(t, 2, sizes=[2, 7])
        assert out.layer_sizes() == [0, 2, 7]
        assert is_forked(out)

    @PROPS
    @given(st.integers(0, 10**6), st.integers(1, 3))
    def test_output_is_valid_and_among_selections(self, seed, max_layer):
        sizes = tuple(range(3 + max_layer, 3 + 2 * max_layer + 1))
        _, t = synthetic_tribe(seed, sizes, length=3, hat_len=1, pool=70)
        try:
            out = forked_subtribe(t, max_layer)
        except InsufficientThickness:
            return
        assert is_forked(out)
        assert out.layer_sizes() == list(range(max_layer + 1))
        for layer, src in zip(out.layers[1:], out.sources[1:]):
            assert set(layer) <= set(t.layers[src])
        assert is_forked_selection(t, out.layers, max_layer)

    @PROPS
    @given(st.integers(0, 10**6))
    def test_monotone_under_enlarging_layers(self, seed):
        _, big = synthetic_tribe(seed, (7, 7, 7), length=3, hat_len=1, pool=60)
        small = Tribe(tuple(layer[:5] for layer in big.layers), big.pattern, big.hat_len)
        try:
            forked_subtribe(small, 3)
        except InsufficientThickness:
            return
        forked_subtribe(big, 3)
