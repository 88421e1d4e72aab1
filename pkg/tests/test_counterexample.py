import json

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from raylab import counterexample as cx
from raylab.digraph import RayLabel
from raylab.formats import dump_digraph, load_digraph
from raylab.rays import IN, OUT, Growing, Periodic, RaySpec, orientations, parse_spec

ALT = RaySpec((), Periodic((1, 1), OUT))
TWO_ONE = RaySpec((), Periodic((2, 1), OUT))
GROW = RaySpec((), Growing(1, 1, OUT))

R = RayLabel


def naive_bounded_plan(spec, c, M, steps, L):
    """Scan the word directly for the two turn conditions."""
    w = orientations(spec, L)
    used = {}
    out = []
    pairs = cx.j_sequence(M)

    def starts_run(p):
        return (p >= 1 and p + c < L and w[p - 1] is IN and w[p + c] is IN
                and all(w[p + k] is OUT for k in range(c)))

    def ends_run(q):
        return (q >= c and q < L and w[q] is IN and all(w[q - 1 - k] is OUT for k in range(c))
                and (q == c or w[q - c - 1] is IN))

    for _ in range(steps):
        r0, r1 = next(pairs)
        p1 = next(p for p in range(used.get(r1, 0) + 1, L) if starts_run(p))
        p0 = next(q for q in range(max(used.get(r0, 0), p1) + 1, L) if ends_run(q))
        used[r0], used[r1] = p0, p1
        out.append(((r0, p0), (r1, p1)))
    return out


class TestJ:
    def test_first_round(self):
        assert cx.enumerate_J(1).emitted == ((R(0, 0), R(0, 1)), (R(0, 0), R(1, 1)))

    def test_second_round_prefix(self):
        second = cx.j_round(2)
        assert second[:5] == [(R(0, 0), R(0, 1)), (R(0, 0), R(0, 2)), (R(0, 0), R(1, 1)),
                              (R(0, 0), R(1, 2)), (R(0, 0), R(2, 2))]
        # one, two and three labels with m = 0, 1, 2: 1*2 + 1*3 + 2*3 pairs
        assert len(second) == 11

    def test_pairs_recur_and_have_distinct_m(self):
        emitted = cx.enumerate_J(6).emitted
        assert all(a.m < b.m for a, b in emitted)
        for pair in set(emitted):
            first_round = max(max(label.n, label.m) for label in pair)
            assert emitted.count(pair) == 6 - first_round + 1

    def test_restricted_sequence(self):
        seq = cx.j_sequence(1)
        assert [next(seq) for _ in range(4)] == [(R(0, 0), R(0, 1)), (R(0, 0), R(1, 1))] * 2
        with pytest.raises(ValueError):
            next(cx.j_sequence(0))


class TestBounded:
    @pytest.mark.parametrize("spec,expected", [
        (ALT, [(2, 3), (2, 5), (4, 7), (2, 9), (4, 11), (2, 13)]),
        (TWO_ONE, [(3, 5), (3, 8), (6, 11), (3, 14), (6, 17), (3, 20)]),
    ])
    def test_hand_values(self, spec, expected):
        D, plan = cx.build_bounded(spec, 3, 150, 6)
        assert [(e.g1[1], e.g0[1]) for e in plan.entries] == expected
        assert plan.deepest() == expected[-1][1]
        assert cx.check_plan(D, plan).ok

    @settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(st.lists(st.integers(1, 3), min_size=1, max_size=4), st.integers(1, 3),
           st.integers(1, 8))
    def test_matches_direct_scan(self, period, M, steps):
        spec = RaySpec((), Periodic(tuple(period) if len(period) % 2 == 0 else tuple(period) * 2,
                                    OUT))
        D, plan = cx.build_bounded(spec, M, 200, steps)
        expected = naive_bounded_plan(plan.spec, plan.c, M, steps, 200)
        assert [(e.g0, e.g1) for e in plan.entries] == expected
        assert cx.check_plan(D, plan).ok

    def test_reversal_when_out_runs_of_length_c_do_not_recur(self):
        spec = parse_spec("prefix=;tail=period:+--")
        D, plan = cx.build_bounded(spec, 2, 100, 4)
        assert plan.reversed and plan.c == 2
        assert plan.source_spec == spec
        assert cx.check_plan(D, plan).ok

    def test_degree_four(self):
        D, plan = cx.build_bounded(ALT, 3, 60, 6)
        for e in plan.entries:
            assert D.degree(D.position(*e.g0)) == 4

    def test_zero_steps(self):
        D, plan = cx.build_bounded(ALT, 2, 20, 0)
        assert plan.entries == [] and len(D.vertices) == 6 * 21
        assert cx.check_plan(D, plan).ok

    def test_truncation(self):
        D, plan = cx.build_bounded(ALT, 2, 8, 10)
        assert plan.completed < plan.requested and plan.stop_reason
        assert cx.check_plan(D, plan).ok
        with pytest.raises(cx.DepthExhausted):
            cx.build_bounded(ALT, 2, 8, 10, strict=True)

    def test_rejects_unbounded_spec(self):
        with pytest.raises(cx.SpecNotBounded):
            cx.build_bounded(GROW, 2, 50, 1)

    def test_negative_control(self):
        # g1 moved off the start of an out-phase
        b = cx.base_builder(ALT, 1, 20)
        b.identify(b._constituents[R(0, 0)][3], b._constituents[R(0, 1)][3], step=0)
        D = b.freeze()
        plan = cx.IdentificationPlan("bounded", ALT, ALT, 1, 20, 1, c=1)
        plan.entries.append(cx.PlanEntry(0, (R(0, 0), R(0, 1)), (R(0, 0), 3), (R(0, 1), 3)))
        report = cx.check_plan(D, plan)
        assert not report.ok
        assert {v.condition for v in report.violations} >= {"(i)", "(ii)"}

    def test_framework_detects_missing_glue(self):
        D, plan = cx.build_bounded(ALT, 1, 20, 2)
        plain = cx.base_builder(ALT, 1, 20).freeze()
        assert not cx.check_plan(plain, plan).ok


class TestUnbounded:
    def test_hand_values(self):
        D, plan = cx.build_unbounded(GROW, 2, 400, 3)
        assert [(e.g0[1], e.g1[1]) for e in plan.entries] == [(4, 24), (11, 60), (22, 112)]
        report = cx.check_plan(D, plan)
        assert report.ok, report.violations

    def test_distances(self):
        _, plan = cx.build_unbounded(GROW, 2, 400, 3)
        for e in plan.entries:
            m0, m1 = e.meta["M0"], e.meta["M1"]
            len0, len1 = m0[1] - m0[0], m1[1] - m1[0]
            assert len0 >= 3 and len1 >= 2 * len0 + 1
            assert e.meta["distances"] == [1, len0 - 1, len0, len1 - len0]

    def test_non_turn_vertices(self):
        D, plan = cx.build_unbounded(GROW, 2, 400, 3)
        w = orientations(GROW, 400)
        for e in plan.entries:
            for _, p in (e.g0, e.g1):
                assert w[p - 1] == w[p]

    def test_rejects_bounded_spec(self):
        with pytest.raises(cx.SpecNotUnbounded):
            cx.build_unbounded(ALT, 2, 50, 1)

    def test_truncation(self):
        _, plan = cx.build_unbounded(GROW, 2, 60, 3)
        assert plan.completed < 3 and plan.stop_reason

    def test_dispatch(self):
        assert cx.build(GROW, 1, 200, 1)[1].mode == "unbounded"
        assert cx.build(ALT, 1, 50, 1)[1].mode == "bounded"
        with pytest.raises(ValueError):
            cx.build(parse_spec("prefix=+-;tail=out"), 1, 20, 1)


class TestAudit:
    def test_small_bounded_audit(self):
        D, plan = cx.build_bounded(ALT, 2, 40, 3)
        report = cx.audit_embeddings(D, plan)
        assert report.embeddings > 0 and report.g_visits > 0
        assert report.ok
        assert set(report.case_counts) <= {1, 2, 3}


class TestPlanFiles:
    @pytest.mark.parametrize("spec,builder", [(ALT, cx.build_bounded), (GROW, cx.build_unbounded)])
    def test_round_trip(self, spec, builder):
        D, plan = builder(spec, 2, 300, 3)
        data = json.loads(json.dumps(cx.plan_to_dict(plan)))
        again = cx.plan_from_dict(data)
        assert again.entries == plan.entries and again.spec == plan.spec
        assert cx.plan_to_dict(again) == cx.plan_to_dict(plan)
        D2 = load_digraph(dump_digraph(D))
        assert cx.check_plan(D2, again).ok
