import math
import random
from fractions import Fraction

import pytest

from wkserver.adversary import GeneratorSpec, generate
from wkserver.core import DemandVector
from wkserver.errors import ValidationError
from wkserver.phase_model import Status as ParseStatus
from wkserver.phase_model import parse_phase
from wkserver.setting import Setting
from wkserver.strategy import (
    TRACE_HEADER,
    RngStream,
    Status,
    derive_seed,
    make_phase_strategy,
    run_1_phase,
    run_multiphase,
    run_phase,
    serve_online,
)

P, Q, R = 0, 1, 2


@pytest.fixture
def s2():
    return Setting.uniform(20, (1, 2))


@pytest.fixture
def small():
    return Setting.uniform(20, (1, 2), d=(1, 3))


def test_seed_derivation_is_stable():
    assert derive_seed(0, "/E") == derive_seed(0, "/E")
    assert derive_seed(0, "/E") != derive_seed(1, "/E") != derive_seed(0, "/M0")
    a, b = RngStream(7), RngStream(7)
    assert a.permutation(range(10)) == b.permutation(range(10))
    assert sorted(a.permutation(range(10))) == list(range(10))


def test_permutation_is_uniform():
    counts = {}
    for s in range(6000):
        perm = RngStream(s).permutation((0, 1, 2))
        counts[perm] = counts.get(perm, 0) + 1
    assert len(counts) == 6
    # binomial(6000, 1/6): sd ~ 28.9
    assert all(abs(c - 1000) < 5 * 28.9 for c in counts.values())


# -- 1-phase ---------------------------------------------------------------------------------


def test_run_1_phase_examples(s2):
    res = run_1_phase(s2, {Q}, (R, Q), [Q, P, Q, P, R])
    assert res.status is Status.TERMINATED and res.consumed == 4
    assert res.demand == DemandVector.unit(P) and res.cost == 1

    res = run_1_phase(s2, (), (R, Q), [P, P, P])
    assert res.status is Status.AWAITING and res.cost == 1 and res.demand is None
    assert run_1_phase(s2, (), (P, Q), [P, P, P]).cost == 0

    res = run_1_phase(s2, {Q}, (P, Q), [P, P, R])
    assert res.terminated and res.consumed == 2 and res.cost == 0 and res.demand == DemandVector.unit(P)


def test_anchor_precondition(s2):
    with pytest.raises(ValidationError):
        run_1_phase(s2, {Q}, (P, R), [P])
    with pytest.raises(ValidationError):
        run_1_phase(s2, {Q}, (P, Q), [99])


# -- multiphase -------------------------------------------------------------------------------


def test_run_multiphase_examples(s2):
    res = run_multiphase(s2, 1, (), (R, Q), [P, P, Q, Q, R])
    assert res.terminated and res.consumed == 4
    assert res.demand == DemandVector({P: 1, Q: 1})
    assert run_multiphase(s2, 1, (), (R, Q), [P, Q]).status is Status.AWAITING
    res = run_multiphase(s2, 1, (), (R, Q), [])
    assert res.status is Status.AWAITING and res.cost == 0 and res.consumed == 0
    with pytest.raises(ValidationError):
        run_multiphase(s2, 2, (), (R, Q), [P])


# -- phase strategy -----------------------------------------------------------------------------


def test_run_phase_matches_parser_across_seeds(small):
    rng = random.Random(0)
    for _ in range(100):
        stream = [rng.randrange(20) for _ in range(rng.randrange(5, 60))]
        out = parse_phase(small, 2, (), stream)
        results = {(r.consumed, r.status, r.demand) for r in
                   (run_phase(small, 2, (), (0, 1), stream, s) for s in (1, 2))}
        assert len(results) == 1
        consumed, status, demand = results.pop()
        if out.status is ParseStatus.PROPER_PREFIX:
            assert status is Status.TERMINATED and consumed == out.consumed and demand == out.tree.demand
        else:
            assert status is Status.AWAITING and consumed == len(stream)


def test_coverage_freeze_and_trace(s2):
    setting = Setting.uniform(12, (1, 2, 4), d=(1, 3, 2))
    rng = random.Random(4)
    for seed in range(30):
        stream = [rng.randrange(12) for _ in range(150)]
        c0 = (0, 1, 2)
        res = run_phase(setting, 2, {2}, c0, stream, seed)
        for rec in res.trace:
            assert rec.request in rec.config
            assert rec.config[2] == 2  # heavy server frozen
            assert rec.cost <= setting.weights.prefix_sum(2)
        assert sum((rec.cost for rec in res.trace), Fraction(0)) == res.cost


def test_switch_cost_accounting(s2):
    g = generate(GeneratorSpec(kind="chaser", seed=3, phases=1))
    limit = s2.weights.prefix_sum(2)
    for seed in range(50):
        strat = make_phase_strategy(s2, 2, frozenset(), (0, 1), seed)
        for r in g.requests:
            before = strat.cost
            if not strat.feed(r):
                break
            assert strat.cost - before <= limit
        assert strat.switch_cost <= strat.switches * limit


def test_exploit_children_start_from_initial(small):
    stream = [P, P, Q, Q, R]
    strat = make_phase_strategy(small, 2, frozenset(), (5, 6), 0)
    for r in stream:
        strat.feed(r)
    for p, child in strat.children.items():
        assert child.anchors == frozenset({p})
    assert strat.initial == (5, 6)


def test_follow_probability_bound(s2):
    """Child j in longest-first order is ever followed with probability <= 1/j."""
    g = generate(GeneratorSpec(kind="chaser", seed=0, phases=1))
    n = 10_000
    followed_rank = None
    hits = None
    for seed in range(n):
        strat = make_phase_strategy(s2, 2, frozenset(), (0, 1), seed)
        for r in g.requests:
            if not strat.feed(r):
                break
        assert strat.done
        if followed_rank is None:
            lengths = strat.child_lengths()
            # ties keep critical-set order; the bound holds for any tie order
            order = sorted(strat.critical, key=lambda p: -lengths[p])
            followed_rank = {p: j for j, p in enumerate(order, 1)}
            hits = [0] * (len(order) + 1)
        for p in set(strat.followed):
            hits[followed_rank[p]] += 1
    for j in range(1, len(hits)):
        prob = hits[j] / n
        se = math.sqrt(max(prob * (1 - prob), 1 / n) / n)
        assert prob <= 1 / j + 3 * se, (j, prob)


# -- serve_online -------------------------------------------------------------------------------


def test_serve_online_examples(s2):
    res = serve_online(s2, (0, 1), [])
    assert res.cost == 0 and res.phases == 0 and res.completed == 0

    g = generate(GeneratorSpec(kind="phase", seed=1, phases=1))
    res = serve_online(s2, (0, 1), g.requests, 5)
    assert res.completed == 1 and res.phases == 2
    assert res.phase_lengths[0] == g.boundaries[0][1] - g.boundaries[0][0]


def test_serve_online_k1():
    s1 = Setting.uniform(5, (3,))
    stream = [0, 0, 1, 1, 1, 0, 2, 2, 4]
    res = serve_online(s1, (0,), stream)
    moves = sum(1 for a, b in zip([0] + stream, stream) if a != b)
    assert res.cost == 3 * moves
    assert res.completed == 4


def test_serve_online_deterministic_and_covering(s2):
    g = generate(GeneratorSpec(kind="uniform", seed=9, length=300))
    a = serve_online(s2, (0, 1), g.requests, 42)
    b = serve_online(s2, (0, 1), g.requests, 42)
    assert a.cost == b.cost and [t.to_line() for t in a.trace] == [t.to_line() for t in b.trace]
    c = serve_online(s2, (0, 1), g.requests, 43)
    assert a.phase_lengths == c.phase_lengths
    assert all(t.request in t.config for t in a.trace)
    assert a.cost == sum(a.phase_costs, Fraction(0))


def test_trace_line_format(s2):
    res = run_1_phase(s2, (), (R, Q), [P, P])
    lines = [t.to_line() for t in res.trace]
    assert TRACE_HEADER.startswith("# index")
    assert lines[0].split("\t")[:4] == ["0", "0", "1", "1"]
    assert lines[1].split("\t")[2] == "-"
