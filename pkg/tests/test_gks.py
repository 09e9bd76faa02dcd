import itertools
import math
import random
import statistics

import pytest

from wkserver.adversary import GeneratorSpec, generate
from wkserver.core import DemandVector
from wkserver.errors import ValidationError
from wkserver.gks import (
    format_tuple_requests,
    gks_opt_cost,
    gks_parse_multiphase,
    gks_parse_phase,
    gks_run_phase,
    gks_serve_online,
    gks_setting,
    gks_split_phases,
    lift_requests,
    parse_tuple,
    parse_tuple_requests,
    projected_norms,
)
from wkserver.offline import opt_cost_exhaustive, verify_phase_lower_bound
from wkserver.phase_model import DefinitionalGrammar, Status, c_const, iter_nodes
from wkserver.setting import Setting
from wkserver.strategy import serve_online


@pytest.fixture
def g2():
    return gks_setting((6, 6), (1, 2), d=(1, 3))


def test_tuple_text():
    assert parse_tuple("(1,2)") == (1, 2)
    assert parse_tuple_requests("(1,2) (0,3)") == [(1, 2), (0, 3)]
    assert format_tuple_requests([(1, 2), (0, 3)]) == "(1,2) (0,3)"
    with pytest.raises(ValidationError):
        parse_tuple("1,2")


def test_level1_phase_with_anchor(g2):
    b = (2, 4)
    # (0,4) is satisfied by H; (0,1) opens the phase with p = (1,0)
    out = gks_parse_phase(g2, 1, {b}, [(0, 4), (0, 1), (0, 4), (3, 1)])
    assert out.status is Status.PROPER_PREFIX and out.consumed == 3
    leaf = out.tree
    assert leaf.point == (1, 0)
    assert leaf.demand == DemandVector({(1, 0): 1, (2, 1): 1})
    assert projected_norms(leaf.demand, 2) == [1, 1]


def test_level1_requires_unsatisfied_request(g2):
    assert gks_parse_phase(g2, 1, {(2, 4)}, [(0, 4), (3, 4)]).status is Status.NO_PHASE_PREFIX


def test_anchor_validation(g2):
    with pytest.raises(ValidationError):
        gks_parse_phase(g2, 1, {(1, 0)}, [(0, 0)])
    with pytest.raises(ValidationError):
        gks_parse_phase(g2, 1, (), [(0, 9)])


def test_exhaustive_uniqueness_and_prefix_extension():
    setting = gks_setting((2, 2), (1, 2), d=(1, 2))
    oracle = DefinitionalGrammar(setting)
    alphabet = list(itertools.product(range(2), range(2)))
    cases = [(2, frozenset()), (1, frozenset()), (1, frozenset({(2, 0)}))]
    for level, anchors in cases:
        for rho in itertools.product(alphabet, repeat=6):
            lengths = []
            for n in range(1, 7):
                trees = oracle.phase_trees(level, anchors, rho[:n])
                assert len(trees) <= 1
                if trees:
                    lengths.append(n)
                    for node in iter_nodes(trees[0]):
                        assert len(set(projected_norms(node.demand, 2))) == 1
            if lengths:
                assert lengths == list(range(lengths[0], lengths[-1] + 1))
            out = gks_parse_phase(setting, level, anchors, rho)
            assert (out.consumed if out.tree else None) == (lengths[-1] if lengths else None)


def test_multiphase_norms(g2):
    rng = random.Random(0)
    for _ in range(50):
        rho = [(rng.randrange(6), rng.randrange(6)) for _ in range(30)]
        out = gks_parse_multiphase(g2, 1, (), rho)
        if out.tree is not None:
            assert projected_norms(out.tree.demand, 2) == [2, 2]


def test_opt_examples():
    s = gks_setting((3, 3), (1, 2))
    assert gks_opt_cost(s, [(0, 2)], (0, 1)).cost == 0
    assert gks_opt_cost(s, [(2, 2)], (0, 1)).cost == 1
    # server 2 to 2 (cost 2), then server 1 to 1 (cost 1) covers all three
    rho = [(2, 2), (1, 0), (2, 2)]
    assert gks_opt_cost(s, rho, (0, 1), budget=100).cost == 3 == opt_cost_exhaustive(s, rho, (0, 1))


def test_lift_matches_direct_run():
    direct = Setting.uniform(20, (1, 2))
    gks = gks_setting((20, 20), (1, 2))
    for seed in range(10):
        reqs = generate(GeneratorSpec(kind="chaser", seed=seed, phases=2)).requests
        a = serve_online(direct, (0, 1), reqs, seed)
        b = gks_serve_online(gks, (0, 1), lift_requests(reqs, 2), seed)
        assert a.phase_lengths == b.phase_lengths and a.phase_costs == b.phase_costs
        assert [t.cost for t in a.trace] == [t.cost for t in b.trace]
        assert gks_split_phases(gks, lift_requests(reqs, 2)).boundaries == \
            [(t.start, t.end) for t in gks_split_phases(direct, reqs).phases]


def test_heavy_space_frozen():
    s = gks_setting((8, 8, 8), (1, 2, 4), d=(1, 3, 2))
    rng = random.Random(5)
    for seed in range(20):
        rho = [tuple(rng.randrange(8) for _ in range(3)) for _ in range(120)]
        res = gks_run_phase(s, 2, {(3, 7)}, (0, 0, 7), rho, seed)
        for rec in res.trace:
            assert rec.config[2] == 7
            assert any(c == x for c, x in zip(rec.config, rec.request))


def test_mean_phase_cost_within_bound():
    s = gks_setting((8, 8), (1, 2), d=(1, 3))
    bound = float(c_const(2, s.profile) * 2)
    rng = random.Random(9)
    costs = []
    for seed in range(1000):
        rho = [(rng.randrange(8), rng.randrange(8)) for _ in range(300)]
        res = gks_run_phase(s, 2, (), (0, 0), rho, seed)
        assert res.terminated
        costs.append(float(res.cost))
    mean = statistics.fmean(costs)
    se = statistics.stdev(costs) / math.sqrt(len(costs))
    assert mean + 3 * se <= bound


def test_generated_phase_lower_bound():
    direct = GeneratorSpec(kind="phase", n_points=6, d=(1, 3), seed=0, phases=1)
    gks = gks_setting((6, 6), (1, 2), d=(1, 3))
    for seed in range(10):
        reqs = generate(GeneratorSpec(**{**direct.__dict__, "seed": seed})).requests
        lifted = lift_requests(reqs, 2)
        tree = gks_split_phases(gks, lifted).phases[0]
        assert verify_phase_lower_bound(gks, tree, lifted).ok
