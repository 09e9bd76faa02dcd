import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wkserver.adversary import GeneratorSpec, generate
from wkserver.core import Solution, solution_cost
from wkserver.errors import InstanceTooLargeError, NotActiveError, ValidationError
from wkserver.offline import (
    FIXED,
    FREE,
    contaminated_subphase_count,
    contamination_report,
    demand_ratio,
    demand_ratio_floor,
    hard_multiphase,
    is_contaminated,
    leaf_points,
    opt_cost,
    opt_cost_exhaustive,
    restrict_solution,
    verify_corpus,
    verify_phase_lower_bound,
)
from wkserver.phase_model import LeafPhase, parse_multiphase, parse_phase, split_phases
from wkserver.setting import Setting

A, B, C = 0, 1, 2


# -- OPT --------------------------------------------------------------------------------------


def test_opt_examples():
    s1 = Setting.uniform(5, (1,))
    assert opt_cost(s1, [A, B, A], (A,)).cost == 2
    s2 = Setting.uniform(5, (1, 2))
    assert opt_cost(s2, [C], (A, B)).cost == 1
    res = opt_cost(s2, [A, B, A, B, A, B])
    assert res.cost == 0 and res.mode == FREE
    assert opt_cost(s2, [], (A, B)).cost == 0


def test_opt_witness_is_valid():
    s3 = Setting.uniform(8, (1, 2, 4))
    rng = random.Random(0)
    for _ in range(50):
        rho = [rng.randrange(6) for _ in range(rng.randrange(1, 12))]
        for init in ((0, 1, 2), None):
            res = opt_cost(s3, rho, init)
            assert res.witness.covers(rho)
            assert solution_cost(res.witness, s3.weights) == res.cost
            if init is not None:
                assert res.witness.configs[0] == init and res.mode == FIXED


instance = st.tuples(
    st.sampled_from([(1, 2), (1, 3), (1, 2, 4)]),
    st.lists(st.integers(0, 4), max_size=7),
    st.booleans(),
)


@settings(max_examples=200)
@given(instance)
def test_dp_matches_exhaustive_oracle(case):
    w, rho, fixed = case
    setting = Setting.uniform(5, w)
    init = tuple(range(len(w))) if fixed else None
    assert opt_cost(setting, rho, init).cost == opt_cost_exhaustive(setting, rho, init)


@given(st.lists(st.integers(0, 4), max_size=9), st.integers(0, 9), st.integers(0, 9))
def test_opt_monotone(rho, i, j):
    setting = Setting.uniform(5, (1, 2))
    full = opt_cost(setting, rho, (0, 1)).cost
    free = opt_cost(setting, rho).cost
    assert full >= free
    i, j = sorted((min(i, len(rho)), min(j, len(rho))))
    assert free >= opt_cost(setting, rho[i:j]).cost


def test_opt_budget():
    s3 = Setting.uniform(40, (1, 2, 4))
    rho = list(range(40)) * 2
    with pytest.raises(InstanceTooLargeError):
        opt_cost(s3, rho, (0, 1, 2), budget=50)


# -- restriction and hard multiphase -----------------------------------------------------------


@pytest.fixture
def small():
    return Setting.uniform(20, (1, 2), d=(1, 3))


STREAM = [0, 0, 1, 1, 2, 3, 2, 3, 0, 1, 3, 3]


def _tree(setting, stream=STREAM):
    out = parse_phase(setting, 2, (), stream)
    return out.tree, stream[: out.consumed]


def _lazy(rho, c0):
    pos, configs = c0[0], [tuple(c0)]
    for r in rho:
        if r not in (pos,) + tuple(c0[1:]):
            pos = r
        configs.append((pos,) + tuple(c0[1:]))
    return Solution(configs)


def test_restrict_solution(small):
    tree, rho = _tree(small)
    sol = _lazy(rho, (5, 6))
    assert restrict_solution(sol, tree) == sol
    leaf = tree.explore.children[1]
    part = restrict_solution(sol, tree, ("E", 1))
    assert part.configs == sol.configs[leaf.start: leaf.end + 1]
    kids = [restrict_solution(sol, tree, ("E", i)) for i in range(2)]
    assert sum(solution_cost(k, small.weights) for k in kids) <= solution_cost(sol, small.weights)
    with pytest.raises(LookupError):
        restrict_solution(sol, tree, ("E", 7))
    with pytest.raises(ValidationError):
        restrict_solution(Solution([(0, 0)]), tree)


def test_hard_multiphase(small):
    tree, rho = _tree(small)
    assert tree.critical_set == (0, 1)
    assert hard_multiphase(tree, _lazy(rho, (5, 9))) == ("E",)
    assert hard_multiphase(tree, _lazy(rho, (5, 1))) == (("X", 1),)
    moving = Solution([(5, 9)] + [(r, 9 if i < 3 else 8) for i, r in enumerate(rho)])
    with pytest.raises(NotActiveError):
        hard_multiphase(tree, moving)
    with pytest.raises(ValidationError):
        hard_multiphase(tree.explore.children[0], _lazy(rho[:2], (5, 9)))


# -- contamination --------------------------------------------------------------------------


def test_level1_contamination():
    s2 = Setting.uniform(5, (1, 2))
    leaf = parse_phase(s2, 1, (), [2, 2, 3]).tree
    assert isinstance(leaf, LeafPhase) and leaf.point == 2
    parked = Solution([(2, 2), (2, 2), (2, 2)])
    elsewhere = Solution([(2, 4)] * 3)
    assert is_contaminated(leaf, parked, 2)
    assert not is_contaminated(leaf, elsewhere, 2)
    assert demand_ratio(leaf, parked, 2) == 1 == 1 / demand_ratio_floor(1, 2, s2.profile)


def _synthetic(ratio=8):
    """A (2,{})-phase for k=3, w=(1,8,16) whose explore part visits 0 once and then alternates 1, 2."""
    setting = Setting.uniform(20, (1, ratio, 2 * ratio))
    explore = [0] + [1 + (i % 2) for i in range(ratio - 1)]
    # exploit: cycling three fresh points gives every (1,{p})-multiphase a new
    # leaf at each request outside its anchor
    stream = explore + [3, 4, 5] * (2 * ratio)
    out = parse_phase(setting, 2, (), stream)
    assert out.consumed < len(stream)
    return setting, out.tree, stream[: out.consumed]


def test_one_of_eight_meets_half_threshold():
    setting, tree, rho = _synthetic(8)
    hard = tree.explore
    assert [c.point for c in hard.children][0] == 0
    # heavy server 3 sits on the point demanded only by the first subphase;
    # server 2 parks outside the critical set so the explore part is hard
    c0 = (1, 19, 0)
    assert 19 not in tree.critical_set
    sol = _lazy(rho, c0)
    part0 = sol.slice(0, hard.children[0].end)
    assert is_contaminated(hard.children[0], part0, 3)
    assert contaminated_subphase_count(tree, sol, 3) == 1
    assert is_contaminated(tree, sol, 3)
    assert demand_ratio(tree, sol, 3) >= demand_ratio_floor(2, 3, setting.profile)
    rep = contamination_report(tree, sol)
    assert rep.flags[((), 3)] and rep.hard[()] == ("E",)


def test_not_contaminated_when_heavy_server_is_idle():
    setting, tree, rho = _synthetic(8)
    sol = _lazy(rho, (1, 19, 18))
    assert not is_contaminated(tree, sol, 3)
    assert solution_cost(sol, setting.weights) >= setting.weights.w(2) / 4


def test_contaminated_counterexample_costs_zero():
    """Parking a heavier server on the only demanded point makes a phase free."""
    s2 = Setting.uniform(5, (1, 2))
    leaf = parse_phase(s2, 1, (), [3, 3, 3]).tree
    sol = Solution([(0, 3)] * 4)
    assert sol.covers([3, 3, 3])
    assert is_contaminated(leaf, sol, 2)
    assert solution_cost(sol, s2.weights) == 0 < s2.weights.w(1) / 2


def test_contamination_preconditions():
    setting, tree, rho = _synthetic(8)
    sol = _lazy(rho, (1, 19, 18))
    with pytest.raises(ValidationError):
        is_contaminated(tree, sol, 2)
    with pytest.raises(ValidationError):
        is_contaminated(tree, sol.slice(0, 3), 3)
    with pytest.raises(ValidationError):
        is_contaminated(tree.explore, sol, 3)
    moving = Solution([(1, 19, 18)] + [(r, r, 18) for r in rho])
    with pytest.raises(NotActiveError):
        is_contaminated(tree, moving, 3)


# -- lower bound ---------------------------------------------------------------------------


def test_phase_lower_bound_corpus():
    s2 = Setting.uniform(20, (1, 2))
    for seed in range(20):
        g = generate(GeneratorSpec(kind="chaser", seed=seed, phases=2))
        checks = verify_corpus(s2, g.requests)
        assert len(checks) == 2
        assert all(c.ok and c.margin >= 1 for c in checks)


def test_lower_bound_k1_is_vacuous():
    s1 = Setting.uniform(5, (1,))
    tree = split_phases(s1, [2, 2, 3]).phases[0]
    check = verify_phase_lower_bound(s1, tree, [2, 2, 3])
    assert not check.applicable and check.ok and check.opt == 0
    assert opt_cost(s1, [2, 2], (0,)).cost == 1


def test_lower_bound_rejects_anchored_tree():
    s2 = Setting.uniform(20, (1, 2))
    leaf = parse_phase(s2, 1, {5}, [1, 1, 2]).tree
    with pytest.raises(ValidationError):
        verify_phase_lower_bound(s2, leaf, [1, 1, 2])


def test_leaf_points():
    s2 = Setting.uniform(20, (1, 2))
    m = parse_multiphase(s2, 1, (), [0, 0, 3, 1]).tree
    assert leaf_points(m) == [0, 3]
