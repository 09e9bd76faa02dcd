"""Offline optimum and the lower-bound verification stack.

``opt_cost`` is a dynamic program over *lazy* solutions: a server moves only
to serve an uncovered request, and then it moves onto that request. Every
solution can be made lazy without raising its cost (postpone each move until
the server is needed and send it straight to the request it serves), so the
minimum over lazy solutions is the true optimum. The reachable states are
configurations over the initial points plus the requested points.

For the free-initial mode each server starts *unplaced* (``None``): its first
move costs nothing and fixes where it "was" all along. ``opt_cost_exhaustive``
is the slow reference: all configurations over the same candidate points, all
transitions, no laziness assumption.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .core import Solution, is_l_active
from .errors import InstanceTooLargeError, NotActiveError, ValidationError
from .phase_model.constants import F_const
from .phase_model.parser import split_phases
from .phase_model.trees import LeafPhase, Multiphase, NodePhase, locate

DEFAULT_BUDGET = 200_000

FIXED = "FixedInitial"
FREE = "FreeInitial"


@dataclass(frozen=True)
class OptResult:
    cost: Fraction
    witness: Solution
    mode: str
    initial: Optional[tuple] = None

    def __str__(self):
        return f"{self.mode} OPT={self.cost}"


def _step_cost(before, after, w) -> Fraction:
    return sum(
        (w[i] for i, (a, b) in enumerate(zip(before, after)) if a != b and a is not None),
        Fraction(0),
    )


def _covers(model, config, r) -> bool:
    return model.covers(config, r)


def _resolve_free(configs: list, filler) -> list:
    """Replace each unplaced slot with the server's first real position."""
    k = len(configs[0])
    out = [list(c) for c in configs]
    for i in range(k):
        first = next((c[i] for c in configs if c[i] is not None), filler[i])
        for c in out:
            if c[i] is None:
                c[i] = first
            else:
                break
    return [tuple(c) for c in out]


def opt_cost(setting, requests: Sequence, initial=None, budget: int = DEFAULT_BUDGET) -> OptResult:
    """Exact offline optimum; ``initial=None`` selects the free-initial mode."""
    model, w = setting.model, setting.weights
    requests = [model.check_request(r) for r in requests]
    k = setting.k
    if initial is None:
        mode, start = FREE, (None,) * k
    else:
        mode, start = FIXED, model.check_config(initial)

    layer = {start: Fraction(0)}
    back = []
    for step, r in enumerate(requests):
        nxt: dict = {}
        parent: dict = {}
        for state, cost in layer.items():
            if _covers(model, state, r):
                moves = ((state, cost),)
            else:
                moves = (
                    (new, cost + _step_cost(state, new, w))
                    for _, new in model.serving_moves(state, r)
                )
            for new, c in moves:
                old = nxt.get(new)
                if old is None or c < old:
                    nxt[new] = c
                    parent[new] = state
        if len(nxt) > budget:
            raise InstanceTooLargeError(
                f"OPT state space reached {len(nxt)} configurations at request {step}, "
                f"budget is {budget}",
                budget,
            )
        back.append(parent)
        layer = nxt

    best = min(layer.items(), key=lambda kv: (kv[1], _sort_key(kv[0])))
    configs = [best[0]]
    for parent in reversed(back):
        configs.append(parent[configs[-1]])
    configs.reverse()
    if mode == FREE:
        filler = _free_filler(model, requests, k)
        configs = _resolve_free(configs, filler)
    return OptResult(best[1], Solution(configs), mode, None if initial is None else start)


def _sort_key(config):
    return tuple((x is None, x) for x in config)


def _free_filler(model, requests, k):
    cands = model.candidates(requests)
    return tuple(c[0] if c else model.default_point(i + 1) for i, c in enumerate(cands))


def opt_cost_exhaustive(setting, requests: Sequence, initial=None, budget: int = 2_000) -> Fraction:
    """Reference optimum over every configuration sequence on the candidate points."""
    model, w = setting.model, setting.weights
    requests = [model.check_request(r) for r in requests]
    if initial is not None:
        initial = model.check_config(initial)
    cands = model.candidates(requests, initial)
    if any(not c for c in cands):
        cands = [c or [model.default_point(i + 1)] for i, c in enumerate(cands)]
    states = list(itertools.product(*cands))
    if len(states) > budget:
        raise InstanceTooLargeError(f"{len(states)} configurations exceed the oracle budget", budget)
    if initial is None:
        layer = {s: Fraction(0) for s in states}
    else:
        layer = {initial: Fraction(0)}
    for r in requests:
        covering = [s for s in states if _covers(model, s, r)]
        layer = {
            s: min(c + _step_cost(p, s, w) for p, c in layer.items())
            for s in covering
        }
    return min(layer.values()) if layer else Fraction(0)


# -- restriction, hard multiphase, contamination --------------------------------


def restrict_solution(sol: Solution, tree, locator: tuple = ()) -> Solution:
    """``C[i, j]`` for the span of the node reached by ``locator``."""
    node = locate(tree, locator)
    base = tree.start
    if sol.steps != tree.end - tree.start:
        raise ValidationError(
            f"solution has {sol.steps} steps but the tree spans {tree.end - tree.start} requests"
        )
    return sol.slice(node.start - base, node.end - base)


def _sub(sol: Solution, tree, node) -> Solution:
    return sol.slice(node.start - tree.start, node.end - tree.start)


def _at(model, config, level):
    if model is None:
        return config[level - 1]
    return model.position(config, level)


def hard_multiphase(tree, sol: Solution, model=None) -> tuple:
    """Locator of the hard multiphase: ``("E",)`` or ``(("X", p),)``.

    ``model`` maps configuration slots to points; omit it for plain
    weighted k-server, where the slot already holds the point.
    """
    if not isinstance(tree, NodePhase):
        raise ValidationError("hard multiphases exist only for phases of level >= 2")
    level = tree.level
    if not is_l_active(sol, level - 1):
        raise NotActiveError(f"solution is not {level - 1}-active")
    parked = _at(model, sol.configs[0], level)
    if parked in tree.critical_set:
        return (("X", parked),)
    return ("E",)


def _threshold(level: int, upper: int, ratio: int) -> Fraction:
    return Fraction(ratio, 2 ** (upper - level + 3))


def _contaminated(tree, sol: Solution, upper: int, model) -> bool:
    level = tree.level
    if level == 1:
        return tree.demand[_at(model, sol.configs[0], upper)] == 1
    hard = locate(tree, hard_multiphase(tree, sol, model))
    count = contaminated_subphase_count(tree, sol, upper, hard=hard, model=model)
    return count >= _threshold(level, upper, len(hard.children))


def contaminated_subphase_count(tree, sol: Solution, upper: int, hard=None, model=None) -> int:
    """Subphases of the hard multiphase whose restriction is (l-2)-active and ``upper``-contaminated."""
    if hard is None:
        hard = locate(tree, hard_multiphase(tree, sol, model))
    count = 0
    for child in hard.children:
        part = _sub(sol, tree, child)
        if is_l_active(part, tree.level - 2) and _contaminated(child, part, upper, model):
            count += 1
    return count


def is_contaminated(tree, sol: Solution, upper: int, model=None) -> bool:
    """``upper``-contamination of ``sol`` for the phase ``tree``.

    ``sol`` must be (l-1)-active and ``upper`` must exceed the phase level.
    The threshold ``2^-(upper-l+3) * w_l/w_{l-1}`` is compared as an exact
    rational, so a count of 1 meets a threshold of 1/2.
    """
    if isinstance(tree, Multiphase):
        raise ValidationError("contamination is defined for phases, not multiphases")
    k = sol.k
    if not tree.level < upper <= k:
        raise ValidationError(f"upper level must be in {tree.level + 1}..{k}, got {upper}")
    if sol.steps != tree.end - tree.start:
        raise ValidationError("solution length does not match the phase")
    if not is_l_active(sol, tree.level - 1):
        raise NotActiveError(f"solution is not {tree.level - 1}-active")
    return _contaminated(tree, sol, upper, model)


@dataclass
class ContaminationReport:
    """Per-node contamination flags keyed by ``(node locator, upper level)``.

    Nodes whose restriction is not active enough are listed in ``inactive``.
    """

    flags: dict = field(default_factory=dict)
    hard: dict = field(default_factory=dict)
    inactive: list = field(default_factory=list)

    def contaminated(self, locator=()) -> bool:
        return any(v for (loc, _), v in self.flags.items() if loc == tuple(locator))


def contamination_report(tree, sol: Solution, model=None) -> ContaminationReport:
    report = ContaminationReport()
    k = sol.k

    def visit(node, part, locator):
        if not is_l_active(part, node.level - 1):
            report.inactive.append(locator)
            return
        for upper in range(node.level + 1, k + 1):
            report.flags[(locator, upper)] = _contaminated(node, part, upper, model)
        if isinstance(node, NodePhase):
            hard = hard_multiphase(node, part, model)
            report.hard[locator] = hard
            multi = locate(node, hard)
            for i, child in enumerate(multi.children):
                visit(child, _sub(part, node, child), locator + hard + (i,))

    visit(tree, sol, ())
    return report


def demand_ratio(tree, sol: Solution, upper: int, model=None) -> Fraction:
    """``v[C_0[upper]] / |v|`` for the phase's demand vector."""
    return Fraction(tree.demand[_at(model, sol.configs[0], upper)], tree.demand.norm)


def demand_ratio_floor(level: int, upper: int, profile) -> Fraction:
    """``1 / (d_l * F_{l,upper})``: the least demand share of a contaminating point."""
    return Fraction(1, profile.d(level) * F_const(level, upper, profile))


@dataclass(frozen=True)
class LowerBoundCheck:
    """``ok`` is vacuously true when ``applicable`` is false (k = 1: a single
    letter run costs nothing from a free start, so only the margin is reported)."""

    ok: bool
    opt: Fraction
    bound: Fraction
    margin: Fraction
    witness: Optional[Solution] = None
    applicable: bool = True


def verify_phase_lower_bound(setting, tree, requests: Sequence, budget: int = DEFAULT_BUDGET) -> LowerBoundCheck:
    """Free-initial OPT of one complete (k, {})-phase against ``w_k / 2^k``."""
    if tree.level != setting.k or tree.anchors:
        raise ValidationError("the bound applies to (k, {})-phases")
    rho = list(requests)[tree.start : tree.end]
    res = opt_cost(setting, rho, None, budget)
    bound = setting.weights.w(setting.k) / 2 ** setting.k
    applicable = setting.k >= 2
    ok = res.cost >= bound or not applicable
    return LowerBoundCheck(ok, res.cost, bound, res.cost / bound, res.witness, applicable)


def verify_corpus(setting, requests: Sequence, budget: int = DEFAULT_BUDGET) -> list:
    """Lower-bound checks for every complete (k, {})-phase of ``requests``."""
    split = split_phases(setting, requests)
    return [verify_phase_lower_bound(setting, t, requests, budget) for t in split.phases]


def leaf_points(tree) -> list:
    """The critical points of the level-1 phases of a tree, left to right."""
    if isinstance(tree, LeafPhase):
        return [tree.point]
    if isinstance(tree, Multiphase):
        return [p for c in tree.children for p in leaf_points(c)]
    return leaf_points(tree.explore) + [p for _, m in tree.exploit for p in leaf_points(m)]
