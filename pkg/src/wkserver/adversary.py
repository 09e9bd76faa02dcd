"""Seeded request generators.

Generators are oblivious: they may look at the deterministic parse state of
the phase being built (which does not depend on any strategy's coins) but
never at a strategy's random choices or real server positions.

``gen_phase_completing`` steers an incremental (k, {})-phase parser. At each
step it picks an open level-1 phase and emits a request that opens it (a
point outside its anchors) or closes it (a point outside its anchors and its
critical point); every running parallel branch sees the request, so this
always advances the whole parse and a phase finishes after at most two
requests per level-1 phase. With probability ``linger`` it instead repeats a
request the target phase already accepts, which varies lengths.
"""

from __future__ import annotations

import copy
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import ValidationError
from .phase_model.parser import _Node, phase_parser
from .setting import Setting

KINDS = ("uniform", "phase", "chaser")

# steps allowed per requested phase before a generator gives up
STEP_CAP = 1_000_000


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str = "phase"
    n_points: int = 20
    weights: tuple = (1, 2)
    d: tuple = ()
    seed: int = 0
    length: int = 0
    phases: int = 1
    alphabet: Optional[tuple] = None
    linger: float = 0.25
    bias: float = 0.75
    terminate: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown generator kind {self.kind!r}; expected one of {KINDS}")
        if self.length < 0 or self.phases < 0:
            raise ValidationError("length and phase count must be non-negative")
        if not 0 <= self.linger < 1 or not 0 <= self.bias < 1:
            raise ValidationError("linger and bias must lie in [0, 1)")
        if self.alphabet is not None:
            bad = [p for p in self.alphabet if not 0 <= p < self.n_points]
            if bad or not self.alphabet:
                raise ValidationError(f"alphabet {self.alphabet} must be non-empty and inside the metric")

    def setting(self) -> Setting:
        return Setting.uniform(self.n_points, self.weights, self.d)


@dataclass
class Generated:
    requests: list
    boundaries: list = field(default_factory=list)

    @property
    def phase_count(self) -> int:
        return len(self.boundaries)


def gen_uniform(spec: GeneratorSpec) -> Generated:
    rng = random.Random(spec.seed)
    pts = spec.alphabet if spec.alphabet is not None else range(spec.n_points)
    pts = list(pts)
    return Generated([pts[rng.randrange(len(pts))] for _ in range(spec.length)])


def _pick(rng, options: list):
    return options[rng.randrange(len(options))]


class _Chooser:
    """Request choices for one open level-1 phase, honouring the alphabet."""

    def __init__(self, setting, alphabet, rng):
        self.points = list(setting.model.metric.points)
        self.alphabet = list(alphabet) if alphabet is not None else self.points
        self.outside = [p for p in self.points if p not in set(self.alphabet)]
        self.rng = rng

    def _avoiding(self, banned: set):
        opts = [p for p in self.alphabet if p not in banned]
        if opts:
            return _pick(self.rng, opts)
        # alphabet exhausted: a fresh point from outside it closes the phase
        fresh = [p for p in self.outside if p not in banned]
        if not fresh:
            raise ValidationError("metric too small to close a level-1 phase")
        return fresh[0]

    def progress(self, leaf):
        if leaf.point is None:
            return self._avoiding(set(leaf.anchors))
        return self._avoiding(set(leaf.anchors) | {leaf.point})

    def stay(self, leaf):
        """A request the leaf accepts without changing state (None if there is none)."""
        if leaf.point is None:
            opts = [p for p in leaf.anchors]
        else:
            opts = [p for p in leaf.anchors] + [leaf.point]
        opts = sorted(opts)
        return _pick(self.rng, opts) if opts else None


def _generate(spec: GeneratorSpec, choose) -> Generated:
    setting = spec.setting()
    k = setting.k
    rng = random.Random(spec.seed)
    chooser = _Chooser(setting, spec.alphabet, rng)
    out: list = []
    bounds: list = []
    parser = phase_parser(setting, k, frozenset(), 0)
    steps = 0
    while len(bounds) < spec.phases:
        r = choose(parser, chooser, rng)
        steps += 1
        if steps > STEP_CAP * max(1, spec.phases):
            raise RuntimeError("generator failed to complete a phase")
        i = len(out)
        out.append(r)
        if not parser.feed(r):
            bounds.append((parser.start, i))
            if len(bounds) == spec.phases and not spec.terminate:
                out.pop()
                break
            parser = phase_parser(setting, k, frozenset(), i)
            parser.feed(r)
    return Generated(out, bounds)


def _progress_choice(spec):
    def choose(parser, chooser, rng):
        leaves = list(parser.open_leaves())
        leaf = leaves[0]
        if spec.linger and rng.random() < spec.linger:
            r = chooser.stay(leaf)
            if r is not None:
                return r
        return chooser.progress(leaf)

    return choose


def gen_phase_completing(spec: GeneratorSpec) -> Generated:
    """Exactly ``spec.phases`` complete (k, {})-phases with their spans.

    With ``terminate`` the request that ends the last phase is appended, so
    the output splits into exactly that many complete phases; without it the
    last phase is left open (the whole tail still parses as a phase).
    """
    return _generate(spec, _progress_choice(spec))


def _running_nodes(node):
    """Exploiting phase parsers on the path(s) to open leaves, outermost first."""
    if isinstance(node, _Node) and not node.done:
        if node.exploring:
            yield from _running_nodes(node.explore.current)
        else:
            yield node
            for p in node.critical:
                c = node.children[p]
                if not c.done:
                    yield from _running_nodes(c.current)
    elif hasattr(node, "current") and not node.done:
        yield from _running_nodes(node.current)


def _kills(node, r, setting) -> int:
    """How many running exploit branches of ``node`` the request ``r`` would end."""
    n = 0
    for p in node.critical:
        child = node.children[p]
        if child.done:
            continue
        trial = copy.deepcopy(child, {id(setting): setting})
        if not trial.feed(r):
            n += 1
    return n


def gen_critical_chaser(spec: GeneratorSpec) -> Generated:
    """Like :func:`gen_phase_completing`, but staggers the exploit branches.

    During exploration requests concentrate on a small hot set so a few
    points dominate the demand. During exploitation, with probability
    ``bias``, the request ends as few running branches of the innermost
    exploiting phase as possible (but at least one), so branches finish in
    small groups and a strategy following a random branch has to switch
    often. Branches whose anchor was never requested sit in identical parse
    states, so they cannot be separated one at a time.
    """
    progress = _progress_choice(spec)
    setting = spec.setting()
    pool = list(spec.alphabet) if spec.alphabet is not None else list(setting.model.metric.points)

    def choose(parser, chooser, rng):
        if rng.random() < spec.bias:
            nodes = list(_running_nodes(parser))
            if nodes:
                node = nodes[-1]
                kills = {r: _kills(node, r, setting) for r in pool}
                fewest = min((n for n in kills.values() if n), default=0)
                if fewest:
                    return _pick(rng, [r for r in pool if kills[r] == fewest])
            else:
                leaf = next(parser.open_leaves())
                hot = [p for p in pool[: max(2, len(pool) // 4)] if p not in leaf.anchors]
                if hot:
                    return _pick(rng, hot)
        return progress(parser, chooser, rng)

    return _generate(spec, choose)


def generate(spec: GeneratorSpec) -> Generated:
    if spec.kind == "uniform":
        return gen_uniform(spec)
    if spec.kind == "phase":
        return gen_phase_completing(spec)
    return gen_critical_chaser(spec)


def phase_corpus(spec: GeneratorSpec, count: int) -> list:
    """``count`` independent single-phase instances with seeds ``spec.seed + i``."""
    out = []
    for i in range(count):
        g = generate(GeneratorSpec(**{**spec.__dict__, "seed": spec.seed + i, "phases": 1}))
        out.append(g)
    return out
