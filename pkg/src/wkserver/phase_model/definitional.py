"""Brute-force enumeration of phase trees, read straight off the definition.

Nothing here streams or commits greedily: every split of a string into an
explore part and an exploit part, and every composition into multiphase
children, is tried and kept when the definition's maximality conditions
hold. It is exponential and only meant for short strings, where it serves
as an oracle for the incremental parser and as the witness counter behind
the uniqueness and prefix-extension checks.
"""

from __future__ import annotations

from itertools import product

from ..core import sum_demands
from .trees import LeafPhase, Multiphase, NodePhase, shift


class DefinitionalGrammar:
    def __init__(self, setting):
        self.setting = setting
        self.model = setting.model
        self._phase: dict = {}
        self._multi: dict = {}
        self._lpp: dict = {}
        self._lmp: dict = {}

    # -- witnesses -----------------------------------------------------------

    def phase_trees(self, level: int, anchors: frozenset, rho: tuple) -> tuple:
        """All (level, anchors)-phases whose request sequence is exactly ``rho``."""
        key = (level, anchors, rho)
        hit = self._phase.get(key)
        if hit is None:
            hit = self._phase[key] = tuple(self._phase_trees(level, anchors, rho))
        return hit

    def multiphase_trees(self, level: int, anchors: frozenset, rho: tuple) -> tuple:
        key = (level, anchors, rho)
        hit = self._multi.get(key)
        if hit is None:
            hit = self._multi[key] = tuple(self._multiphase_trees(level, anchors, rho))
        return hit

    def is_phase(self, level, anchors, rho) -> bool:
        return bool(self.phase_trees(level, anchors, tuple(rho)))

    def is_multiphase(self, level, anchors, rho) -> bool:
        return bool(self.multiphase_trees(level, anchors, tuple(rho)))

    def longest_phase_prefix(self, level: int, anchors: frozenset, rho: tuple):
        """Length of the longest prefix of ``rho`` that is a phase, or None."""
        key = (level, anchors, rho)
        if key not in self._lpp:
            self._lpp[key] = next(
                (n for n in range(len(rho), 0, -1) if self.phase_trees(level, anchors, rho[:n])),
                None,
            )
        return self._lpp[key]

    def longest_multiphase_prefix(self, level: int, anchors: frozenset, rho: tuple):
        key = (level, anchors, rho)
        if key not in self._lmp:
            self._lmp[key] = next(
                (n for n in range(len(rho), 0, -1)
                 if self.multiphase_trees(level, anchors, rho[:n])),
                None,
            )
        return self._lmp[key]

    # -- the definition --------------------------------------------------------

    def _phase_trees(self, level, anchors, rho):
        if not rho:
            return
        if level == 1:
            yield from self._leaf(anchors, rho)
            return
        for i in range(1, len(rho)):
            # explore is the longest multiphase prefix of the whole string
            if self.longest_multiphase_prefix(level - 1, anchors, rho) != i:
                continue
            head, tail = rho[:i], rho[i:]
            for explore in self.multiphase_trees(level - 1, anchors, head):
                crit = explore.critical_set
                spans = {}
                for p in crit:
                    n = self.longest_multiphase_prefix(level - 1, anchors | {p}, tail)
                    if n is None:
                        break
                    spans[p] = n
                else:
                    # the prefix chain's maximum must be the whole exploit string
                    if max(spans.values()) != len(tail):
                        continue
                    options = [
                        [shift(m, i) for m in self.multiphase_trees(level - 1, anchors | {p}, tail[: spans[p]])]
                        for p in crit
                    ]
                    for combo in product(*options):
                        exploit = tuple(zip(crit, combo))
                        demand = explore.demand + sum_demands(m.demand for m in combo)
                        yield NodePhase(level, anchors, 0, len(rho), explore, crit, exploit, demand)

    def _leaf(self, anchors, rho):
        opening = next((r for r in rho if not self.model.satisfied(anchors, r)), None)
        if opening is None:
            return
        p = self.model.leaf_point(opening)
        if all(self.model.satisfied(anchors | {p}, r) for r in rho):
            yield LeafPhase(anchors, 0, len(rho), p, opening, self.model.leaf_demand(opening))

    def _multiphase_trees(self, level, anchors, rho):
        count = self.setting.weights.ratio(level)
        for parts in _compositions(len(rho), count):
            pieces, offset, ok = [], 0, True
            for n in parts:
                rest = rho[offset:]
                # each child is the longest phase prefix of what remains
                if self.longest_phase_prefix(level, anchors, rest) != n:
                    ok = False
                    break
                pieces.append((offset, rho[offset : offset + n]))
                offset += n
            if not ok:
                continue
            options = [[shift(t, off) for t in self.phase_trees(level, anchors, s)] for off, s in pieces]
            for children in product(*options):
                demand = sum_demands(c.demand for c in children)
                crit = self.model.critical_set(
                    demand, level + 1, self.setting.critical_size(level + 1)
                )
                yield Multiphase(level, anchors, 0, len(rho), tuple(children), demand, crit)


def _compositions(total: int, parts: int):
    """Ordered tuples of ``parts`` positive integers summing to ``total``."""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest
