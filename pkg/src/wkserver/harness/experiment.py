"""Trials, aggregation and CSV reports.

Every trial derives two seeds from the root seed, one for the request
generator and one for the strategy, so trials are independent of each other
and of the order they run in. Costs stay exact rationals; CSV cells carry
them as ``num/den`` strings next to a rounded float for plotting.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ..adversary import GeneratorSpec, generate
from ..errors import ConstantTooLargeError
from ..offline import opt_cost, verify_corpus
from ..phase_model.constants import c_const
from ..setting import Setting
from ..strategy import derive_seed, serve_online
from .config import ExperimentConfig

SEED_MASK = (1 << 63) - 1

TRIAL_COLUMNS = [
    "trial", "gen_seed", "alg_seed", "requests", "phases", "alg", "opt", "ratio",
    "ratio_f", "alg_per_phase", "bound_rhs", "exceeds", "min_margin", "switches",
]


@dataclass(frozen=True)
class Bounds:
    """Exact constants of the competitive bound, or None when out of reach."""

    k: int
    c_k: Optional[Fraction]
    w_k: Fraction
    theoretical: bool

    @property
    def ratio(self) -> Optional[Fraction]:
        return None if self.c_k is None else 2 ** self.k * self.c_k

    @property
    def additive(self) -> Optional[Fraction]:
        return None if self.c_k is None else self.c_k * self.w_k

    def rhs(self, opt: Fraction) -> Optional[Fraction]:
        if self.c_k is None:
            return None
        return self.ratio * opt + self.additive


def bounds_for(setting: Setting) -> Bounds:
    try:
        c = c_const(setting.k, setting.profile)
    except ConstantTooLargeError:
        c = None
    return Bounds(setting.k, c, setting.weights.w(setting.k), setting.profile.theoretical)


@dataclass
class TrialResult:
    trial: int
    gen_seed: int
    alg_seed: int
    requests: int
    phases: int
    alg: Fraction
    opt: Fraction
    phase_costs: list
    switches: int
    rhs: Optional[Fraction] = None
    margins: list = field(default_factory=list)

    @property
    def ratio(self) -> Optional[Fraction]:
        return self.alg / self.opt if self.opt else None

    @property
    def alg_per_phase(self) -> Optional[Fraction]:
        if not self.phases:
            return None
        return sum(self.phase_costs, Fraction(0)) / self.phases

    @property
    def exceeds(self) -> bool:
        return self.rhs is not None and self.alg > self.rhs

    @property
    def min_margin(self) -> Optional[Fraction]:
        return min(self.margins) if self.margins else None


def trial_seeds(root: int, t: int) -> tuple[int, int]:
    return derive_seed(root, f"trial/{t}/gen") & SEED_MASK, derive_seed(root, f"trial/{t}/alg") & SEED_MASK


def experiment_setting(cfg: ExperimentConfig) -> Setting:
    return Setting.uniform(cfg.n_points, cfg.rounded_weights, cfg.profile.overrides)


def trial_requests(cfg: ExperimentConfig, gen_seed: int) -> list:
    spec = GeneratorSpec(
        kind=cfg.generator, n_points=cfg.n_points, weights=tuple(cfg.rounded_weights),
        d=cfg.profile.overrides, seed=gen_seed, length=cfg.length, phases=cfg.phases,
        alphabet=cfg.alphabet_points,
    )
    return generate(spec).requests


def run_trial(cfg: ExperimentConfig, t: int, setting: Optional[Setting] = None,
              bounds: Optional[Bounds] = None, requests: Optional[list] = None) -> TrialResult:
    setting = setting or experiment_setting(cfg)
    bounds = bounds or bounds_for(setting)
    gen_seed, alg_seed = trial_seeds(cfg.seed, t)
    if requests is None:
        requests = trial_requests(cfg, gen_seed)
    initial = cfg.initial_config
    online = serve_online(setting, initial, requests, alg_seed)
    opt = opt_cost(setting, requests, initial if cfg.opt_mode == "fixed" else None, cfg.budget)
    done = online.completed
    res = TrialResult(
        t, gen_seed, alg_seed, len(requests), done, online.cost, opt.cost,
        online.phase_costs[:done], sum(online.switches[:done]),
    )
    res.rhs = bounds.rhs(opt.cost)
    if cfg.verify:
        checks = verify_corpus(setting, requests, cfg.budget)
        res.margins = [c.margin for c in checks if c.applicable]
    return res


def run_experiment(cfg: ExperimentConfig) -> list:
    setting = experiment_setting(cfg)
    bounds = bounds_for(setting)
    return [run_trial(cfg, t, setting, bounds) for t in range(cfg.trials)]


def _mean_ci(xs: list, z: float = 1.96) -> tuple[float, float, float]:
    """Mean with a normal-approximation confidence interval (floats)."""
    n = len(xs)
    if n == 0:
        return (math.nan, math.nan, math.nan)
    mean = math.fsum(float(x) for x in xs) / n
    if n == 1:
        return (mean, mean, mean)
    var = math.fsum((float(x) - mean) ** 2 for x in xs) / (n - 1)
    half = z * math.sqrt(var / n)
    return (mean, mean - half, mean + half)


@dataclass
class ExperimentReport:
    trials: int
    total_phases: int
    mean_ratio: Optional[Fraction]
    max_ratio: Optional[Fraction]
    mean_alg_per_phase: Optional[Fraction]
    alg_per_phase_ci: tuple
    bound_ratio: Optional[Fraction]
    bound_additive: Optional[Fraction]
    max_excess_ratio: Optional[Fraction]
    exceeded: int
    theoretical: bool
    min_margin: Optional[Fraction]

    @property
    def exceed_rate(self) -> float:
        return self.exceeded / self.trials if self.trials else 0.0

    def violation(self, tolerance: float = 0.01) -> bool:
        """Bound exceeded in more than ``tolerance`` of trials (default profile only),
        or a phase whose optimum falls below the lower bound."""
        if self.min_margin is not None and self.min_margin < 1:
            return True
        return self.theoretical and self.bound_ratio is not None and self.exceed_rate > tolerance

    def rows(self) -> list:
        def cell(x):
            return "" if x is None else str(x)

        mean, lo, hi = self.alg_per_phase_ci
        return [
            ("trials", self.trials),
            ("completed_phases", self.total_phases),
            ("mean_ratio", cell(self.mean_ratio)),
            ("max_ratio", cell(self.max_ratio)),
            ("mean_alg_per_phase", cell(self.mean_alg_per_phase)),
            ("alg_per_phase_ci95_low", f"{lo:.6f}"),
            ("alg_per_phase_ci95_high", f"{hi:.6f}"),
            ("bound_ratio_2k_ck", cell(self.bound_ratio)),
            ("bound_additive_ck_wk", cell(self.bound_additive)),
            ("max_excess_ratio", cell(self.max_excess_ratio)),
            ("exceeded_trials", self.exceeded),
            ("theoretical_profile", "yes" if self.theoretical else "no"),
            ("min_lower_bound_margin", cell(self.min_margin)),
        ]


def aggregate(trials: list, bounds: Bounds) -> ExperimentReport:
    if not trials:
        raise ValueError("aggregate needs at least one trial")
    ratios = [t.ratio for t in trials if t.ratio is not None]
    phase_costs = [c for t in trials for c in t.phase_costs]
    n_phases = len(phase_costs)
    excess = None
    if bounds.additive is not None:
        xs = [(t.alg - bounds.additive) / t.opt for t in trials if t.opt]
        excess = max(xs) if xs else None
    margins = [t.min_margin for t in trials if t.min_margin is not None]
    return ExperimentReport(
        trials=len(trials),
        total_phases=n_phases,
        mean_ratio=sum(ratios, Fraction(0)) / len(ratios) if ratios else None,
        max_ratio=max(ratios) if ratios else None,
        mean_alg_per_phase=sum(phase_costs, Fraction(0)) / n_phases if n_phases else None,
        alg_per_phase_ci=_mean_ci(phase_costs),
        bound_ratio=bounds.ratio,
        bound_additive=bounds.additive,
        max_excess_ratio=excess,
        exceeded=sum(t.exceeds for t in trials),
        theoretical=bounds.theoretical,
        min_margin=min(margins) if margins else None,
    )


def _f(x) -> str:
    return "" if x is None else f"{float(x):.6f}"


def trials_csv(trials: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRIAL_COLUMNS)
    for t in trials:
        w.writerow([
            t.trial, t.gen_seed, t.alg_seed, t.requests, t.phases, t.alg, t.opt,
            "" if t.ratio is None else t.ratio, _f(t.ratio),
            "" if t.alg_per_phase is None else t.alg_per_phase,
            "" if t.rhs is None else t.rhs, int(t.exceeds),
            "" if t.min_margin is None else t.min_margin, t.switches,
        ])
    return buf.getvalue()


def summary_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    w.writerows(report.rows())
    return buf.getvalue()
