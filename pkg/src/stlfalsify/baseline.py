"""Importance-sampling baseline and shared evaluation metrics.

Both entry points roll disturbance traces through a scenario and summarize
failures the same way, so optimizer output and the baseline are directly
comparable:

* fail rate over all trials, with a binomial standard error;
* a likelihood statistic over the failing trajectories only, always scored
  under the scenario's true disturbance model (never the proposal).

With purely discrete disturbances a full-trajectory product shrinks with
the horizon, so the report carries the geometric mean of the per-step
probabilities.  With continuous channels densities are not probabilities
and the report carries trajectory log-likelihoods instead.  The report
names which definition it used.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .constraints import InfeasibleError, constraints_for
from .samplers import Categorical, DisturbanceModel, log_likelihood, sample_trace
from .sim import Scenario, SimResult
from .stl import Formula

__all__ = ["MetricReport", "importance_sample", "evaluate_expression"]

GEOMEAN_STEP_PROB = "geometric_mean_step_probability"
TRAJECTORY_LOGLIK = "trajectory_log_likelihood"


@dataclass(frozen=True)
class MetricReport:
    fail_rate: float
    fail_rate_se: float
    n_trials: int
    n_failures: int
    likelihood: float | None  # None when nothing failed
    likelihood_se: float | None
    likelihood_kind: str
    n_infeasible: int = 0
    infeasible: bool = False  # no trial could be constrained at all

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True)


def _likelihood_kind(model: DisturbanceModel) -> str:
    if all(isinstance(cm, Categorical) for cm in model.models.values()):
        return GEOMEAN_STEP_PROB
    return TRAJECTORY_LOGLIK


def _summarize(
    fails: list[SimResult],
    model: DisturbanceModel,
    n_trials: int,
    n_infeasible: int = 0,
) -> MetricReport:
    kind = _likelihood_kind(model)
    vals = []
    for res in fails:
        ll = log_likelihood(model, res.trace)
        if kind == GEOMEAN_STEP_PROB:
            vals.append(math.exp(ll / res.trace.m))
        else:
            vals.append(ll)
    rate = len(fails) / n_trials
    likelihood = likelihood_se = None
    if vals:
        likelihood = float(np.mean(vals))
        likelihood_se = float(np.std(vals, ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return MetricReport(
        fail_rate=rate,
        fail_rate_se=math.sqrt(rate * (1.0 - rate) / n_trials),
        n_trials=n_trials,
        n_failures=len(fails),
        likelihood=likelihood,
        likelihood_se=likelihood_se,
        likelihood_kind=kind,
        n_infeasible=n_infeasible,
        infeasible=n_infeasible >= n_trials,
    )


def importance_sample(
    scenario: Scenario,
    proposal: DisturbanceModel | None = None,
    trials: int = 500,
    rng: np.random.Generator | None = None,
) -> tuple[MetricReport, list[SimResult]]:
    """Sample unconstrained traces from the proposal, keep the failures.

    The fail rate is the raw fraction of proposal trials that failed; the
    likelihood statistic re-scores those failures under the true model.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if rng is None:
        rng = np.random.default_rng()
    proposal = proposal or scenario.proposal
    if set(proposal.models) != set(scenario.model.models):
        raise ValueError("proposal channels do not match the scenario model")
    fails = []
    for _ in range(trials):
        trace = sample_trace(proposal, scenario.horizon, scenario.dt, rng=rng)
        res = scenario.run(trace)
        if res.failure:
            fails.append(res)
    return _summarize(fails, scenario.model, trials), fails


def evaluate_expression(
    formula: Formula,
    scenario: Scenario,
    model: DisturbanceModel | None = None,
    trials: int = 500,
    rng: np.random.Generator | None = None,
) -> tuple[MetricReport, list[SimResult]]:
    """Re-evaluate a formula: fresh constraints per trial, one conforming
    trace each, scenario rollout, failure metrics.

    Trials whose constraint draw stays infeasible through the retry budget
    are counted but produce no trace; if every trial is infeasible the
    report says so and the fail rate is 0.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if rng is None:
        rng = np.random.default_rng()
    model = model or scenario.model
    fails = []
    n_infeasible = 0
    for _ in range(trials):
        try:
            cs = constraints_for(formula, scenario.channels, scenario.horizon, rng)
            trace = sample_trace(model, scenario.horizon, scenario.dt, cs, rng=rng)
        except InfeasibleError:
            n_infeasible += 1
            continue
        res = scenario.run(trace)
        if res.failure:
            fails.append(res)
    return _summarize(fails, model, trials, n_infeasible), fails
