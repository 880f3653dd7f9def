"""Genetic programming over formulas, scored by constrained rollouts.

Each candidate formula is scored by sampling disturbance traces that
satisfy it, rolling them through the scenario, and averaging
-likelihood * failure over the batch, so low cost means the formula pins
down likely failures.  With discrete disturbance models the likelihood is
an honest probability and the average is used directly.  With continuous
models raw densities span hundreds of orders of magnitude, so individuals
are ranked lexicographically: failure fraction first, then the mean
log-likelihood of the failing rollouts.

Selection is by tournament.  Each new population slot copies, crosses, or
mutates tournament winners with the configured probabilities; there is no
elitism, and the returned best individual is tracked globally across all
evaluations.  Costs are cached per canonical formula text for the duration
of one run, since reproduction keeps re-submitting identical formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constraints import InfeasibleError, constraints_for
from .grammar import GrammarSpec, crossover, mutate, sample_expression
from .samplers import Categorical, log_likelihood, sample_traces
from .stl import Formula, canonical_text

__all__ = ["GpConfig", "Individual", "evaluate_cost", "run"]


@dataclass(frozen=True)
class GpConfig:
    population: int = 1000
    generations: int = 30
    p_reproduce: float = 0.3
    p_crossover: float = 0.3
    p_mutate: float = 0.4
    tournament_size: int = 7
    samples_per_eval: int = 10
    max_depth: int = 10
    seed: int = 0

    def __post_init__(self):
        if abs(self.p_reproduce + self.p_crossover + self.p_mutate - 1.0) > 1e-9:
            raise ValueError("operator probabilities must sum to 1")
        if min(self.population, self.generations, self.tournament_size,
               self.samples_per_eval, self.max_depth) < 1:
            raise ValueError("counts must be at least 1")


@dataclass(frozen=True)
class Individual:
    formula: Formula
    cost: float
    feasible: bool
    fail_count: int
    mean_fail_loglik: float  # -inf when no rollout failed
    n_evals: int

    def sort_key(self):
        """Lower is better; ties on cost break toward likelier failures."""
        return (self.cost, -self.mean_fail_loglik)


_WORST = dict(cost=0.0, feasible=False, fail_count=0, mean_fail_loglik=-math.inf, n_evals=0)


def evaluate_cost(
    formula: Formula,
    scenario,
    model=None,
    N: int = 10,
    rng: np.random.Generator | None = None,
) -> Individual:
    """Score one formula with N constrained rollouts.

    One constraint draw serves the whole batch.  A formula that stays
    infeasible through the retry budget gets the worst cost (0: it never
    demonstrates a failure).
    """
    if rng is None:
        rng = np.random.default_rng()
    model = model or scenario.model
    m, dt = scenario.horizon, scenario.dt
    try:
        cs = constraints_for(formula, scenario.channels, m, rng)
        traces = sample_traces(model, m, dt, cs, rng=rng, size=N)
    except InfeasibleError:
        return Individual(formula=formula, **_WORST)

    discrete = all(isinstance(cm, Categorical) for cm in model.models.values())
    fails = 0
    fail_lls = []
    mean_p_fail = 0.0
    for trace in traces:
        if scenario.run(trace).failure:
            fails += 1
            ll = log_likelihood(model, trace)
            fail_lls.append(ll)
            if discrete:
                mean_p_fail += math.exp(ll)
    mean_p_fail /= N
    if discrete:
        cost = -mean_p_fail
    else:
        cost = -fails / N
    return Individual(
        formula=formula,
        cost=cost,
        feasible=True,
        fail_count=fails,
        mean_fail_loglik=(sum(fail_lls) / len(fail_lls)) if fail_lls else -math.inf,
        n_evals=N,
    )


def _tournament(pop: list[Individual], k: int, rng) -> Individual:
    idx = rng.integers(0, len(pop), size=k)
    best = pop[idx[0]]
    for i in idx[1:]:
        if pop[i].sort_key() < best.sort_key():
            best = pop[i]
    return best


def run(
    scenario,
    config: GpConfig,
    grammar: GrammarSpec | None = None,
    model=None,
    progress=None,
) -> tuple[Individual, list[dict]]:
    """Evolve for ``config.generations`` rounds, the first being the random
    initial population.  Returns the best individual ever evaluated and one
    history record per generation; ``progress`` (if given) receives each
    record as it is produced.
    """
    grammar = grammar or scenario.grammar
    model = model or scenario.model
    rng = np.random.default_rng(config.seed)
    cache: dict[str, Individual] = {}

    def evaluate(formula: Formula) -> Individual:
        key = canonical_text(formula)
        hit = cache.get(key)
        if hit is None:
            hit = evaluate_cost(formula, scenario, model, config.samples_per_eval, rng)
            cache[key] = hit
        return hit

    population = [
        evaluate(sample_expression(grammar, rng, max_depth=config.max_depth))
        for _ in range(config.population)
    ]
    best = min(population, key=Individual.sort_key)
    history: list[dict] = []

    def record(gen: int, pop: list[Individual]):
        nonlocal best
        gen_best = min(pop, key=Individual.sort_key)
        if gen_best.sort_key() < best.sort_key():
            best = gen_best
        row = {
            "generation": gen,
            "best_cost": gen_best.cost,
            "mean_cost": sum(ind.cost for ind in pop) / len(pop),
            "best_formula": canonical_text(gen_best.formula),
            "best_so_far_cost": best.cost,
            "best_so_far_formula": canonical_text(best.formula),
        }
        history.append(row)
        if progress is not None:
            progress(row)

    record(0, population)
    for gen in range(1, config.generations):
        offspring = []
        for _ in range(config.population):
            r = rng.random()
            if r < config.p_reproduce:
                child = _tournament(population, config.tournament_size, rng).formula
            elif r < config.p_reproduce + config.p_crossover:
                recipient = _tournament(population, config.tournament_size, rng).formula
                donor = _tournament(population, config.tournament_size, rng).formula
                child = crossover(donor, recipient, grammar, rng, max_depth=config.max_depth)
            else:
                parent = _tournament(population, config.tournament_size, rng).formula
                child = mutate(parent, grammar, rng, max_depth=config.max_depth)
            offspring.append(evaluate(child))
        population = offspring
        record(gen, population)
    return best, history
