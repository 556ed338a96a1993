"""
Evolutionary search (DEAP) for the configuration that brings a relation
closest to its bound, or for relation "ozawa" the one that pushes Ozawa's
product furthest below ħ/2. States are minimal Gaussians with zero means.
"""
import logging
import math
import random
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from deap import algorithms, base, creator, tools

from src.errors import ConfigError, LinMeasureError
from src.measurement import gaussian
from src.measurement.linear_model import LinearModel, make_model
from src.measurement.packets import MomentSummary

logger = logging.getLogger(__name__)

# genes: β₁, β₂, α₁, determinant-sign gene, log σ(x₀), log σ(X₀)
BOUNDS = {
    "beta1": (0.1, 3.0),
    "beta2": (-3.0, 3.0),
    "alpha1": (-3.0, 3.0),
    "branch": (-1.0, 1.0),
    "log_sigma_x0": (math.log(0.1), math.log(10.0)),
    "log_sigma_X0": (math.log(0.1), math.log(10.0)),
}
LOWS = [b[0] for b in BOUNDS.values()]
HIGHS = [b[1] for b in BOUNDS.values()]
PENALTY = 1e6
SEARCH_RELATIONS = ("64", "65", "69", "ozawa")


def model_from_vector(vec, family: str, hbar: float = 1.0) -> LinearModel:
    """Decode genes into a valid model of the conserving or general family."""
    b1 = vec[0]
    s = 1.0 if vec[3] >= 0 else -1.0
    if family == "conserving":
        b2 = 1.0 - b1
        a1 = b1 + s
        a2 = 1.0 - a1
    elif family == "general":
        b2, a1 = vec[1], vec[2]
        a2 = (a1 * b2 - s) / b1
    else:
        raise ConfigError(f"Unknown search family '{family}'")
    return make_model(a1, a2, b1, b2, hbar=hbar, name=f"{family}_search")


def states_from_vector(vec, hbar: float = 1.0):
    obj = MomentSummary.minimal(0.0, math.exp(vec[4]), hbar=hbar)
    probe = MomentSummary.minimal(0.0, math.exp(vec[5]), hbar=hbar)
    return obj, probe


def evaluate_individual(vec, relation: str, family: str, hbar: float = 1.0):
    """Fitness: product − bound of the relation (lower is closer, negative is a violation)."""
    for value, low, high in zip(vec, LOWS, HIGHS):
        if value < low or value > high:
            return (PENALTY,)
    try:
        model = model_from_vector(vec, family, hbar)
        obj, probe = states_from_vector(vec, hbar)
        report = gaussian.full_report(model, obj, probe)
    except LinMeasureError:
        return (PENALTY,)
    slack = report.slack(relation)
    if not math.isfinite(slack):
        return (PENALTY,)
    return (slack,)


def setup_deap(relation: str, family: str, hbar: float = 1.0) -> base.Toolbox:
    """Configure the DEAP toolbox."""
    if not hasattr(creator, "SlackFitness"):
        creator.create("SlackFitness", base.Fitness, weights=(-1.0,))
    if not hasattr(creator, "SlackIndividual"):
        creator.create("SlackIndividual", list, fitness=creator.SlackFitness)

    toolbox = base.Toolbox()
    for i, (low, high) in enumerate(BOUNDS.values()):
        toolbox.register(f"attr_{i}", random.uniform, low, high)
    toolbox.register(
        "individual",
        tools.initCycle,
        creator.SlackIndividual,
        tuple(getattr(toolbox, f"attr_{i}") for i in range(len(BOUNDS))),
        n=1,
    )
    toolbox.register("population", tools.initRepeat, list, toolbox.individual)
    toolbox.register("mate", tools.cxBlend, alpha=0.5)
    toolbox.register("mutate", tools.mutPolynomialBounded, eta=20.0, low=LOWS, up=HIGHS, indpb=0.3)
    toolbox.register("select", tools.selTournament, tournsize=3)
    toolbox.register("evaluate", evaluate_individual, relation=relation, family=family, hbar=hbar)
    return toolbox


@dataclass
class SearchResult:
    relation: str
    family: str
    slack: float
    model: Optional[LinearModel]
    sigma_x0: float
    sigma_X0: float
    logbook: tools.Logbook = field(repr=False, default=None)

    def to_dict(self) -> dict:
        m = self.model
        return {
            "relation": self.relation,
            "family": self.family,
            "slack": self.slack,
            "coefficients": list(m.coefficients) if m is not None else None,
            "sigma_x0": self.sigma_x0,
            "sigma_X0": self.sigma_X0,
            "violates": self.slack < -gaussian.RELATION_TOL,
        }


def search_min_slack(relation: str = "64", family: str = "conserving", seed: int = 0,
                     pop_size: int = 40, generations: int = 30, cxpb: float = 0.7, mutpb: float = 0.3,
                     hbar: float = 1.0) -> SearchResult:
    """Run the evolutionary search and return the best configuration found."""
    if relation not in SEARCH_RELATIONS:
        raise ConfigError(f"Unknown relation '{relation}', choose from {SEARCH_RELATIONS}")
    random.seed(seed)
    np.random.seed(seed)
    toolbox = setup_deap(relation, family, hbar)
    pop = toolbox.population(n=pop_size)
    hof = tools.HallOfFame(1)

    stats = tools.Statistics(lambda ind: ind.fitness.values[0])
    stats.register("min", np.min)
    stats.register("avg", np.mean)

    # blended crossover can leave the box
    def clamp(individuals):
        for ind in individuals:
            for i, (low, high) in enumerate(zip(LOWS, HIGHS)):
                ind[i] = min(max(ind[i], low), high)
        return individuals

    toolbox.decorate("mate", lambda f: lambda *a, **k: clamp(f(*a, **k)))

    pop, logbook = algorithms.eaSimple(pop, toolbox, cxpb=cxpb, mutpb=mutpb, ngen=generations,
                                       stats=stats, halloffame=hof, verbose=False)
    best = hof[0]
    slack = best.fitness.values[0]
    model = None if slack >= PENALTY else model_from_vector(best, family, hbar)
    obj, probe = states_from_vector(best, hbar)
    logger.info("Search %s/%s: best slack %.3e at %s, σ(x₀)=%.3g, σ(X₀)=%.3g",
                relation, family, slack, model, obj.sigma_x, probe.sigma_x)
    return SearchResult(relation=relation, family=family, slack=slack, model=model,
                        sigma_x0=obj.sigma_x, sigma_X0=probe.sigma_x, logbook=logbook)
