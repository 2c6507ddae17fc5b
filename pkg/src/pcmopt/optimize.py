"""Bound-constrained minimization: exhaustive sweep, real-coded genetic
algorithm, and particle swarm, over objectives backed by the simulator, a
trained surrogate, or a plain function.

Every result carries both the backend's best objective and a simulator-
verified value (for surrogate backends the optimum is always re-simulated
before reporting).
"""

from __future__ import annotations

import itertools
import json
import time
import warnings
from dataclasses import dataclass, field, asdict

import numpy as np


@dataclass(frozen=True)
class ParameterSpec:
    name: str
    lower: float
    upper: float
    step: float | None = None  # grid step, required for sweeps

    def validate(self) -> None:
        if not self.lower < self.upper:
            raise ValueError(f"{self.name}: lower must be < upper")
        if self.step is not None and self.step <= 0:
            raise ValueError(f"{self.name}: grid step must be positive")


class Backend:
    """Objective backend. evaluate() drives the search; verify() is the
    simulator-truth value reported alongside every optimum."""

    def evaluate(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def verify(self, x: np.ndarray) -> float:
        return self.evaluate(x)

    def fresh(self, seed: int) -> "Backend":
        """Per-repeat variant (e.g. retrained surrogate); default is self."""
        return self


class FunctionBackend(Backend):
    def __init__(self, fn):
        self.fn = fn

    def evaluate(self, x):
        return float(self.fn(np.asarray(x, dtype=float)))


@dataclass
class OptimizationProblem:
    parameters: list[ParameterSpec]
    objective: str  # metric tag, e.g. "T_o_max" or "T_osc"
    backend: Backend
    seed: int = 0

    def __post_init__(self):
        for p in self.parameters:
            p.validate()

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.parameters]

    @property
    def lower(self) -> np.ndarray:
        return np.array([p.lower for p in self.parameters])

    @property
    def upper(self) -> np.ndarray:
        return np.array([p.upper for p in self.parameters])


@dataclass
class GAConfig:
    population: int = 50
    elite: int = 2
    crossover_fraction: float = 0.8
    mutation_sigma_frac: float = 0.05  # of each parameter's range
    stall_generations: int = 10
    max_generations: int = 100
    tol: float = 1e-3
    tournament: int = 3

    def validate(self):
        if min(self.population, self.elite, self.stall_generations,
               self.max_generations, self.tournament) < 1:
            raise ValueError("all GA counts must be >= 1")
        if not 0.0 <= self.crossover_fraction <= 1.0:
            raise ValueError("crossover_fraction must be in [0, 1]")


@dataclass
class PSOConfig:
    swarm: int = 40
    inertia_start: float = 0.9
    inertia_end: float = 0.4
    cognitive: float = 1.49
    social: float = 1.49
    stall_iterations: int = 15
    max_iterations: int = 100
    tol: float = 1e-3

    def validate(self):
        if min(self.swarm, self.stall_iterations, self.max_iterations) < 1:
            raise ValueError("all PSO counts must be >= 1")


@dataclass
class OptimizationResult:
    parameters: dict[str, float]
    objective_value: float        # backend value at the optimum
    verified_objective: float     # simulator-verified value
    n_evaluations: int
    wall_time: float
    trace: list[float]            # best-so-far objective per generation
    strategy: str
    seed: int | None
    config: dict = field(default_factory=dict)

    def rounded_parameters(self, decimals: int = 0) -> dict[str, float]:
        """Paper-table resolution (1 degC / 1 um); raw optima kept above."""
        return {k: round(v, decimals) for k, v in self.parameters.items()}

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


class _CachedObjective:
    """Memoizes backend evaluations; failures score +inf, never abort."""

    def __init__(self, backend: Backend):
        self.backend = backend
        self.cache: dict[tuple, float] = {}
        self.n_evaluations = 0

    def __call__(self, x: np.ndarray) -> float:
        key = tuple(np.asarray(x, dtype=float))
        if key in self.cache:
            return self.cache[key]
        self.n_evaluations += 1
        try:
            value = float(self.backend.evaluate(np.asarray(x, dtype=float)))
            if not np.isfinite(value):
                value = np.inf
        except Exception as exc:  # noqa: BLE001 - penalize, keep optimizing
            warnings.warn(f"objective evaluation failed ({exc}); "
                          "penalized with +inf", stacklevel=2)
            value = np.inf
        self.cache[key] = value
        return value

    def batch(self, X: np.ndarray) -> np.ndarray:
        return np.array([self(x) for x in X])


def _result(problem, strategy, x_best, f_best, cached, trace, t0, seed, config):
    return OptimizationResult(
        parameters=dict(zip(problem.names, (float(v) for v in x_best))),
        objective_value=float(f_best),
        verified_objective=float(problem.backend.verify(np.asarray(x_best))),
        n_evaluations=cached.n_evaluations,
        wall_time=time.time() - t0,
        trace=[float(v) for v in trace],
        strategy=strategy,
        seed=seed,
        config=config,
    )


def parametric_sweep(problem: OptimizationProblem,
                     grid_cap: int = 200_000
                     ) -> tuple[OptimizationResult, list[dict]]:
    """Evaluate every grid point; returns the argmin (deterministic
    first-lowest tie break) plus the full table for plotting."""
    t0 = time.time()
    axes = []
    for p in problem.parameters:
        if p.step is None:
            raise ValueError(f"{p.name} has no grid step; use GA or PSO")
        n = int(np.floor((p.upper - p.lower) / p.step + 1e-9)) + 1
        axes.append(p.lower + p.step * np.arange(n))
    total = int(np.prod([a.size for a in axes]))
    if total > grid_cap:
        raise ValueError(
            f"grid of {total} points exceeds cap {grid_cap}; "
            "use ga_minimize or pso_minimize instead")

    cached = _CachedObjective(problem.backend)
    best_x, best_f = None, np.inf
    table = []
    for combo in itertools.product(*axes):
        x = np.array(combo)
        f = cached(x)
        table.append({**dict(zip(problem.names, map(float, combo))),
                      problem.objective: f})
        if f < best_f:
            best_f, best_x = f, x
    result = _result(problem, "sweep", best_x, best_f, cached, [best_f],
                     t0, None, {"grid_cap": grid_cap})
    return result, table


def ga_minimize(problem: OptimizationProblem, config: GAConfig | None = None,
                seed: int | None = None) -> OptimizationResult:
    """Real-coded GA: tournament selection, blend crossover, annealed
    single-coordinate Gaussian mutation, elitism; stalls out when the best
    objective stops improving."""
    config = config or GAConfig()
    config.validate()
    seed = problem.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    t0 = time.time()

    lower, upper = problem.lower, problem.upper
    span = upper - lower
    dim = lower.size
    cached = _CachedObjective(problem.backend)

    pop = rng.uniform(lower, upper, size=(config.population, dim))
    fitness = cached.batch(pop)

    def tournament():
        idx = rng.integers(0, config.population, size=config.tournament)
        return pop[idx[np.argmin(fitness[idx])]]

    trace = []
    best_hist = []
    for gen in range(config.max_generations):
        order = np.argsort(fitness, kind="stable")
        pop, fitness = pop[order], fitness[order]
        trace.append(float(fitness[0]))
        best_hist.append(float(fitness[0]))
        if (len(best_hist) > config.stall_generations
                and best_hist[-config.stall_generations - 1]
                - best_hist[-1] < config.tol):
            break

        n_children = config.population - config.elite
        n_xover = int(round(config.crossover_fraction * n_children))
        sigma = config.mutation_sigma_frac * span * (
            1.0 - 0.9 * gen / config.max_generations)
        children = np.empty((n_children, dim))
        for i in range(n_xover):
            p1, p2 = tournament(), tournament()
            u = rng.uniform(-0.25, 1.25, size=dim)
            children[i] = p1 + u * (p2 - p1)
        for i in range(n_xover, n_children):
            # One coordinate at a time: a steep valley in one variable must
            # not veto exploration along directions the objective barely
            # resolves.
            child = tournament().copy()
            j = int(rng.integers(dim))
            child[j] += rng.normal(0.0, 1.0) * sigma[j]
            children[i] = child
        np.clip(children, lower, upper, out=children)

        pop = np.vstack([pop[:config.elite], children])
        fitness = np.concatenate([fitness[:config.elite],
                                  cached.batch(children)])

    best = int(np.argmin(fitness))
    return _result(problem, "ga", pop[best], fitness[best], cached, trace,
                   t0, seed, asdict(config))


def pso_minimize(problem: OptimizationProblem, config: PSOConfig | None = None,
                 seed: int | None = None) -> OptimizationResult:
    """Particle swarm with linearly annealed inertia; positions clipped to
    bounds with the wall-normal velocity zeroed."""
    config = config or PSOConfig()
    config.validate()
    seed = problem.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    t0 = time.time()

    lower, upper = problem.lower, problem.upper
    span = upper - lower
    dim = lower.size
    cached = _CachedObjective(problem.backend)

    x = rng.uniform(lower, upper, size=(config.swarm, dim))
    v = rng.uniform(-1.0, 1.0, size=(config.swarm, dim)) * span * 0.1
    f = cached.batch(x)
    p_best_x, p_best_f = x.copy(), f.copy()
    g = int(np.argmin(f))
    g_best_x, g_best_f = x[g].copy(), float(f[g])

    trace = []
    best_hist = []
    for it in range(config.max_iterations):
        trace.append(g_best_f)
        best_hist.append(g_best_f)
        if (len(best_hist) > config.stall_iterations
                and best_hist[-config.stall_iterations - 1]
                - best_hist[-1] < config.tol):
            break

        w = config.inertia_start + (config.inertia_end - config.inertia_start
                                    ) * it / max(config.max_iterations - 1, 1)
        r1 = rng.uniform(size=(config.swarm, dim))
        r2 = rng.uniform(size=(config.swarm, dim))
        v = (w * v + config.cognitive * r1 * (p_best_x - x)
             + config.social * r2 * (g_best_x - x))
        x = x + v
        low_hit = x < lower
        high_hit = x > upper
        v[low_hit | high_hit] = 0.0
        np.clip(x, lower, upper, out=x)

        f = cached.batch(x)
        improved = f < p_best_f
        p_best_x[improved] = x[improved]
        p_best_f[improved] = f[improved]
        g = int(np.argmin(p_best_f))
        if p_best_f[g] < g_best_f:
            g_best_f = float(p_best_f[g])
            g_best_x = p_best_x[g].copy()

    return _result(problem, "pso", g_best_x, g_best_f, cached, trace,
                   t0, seed, asdict(config))


_STRATEGIES = {"ga": ga_minimize, "pso": pso_minimize}


def repeat_with_seeds(problem: OptimizationProblem, strategy: str,
                      n_runs: int = 10, base_seed: int | None = None,
                      config=None) -> dict:
    """Repeat a stochastic strategy n_runs times with distinct seeds.

    Surrogate backends resample their training subset and retrain per run
    (via Backend.fresh). Reports mean/min/max per parameter and for the
    simulator-verified objective, the paper's range convention.
    """
    if n_runs < 2:
        raise ValueError("n_runs must be >= 2")
    if strategy == "sweep":
        runner = lambda prob, seed: parametric_sweep(prob)[0]  # noqa: E731
    elif strategy in _STRATEGIES:
        opt = _STRATEGIES[strategy]
        runner = lambda prob, seed: opt(prob, config, seed=seed)  # noqa: E731
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    base_seed = problem.seed if base_seed is None else base_seed

    results = []
    for run in range(n_runs):
        run_seed = base_seed + run
        prob = OptimizationProblem(problem.parameters, problem.objective,
                                   problem.backend.fresh(run_seed),
                                   seed=run_seed)
        results.append(runner(prob, run_seed))

    def stats(values):
        arr = np.asarray(values, dtype=float)
        return {"mean": float(arr.mean()), "min": float(arr.min()),
                "max": float(arr.max())}

    summary = {
        "strategy": strategy,
        "n_runs": n_runs,
        "parameters": {
            name: stats([r.parameters[name] for r in results])
            for name in problem.names
        },
        "verified_objective": stats([r.verified_objective for r in results]),
        "objective_value": stats([r.objective_value for r in results]),
    }
    return {"summary": summary, "runs": results}
