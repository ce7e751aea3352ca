"""Experiment configuration: flat ``section.key = value`` text format.

Example::

    # minimal two-algorithm experiment
    scenario.L = 10
    scenario.N = 10
    scenario.r_star = 2
    scenario.topology = ring
    scenario.seed = 42
    algorithm.list = c_subspace, d_subspace
    algorithm.mu = 0.01
    run.iterations = 2000
    run.monte_carlo = 10

Unlisted keys keep their documented defaults. ``#`` starts a comment.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import ParseError, UnknownKeyError, ValidationError

ALGORITHM_LABELS = ("c_subspace", "d_subspace", "diffusion_baseline")
GENERATORS = ("global", "clustered")
LOCAL_MODES = ("dense", "support")
TOPOLOGIES = ("ring", "full", "star", "random", "file")
COMBINATIONS = ("uniform", "metropolis", "identity")
GRADIENT_MODES = ("stochastic", "exact")
INIT_MODES = ("zeros", "gaussian")


@dataclass(frozen=True)
class ScenarioSettings:
    dim: int = 10                 # scenario.L
    node_count: int = 10          # scenario.N
    rank: int = 2                 # scenario.r_star
    generator: str = "global"
    local_mode: str = "dense"
    covariance_rho: float = 0.0   # 0 = identity inputs, else AR(1) correlation
    noise_variance: float = 0.01
    topology: str = "ring"
    topology_p: float = 0.3       # edge probability for topology = random
    topology_file: str | None = None
    seed: int = 0


@dataclass(frozen=True)
class AlgorithmSettings:
    algorithms: tuple[str, ...] = ("c_subspace", "d_subspace")
    mu: tuple[float, ...] = (0.01,)  # one value, or one per node
    combination: str = "uniform"
    loading: float = 0.0
    gradient: str = "stochastic"
    init: str = "zeros"

    def step_sizes(self, node_count: int) -> tuple[float, ...]:
        if len(self.mu) == 1:
            return self.mu * node_count
        return self.mu


@dataclass(frozen=True)
class RunSettings:
    iterations: int = 1000
    monte_carlo: int = 1
    steady_state_window: int | None = None  # None = final 10%, min 50


@dataclass(frozen=True)
class OutputSettings:
    directory: str = "out"
    per_node: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioSettings = field(default_factory=ScenarioSettings)
    algorithm: AlgorithmSettings = field(default_factory=AlgorithmSettings)
    run: RunSettings = field(default_factory=RunSettings)
    output: OutputSettings = field(default_factory=OutputSettings)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, scenario=replace(self.scenario, seed=seed))


def _parse_bool(value: str, key: str, line: int) -> bool:
    low = value.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValidationError(f"{key} must be true or false, got {value!r}", line=line, key=key)


def _parse_int(value: str, key: str, line: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ValidationError(f"{key} must be an integer, got {value!r}", line=line, key=key) from None


def _parse_float(value: str, key: str, line: int) -> float:
    try:
        return float(value)
    except ValueError:
        raise ValidationError(f"{key} must be a number, got {value!r}", line=line, key=key) from None


def _parse_choice(value: str, choices, key: str, line: int) -> str:
    if value not in choices:
        raise ValidationError(
            f"{key} must be one of {', '.join(choices)}; got {value!r}", line=line, key=key
        )
    return value


def _parse_float_list(value: str, key: str, line: int) -> tuple[float, ...]:
    parts = [p.strip() for p in value.split(",") if p.strip()]
    if not parts:
        raise ValidationError(f"{key} must hold at least one number", line=line, key=key)
    return tuple(_parse_float(p, key, line) for p in parts)


def _parse_labels(value: str, key: str, line: int) -> tuple[str, ...]:
    parts = [p.strip() for p in value.split(",") if p.strip()]
    if not parts:
        raise ValidationError(f"{key} must list at least one algorithm", line=line, key=key)
    for p in parts:
        if p not in ALGORITHM_LABELS:
            raise ValidationError(
                f"{key}: unknown algorithm {p!r} (choices: {', '.join(ALGORITHM_LABELS)})",
                line=line,
                key=key,
            )
    if len(set(parts)) != len(parts):
        raise ValidationError(f"{key} lists an algorithm twice", line=line, key=key)
    return tuple(parts)


def parse_config(text: str, *, strict: bool = True) -> ExperimentConfig:
    """Parse and fully validate experiment configuration text.

    Raises ParseError for malformed lines, UnknownKeyError for unrecognized
    keys (strict mode only) and ValidationError for out-of-range values; all
    messages carry the offending line number.
    """
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'section.key = value', got {raw.strip()!r}", line=lineno)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ParseError(f"empty key or value in {raw.strip()!r}", line=lineno)
        if key in entries:
            raise ParseError(f"duplicate key {key!r} (first on line {entries[key][1]})", line=lineno)
        entries[key] = (value, lineno)

    lines = {k: ln for k, (_, ln) in entries.items()}

    def take(key: str) -> tuple[str, int] | None:
        return entries.pop(key, None)

    scen = ScenarioSettings()
    alg = AlgorithmSettings()
    run = RunSettings()
    out = OutputSettings()

    if (e := take("scenario.L")) is not None:
        scen = replace(scen, dim=_parse_int(e[0], "scenario.L", e[1]))
    if (e := take("scenario.N")) is not None:
        scen = replace(scen, node_count=_parse_int(e[0], "scenario.N", e[1]))
    if (e := take("scenario.r_star")) is not None:
        scen = replace(scen, rank=_parse_int(e[0], "scenario.r_star", e[1]))
    if (e := take("scenario.generator")) is not None:
        scen = replace(scen, generator=_parse_choice(e[0], GENERATORS, "scenario.generator", e[1]))
    if (e := take("scenario.local_mode")) is not None:
        scen = replace(scen, local_mode=_parse_choice(e[0], LOCAL_MODES, "scenario.local_mode", e[1]))
    if (e := take("scenario.covariance_rho")) is not None:
        scen = replace(scen, covariance_rho=_parse_float(e[0], "scenario.covariance_rho", e[1]))
    if (e := take("scenario.noise_variance")) is not None:
        scen = replace(scen, noise_variance=_parse_float(e[0], "scenario.noise_variance", e[1]))
    if (e := take("scenario.topology")) is not None:
        scen = replace(scen, topology=_parse_choice(e[0], TOPOLOGIES, "scenario.topology", e[1]))
    if (e := take("scenario.topology_p")) is not None:
        scen = replace(scen, topology_p=_parse_float(e[0], "scenario.topology_p", e[1]))
    if (e := take("scenario.topology_file")) is not None:
        scen = replace(scen, topology_file=e[0])
    if (e := take("scenario.seed")) is not None:
        scen = replace(scen, seed=_parse_int(e[0], "scenario.seed", e[1]))

    if (e := take("algorithm.list")) is not None:
        alg = replace(alg, algorithms=_parse_labels(e[0], "algorithm.list", e[1]))
    if (e := take("algorithm.mu")) is not None:
        alg = replace(alg, mu=_parse_float_list(e[0], "algorithm.mu", e[1]))
    if (e := take("algorithm.combination")) is not None:
        alg = replace(alg, combination=_parse_choice(e[0], COMBINATIONS, "algorithm.combination", e[1]))
    if (e := take("algorithm.loading")) is not None:
        alg = replace(alg, loading=_parse_float(e[0], "algorithm.loading", e[1]))
    if (e := take("algorithm.gradient")) is not None:
        alg = replace(alg, gradient=_parse_choice(e[0], GRADIENT_MODES, "algorithm.gradient", e[1]))
    if (e := take("algorithm.init")) is not None:
        alg = replace(alg, init=_parse_choice(e[0], INIT_MODES, "algorithm.init", e[1]))

    if (e := take("run.iterations")) is not None:
        run = replace(run, iterations=_parse_int(e[0], "run.iterations", e[1]))
    if (e := take("run.monte_carlo")) is not None:
        run = replace(run, monte_carlo=_parse_int(e[0], "run.monte_carlo", e[1]))
    if (e := take("run.steady_state_window")) is not None:
        run = replace(run, steady_state_window=_parse_int(e[0], "run.steady_state_window", e[1]))

    if (e := take("output.directory")) is not None:
        out = replace(out, directory=e[0])
    if (e := take("output.per_node")) is not None:
        out = replace(out, per_node=_parse_bool(e[0], "output.per_node", e[1]))

    if entries and strict:
        key, (_, lineno) = next(iter(entries.items()))
        raise UnknownKeyError(f"unknown key {key!r}", line=lineno, key=key)

    config = ExperimentConfig(scenario=scen, algorithm=alg, run=run, output=out)
    validate_config(config, lines)
    return config


def validate_config(config: ExperimentConfig, lines: dict[str, int] | None = None) -> None:
    """Check every range invariant; messages name the key and, when the key
    appeared in the parsed text, its line."""
    lines = lines or {}

    def fail(key: str, message: str) -> None:
        raise ValidationError(f"{key} {message}", line=lines.get(key), key=key)

    s = config.scenario
    if s.dim < 1:
        fail("scenario.L", "must be >= 1")
    if s.node_count < 1:
        fail("scenario.N", "must be >= 1")
    if not 1 <= s.rank <= min(s.dim, s.node_count):
        fail("scenario.r_star", f"must be in 1..min(L, N) = {min(s.dim, s.node_count)}")
    if s.generator == "clustered" and s.rank < 2:
        fail("scenario.r_star", "must be >= 2 for the clustered generator")
    if not 0.0 <= s.covariance_rho < 1.0:
        fail("scenario.covariance_rho", "must be in [0, 1)")
    if s.noise_variance < 0:
        fail("scenario.noise_variance", "must be >= 0")
    if s.topology == "random" and not 0.0 < s.topology_p <= 1.0:
        fail("scenario.topology_p", "must be in (0, 1]")
    if s.topology == "file" and not s.topology_file:
        fail("scenario.topology_file", "is required when scenario.topology = file")
    if s.seed < 0:
        fail("scenario.seed", "must be >= 0")

    a = config.algorithm
    if any(m <= 0 for m in a.mu):
        fail("algorithm.mu", "values must be > 0")
    if len(a.mu) not in (1, s.node_count):
        fail("algorithm.mu", f"needs 1 or N = {s.node_count} values, got {len(a.mu)}")
    if a.loading < 0:
        fail("algorithm.loading", "must be >= 0")

    r = config.run
    if r.iterations < 0:
        fail("run.iterations", "must be >= 0")
    if r.monte_carlo < 1:
        fail("run.monte_carlo", "must be >= 1")
    if r.steady_state_window is not None:
        if r.steady_state_window < 1:
            fail("run.steady_state_window", "must be >= 1")
        if r.steady_state_window > r.iterations + 1:
            fail(
                "run.steady_state_window",
                f"must be <= iterations + 1 = {r.iterations + 1}",
            )
