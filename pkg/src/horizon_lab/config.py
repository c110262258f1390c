"""Run configuration: a flat ``section.key = value`` text format.

Grammar: one assignment per line, ``#`` starts a comment, blank lines are
ignored.  Keys without a section belong to ``run``.  Values are numbers,
complex literals (``0.4j``), comma lists, ``auto`` or bare strings.
"""

from dataclasses import dataclass, fields

from .errors import ParseError, UnknownCommand, ValidationError

COMMANDS = ("mode-entropy", "scaling-study", "widom-check", "u0-study", "schatten-growth",
            "verify-suite", "dump-kernel", "cache")


@dataclass(frozen=True)
class RunConfig:
    command: str = "mode-entropy"
    mass: float = 1.0
    fermion_mass: float = 0.1
    mode_k: float = 0.5
    mode_n: int = 1
    lambda_override: float | None = None
    epsilon: float | None = None
    alpha: float | None = None
    u0: float = -60.0
    rho: float = 1.0
    grid_n: int | None = None          # None means "auto"
    abs_tol: float = 1e-10
    omega_min_factor: float = 1e-12
    t12_strategy: str = "zero"
    t12_value: complex = 0j
    alpha_list: tuple = (32.0, 64.0, 128.0, 256.0, 512.0)
    function: str = "eta"
    seed: int = 0
    output_dir: str = "."
    output_format: str = "csv"
    cache_action: str = "ls"

    def __post_init__(self):
        validate(self)


def validate(cfg: RunConfig) -> None:
    if cfg.command not in COMMANDS:
        raise UnknownCommand(f"unknown command {cfg.command!r}")
    if (cfg.epsilon is None) == (cfg.alpha is None):
        raise ValidationError("epsilon/alpha: exactly one of epsilon and alpha must be given")
    if not cfg.mass > 0:
        raise ValidationError("mass: M must be positive")
    if not cfg.rho > 0:
        raise ValidationError("rho: rho must be positive")
    if cfg.epsilon is not None and not cfg.epsilon > 0:
        raise ValidationError("epsilon: must be positive")
    if cfg.alpha is not None and not cfg.alpha > 0:
        raise ValidationError("alpha: must be positive")
    if cfg.fermion_mass < 0:
        raise ValidationError("fermion_mass: must be non-negative")
    if cfg.output_format not in ("csv", "json"):
        raise ValidationError("output.format: must be csv or json")
    if cfg.t12_strategy not in ("zero", "constant", "completeness-fit"):
        raise ValidationError("t12.strategy: unknown strategy")
    if abs(cfg.t12_value) > 0.5:
        raise ValidationError("t12.value: |t12| must not exceed 1/2")


def derived_alpha(cfg: RunConfig) -> float:
    return cfg.alpha if cfg.alpha is not None else cfg.mass / cfg.epsilon


def derived_epsilon(cfg: RunConfig) -> float:
    return cfg.epsilon if cfg.epsilon is not None else cfg.mass / cfg.alpha


# text key -> field name
_KEYS = {
    "run.command": "command", "run.seed": "seed", "run.function": "function",
    "run.alpha_list": "alpha_list",
    "physics.mass": "mass", "physics.fermion_mass": "fermion_mass",
    "mode.k": "mode_k", "mode.n": "mode_n", "mode.lambda_override": "lambda_override",
    "scale.epsilon": "epsilon", "scale.alpha": "alpha",
    "region.u0": "u0", "region.rho": "rho",
    "grid.n": "grid_n",
    "quad.abs_tol": "abs_tol", "quad.omega_min_factor": "omega_min_factor",
    "t12.strategy": "t12_strategy", "t12.value": "t12_value",
    "output.dir": "output_dir", "output.format": "output_format",
    "cache.action": "cache_action",
}
_FIELD_TO_KEY = {v: k for k, v in _KEYS.items()}
_FLOATS = {"mass", "fermion_mass", "mode_k", "lambda_override", "epsilon", "alpha", "u0", "rho",
           "abs_tol", "omega_min_factor"}
_INTS = {"mode_n", "grid_n", "seed"}


def _convert(name: str, text: str, line: int):
    try:
        if name in _FLOATS:
            return float(text)
        if name in _INTS:
            return None if (name == "grid_n" and text == "auto") else int(text)
        if name == "t12_value":
            return complex(text.replace(" ", ""))
        if name == "alpha_list":
            return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ParseError(f"bad value {text!r} for {_FIELD_TO_KEY[name]}", line) from exc
    return text


def parse_config(text: str, **overrides) -> RunConfig:
    """Parse configuration text; ``overrides`` (field names) win over the text."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if "." not in key:
            key = "run." + key
        if key not in _KEYS:
            raise ParseError(f"unknown key {key!r}", lineno)
        if not value:
            raise ParseError(f"missing value for {key!r}", lineno)
        values[_KEYS[key]] = _convert(_KEYS[key], value, lineno)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)


def _format(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, complex):
        return repr(value).strip("()")
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: RunConfig) -> str:
    """Text that :func:`parse_config` maps back to an equal config."""
    default = RunConfig(alpha=1.0)
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if value is None:
            if f.name == "grid_n":
                lines.append("grid.n = auto")
            continue
        if value == getattr(default, f.name) and f.name not in ("command", "alpha"):
            continue
        lines.append(f"{_FIELD_TO_KEY[f.name]} = {_format(value)}")
    return "\n".join(lines) + "\n"


