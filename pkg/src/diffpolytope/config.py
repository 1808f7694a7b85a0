"""Experiment configuration and its flat ``key = value`` file format.

One setting per line, ``#`` starts a comment, list values are comma
separated and ``inf`` stands for the exact-eigenvector limit of M::

    experiment = simple_convergence
    m_list = 10, 100, 1000, inf   # signal counts
    trials = 200
"""
import dataclasses
import math
from dataclasses import dataclass, field

from .errors import InvalidInput

EXPERIMENTS = ("inclusion_ratio", "simple_convergence", "sparse_study", "scaling", "hypothesis", "grid")


@dataclass
class ExperimentConfig:
    experiment: str = "simple_convergence"
    model: str = "rg"
    n: int = 10
    r: float = 0.6
    p: float = 0.3
    geometry: str = "torus"
    m_list: list = field(default_factory=lambda: [10, 100, 1000, 10000, 100000])
    k_list: list = field(default_factory=lambda: [1])
    k_min: int = 1
    k_max: int = 10
    source: str = "uniform"
    trials: int = 200
    seed: int = 0
    tolerance: float = 1e-9
    sensitivity_tolerances: list = field(default_factory=list)
    strategies: list = field(default_factory=lambda: ["simple"])
    models: list = field(default_factory=lambda: ["rg"])
    n_list: list = field(default_factory=lambda: [10])
    p_factor: float = 1.5
    candidates: int = 20
    param_low: float = 0.2
    param_high: float = 0.6
    step: float = 0.01
    repetitions: int = 0
    workers: int = 1
    chunk: int = 1 << 15
    out_dir: str = "results"


# paper settings per experiment; anything not listed keeps the dataclass default
PAPER_DEFAULTS = {
    "inclusion_ratio": dict(model="dense", k_list=list(range(1, 21)),
                            m_list=[10, 100, 1000, 10000, 100000], sensitivity_tolerances=[1e-6]),
    "simple_convergence": dict(strategies=["simple"], m_list=[10, 100, 1000, 10000, 100000, math.inf]),
    "sparse_study": dict(strategies=["sparse"], m_list=[10, 100, 1000, 10000, 100000, math.inf]),
    "scaling": dict(models=["rg", "er", "ring"], n_list=[10, 20, 30], m_list=[100000],
                    strategies=["simple", "sparse"]),
    "hypothesis": dict(m_list=[10, 50, 100, 150, 200], trials=100),
    "grid": dict(model="dense", n=3, m_list=[1000], k_min=2, k_max=5, repetitions=10, trials=1),
}

_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def default_config(experiment, **overrides):
    if experiment not in EXPERIMENTS:
        raise InvalidInput(f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    values = dict(PAPER_DEFAULTS[experiment])
    values.update(overrides)
    return ExperimentConfig(experiment=experiment, **values)


def _parse_scalar(text):
    text = text.strip()
    low = text.lower()
    if low in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _coerce(name, raw):
    default = _FIELDS[name].default
    if _FIELDS[name].default_factory is not dataclasses.MISSING:
        items = [s for s in raw.split(",") if s.strip()]
        return [_parse_scalar(s) for s in items]
    if isinstance(default, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(_parse_scalar(raw))
    return raw.strip()


def parse_config(text):
    """Parse config text; the ``experiment`` key selects which paper defaults apply."""
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInput(f"config line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise InvalidInput(f"config line {lineno}: unknown key {key!r}")
        try:
            pairs[key] = _coerce(key, raw)
        except ValueError as exc:
            raise InvalidInput(f"config line {lineno}: {exc}") from None
    experiment = pairs.pop("experiment", "simple_convergence")
    return default_config(experiment, **pairs)


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def _format(value):
    if isinstance(value, list):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, float):
        return "inf" if math.isinf(value) else repr(value)
    return str(value)


def dump_config(cfg):
    """Serialize every field; ``parse_config(dump_config(cfg)) == cfg``."""
    lines = [f"{f} = {_format(getattr(cfg, f))}" for f in _FIELDS]
    return "\n".join(lines) + "\n"
