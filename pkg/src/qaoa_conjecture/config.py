"""Run configuration: a single YAML file describing every stage of a run."""
from dataclasses import asdict, dataclass, field
from typing import Optional

import yaml

from .analysis import DEFAULT_EPSILON, INVARIANT_SETS
from .conjecture.engine import DIRECTIONS, FAMILIES, EngineConfig
from .errors import ConfigError, InfeasibleModel, TooLarge
from .graphs import MAX_N, MODEL_KINDS, GraphModel
from .invariants import INVARIANT_COLUMNS
from .table import OptimizerSettings

DEFAULT_SEED = 20240601


@dataclass
class ModelSpec:
    """``count`` graphs of one family, spread round-robin over the sizes in ``n_range``."""

    kind: str
    params: dict = field(default_factory=dict)
    count: int = 10
    n_range: tuple = (6, 14)
    n_step: int = 1

    def sizes(self):
        lo, hi = self.n_range
        return list(range(lo, hi + 1, self.n_step))

    def model_for(self, n):
        """GraphModel with size-dependent params resolved (``m_per_n`` for gnm)."""
        params = dict(self.params)
        if self.kind == "gnm" and "m_per_n" in params:
            params["m"] = int(round(float(params.pop("m_per_n")) * n))
        return GraphModel(self.kind, params)


@dataclass
class AnalysisConfig:
    epsilon: float = DEFAULT_EPSILON
    within_model: bool = False
    invariant_sets: dict = field(default_factory=lambda: {k: list(v)
                                                          for k, v in INVARIANT_SETS.items()})


@dataclass
class RunConfig:
    seed: int = DEFAULT_SEED
    output: str = "run"
    models: list = field(default_factory=list)
    depths: list = field(default_factory=lambda: [1])
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    engine: EngineConfig = field(default_factory=EngineConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)


def default_models():
    return [
        ModelSpec("barabasi_albert", {"attach": 2}, count=50, n_range=(6, 14)),
        ModelSpec("watts_strogatz", {"k": 2, "p_rewire": 0.3}, count=50, n_range=(6, 14)),
        ModelSpec("gnm", {"m_per_n": 1.5}, count=50, n_range=(6, 14)),
        ModelSpec("regular", {"d": 2}, count=25, n_range=(6, 14)),
        ModelSpec("regular", {"d": 3}, count=25, n_range=(6, 14), n_step=2),
    ]


def default_config():
    return RunConfig(models=default_models())


# ---------------------------------------------------------------- (de)serialization


def _plain(obj):
    if isinstance(obj, tuple):
        return [_plain(x) for x in obj]
    if isinstance(obj, list):
        return [_plain(x) for x in obj]
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    return obj


def config_to_dict(cfg):
    return {
        "seed": cfg.seed,
        "output": cfg.output,
        "models": [_plain(asdict(m)) for m in cfg.models],
        "depths": list(cfg.depths),
        "optimizer": _plain(asdict(cfg.optimizer)),
        "engine": _plain(asdict(cfg.engine)),
        "analysis": _plain(asdict(cfg.analysis)),
    }


def dump_config(cfg):
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False, default_flow_style=None)


def _expect(cond, message, path):
    if not cond:
        raise ConfigError(message, path=path)


def _section(data, key, allowed, path):
    sec = data.get(key) or {}
    _expect(isinstance(sec, dict), "expected a mapping", path)
    unknown = sorted(set(sec) - set(allowed))
    _expect(not unknown, f"unknown keys {unknown}", path)
    return sec


def _int(value, path, lo=None):
    _expect(isinstance(value, int) and not isinstance(value, bool), "expected an integer", path)
    if lo is not None:
        _expect(value >= lo, f"must be >= {lo}", path)
    return value


def _real(value, path):
    _expect(isinstance(value, (int, float)) and not isinstance(value, bool), "expected a number",
            path)
    return float(value)


def _model(data, i):
    path = f"models[{i}]"
    _expect(isinstance(data, dict), "expected a mapping", path)
    unknown = sorted(set(data) - {"kind", "params", "count", "n_range", "n_step"})
    _expect(not unknown, f"unknown keys {unknown}", path)
    kind = data.get("kind")
    _expect(kind in MODEL_KINDS, f"kind must be one of {list(MODEL_KINDS)}", f"{path}.kind")
    params = data.get("params") or {}
    _expect(isinstance(params, dict), "expected a mapping", f"{path}.params")
    count = _int(data.get("count", 10), f"{path}.count", lo=1)
    n_range = data.get("n_range", [6, 14])
    _expect(isinstance(n_range, (list, tuple)) and len(n_range) == 2, "expected [min, max]",
            f"{path}.n_range")
    lo = _int(n_range[0], f"{path}.n_range[0]", lo=1)
    hi = _int(n_range[1], f"{path}.n_range[1]", lo=lo)
    _expect(hi <= MAX_N, f"n above the supported maximum {MAX_N}", f"{path}.n_range[1]")
    step = _int(data.get("n_step", 1), f"{path}.n_step", lo=1)
    spec = ModelSpec(kind, dict(params), count, (lo, hi), step)
    if kind != "file":
        for n in spec.sizes():
            try:
                spec.model_for(n).validate(n)
            except (InfeasibleModel, TooLarge) as exc:
                raise ConfigError(f"{kind} {params} infeasible at n={n}: {exc}",
                                  path=path) from None
    return spec


def config_from_dict(data):
    """Validate and build a RunConfig; errors carry the offending field path."""
    if data is None:
        data = {}
    _expect(isinstance(data, dict), "expected a mapping at top level", "")
    unknown = sorted(set(data) - {"seed", "output", "models", "depths", "optimizer", "engine",
                                  "analysis"})
    _expect(not unknown, f"unknown keys {unknown}", "")
    cfg = default_config()
    if "seed" in data:
        cfg.seed = _int(data["seed"], "seed", lo=0)
        _expect(cfg.seed < 2 ** 64, "must fit in 64 bits", "seed")
    if "output" in data:
        _expect(isinstance(data["output"], str), "expected a string", "output")
        cfg.output = data["output"]
    if "models" in data:
        models = data["models"]
        _expect(isinstance(models, list) and models, "expected a non-empty list", "models")
        cfg.models = [_model(m, i) for i, m in enumerate(models)]
    if "depths" in data:
        depths = data["depths"]
        _expect(isinstance(depths, list) and depths, "expected a non-empty list", "depths")
        cfg.depths = sorted({_int(d, f"depths[{i}]", lo=1) for i, d in enumerate(depths)})

    opt = _section(data, "optimizer", ("restarts", "tol", "max_iters"), "optimizer")
    max_iters = opt.get("max_iters", cfg.optimizer.max_iters)
    if max_iters is not None:
        max_iters = _int(max_iters, "optimizer.max_iters", lo=1)
    tol = _real(opt.get("tol", cfg.optimizer.tol), "optimizer.tol")
    _expect(tol > 0, "must be positive", "optimizer.tol")
    cfg.optimizer = OptimizerSettings(
        restarts=_int(opt.get("restarts", cfg.optimizer.restarts), "optimizer.restarts", lo=1),
        tol=tol, max_iters=max_iters)

    eng = _section(data, "engine", tuple(EngineConfig.__dataclass_fields__), "engine")
    kwargs = {}
    for key in ("max_violations", "min_touches", "max_denominator"):
        if key in eng:
            kwargs[key] = _int(eng[key], f"engine.{key}", lo=0 if key == "max_violations" else 1)
    for key in ("touch_tol", "violation_tol"):
        if key in eng:
            kwargs[key] = _real(eng[key], f"engine.{key}")
            _expect(kwargs[key] >= 0, "must be non-negative", f"engine.{key}")
    if "keep_constant_bounds" in eng:
        _expect(isinstance(eng["keep_constant_bounds"], bool), "expected a boolean",
                "engine.keep_constant_bounds")
        kwargs["keep_constant_bounds"] = eng["keep_constant_bounds"]
    for key, allowed in (("families", FAMILIES), ("directions", DIRECTIONS)):
        if key in eng:
            vals = eng[key]
            _expect(isinstance(vals, list) and vals, "expected a non-empty list", f"engine.{key}")
            for i, v in enumerate(vals):
                _expect(v in allowed, f"must be one of {list(allowed)}", f"engine.{key}[{i}]")
            kwargs[key] = tuple(vals)
    for key in ("targets", "features"):
        if key in eng and not (key == "features" and eng[key] is None):
            vals = eng[key]
            _expect(isinstance(vals, list) and vals and all(isinstance(v, str) for v in vals),
                    "expected a non-empty list of column names", f"engine.{key}")
            kwargs[key] = tuple(vals)
    cfg.engine = EngineConfig(**kwargs)

    ana = _section(data, "analysis", ("epsilon", "within_model", "invariant_sets"), "analysis")
    epsilon = _real(ana.get("epsilon", DEFAULT_EPSILON), "analysis.epsilon")
    _expect(epsilon > 0, "must be positive", "analysis.epsilon")
    within = ana.get("within_model", False)
    _expect(isinstance(within, bool), "expected a boolean", "analysis.within_model")
    sets = ana.get("invariant_sets", cfg.analysis.invariant_sets)
    _expect(isinstance(sets, dict) and sets, "expected a non-empty mapping",
            "analysis.invariant_sets")
    for name, cols in sets.items():
        path = f"analysis.invariant_sets.{name}"
        _expect(isinstance(cols, list) and cols, "expected a non-empty list", path)
        for i, c in enumerate(cols):
            _expect(c in INVARIANT_COLUMNS, f"unknown invariant {c!r}", f"{path}[{i}]")
    cfg.analysis = AnalysisConfig(epsilon, within, {k: list(v) for k, v in sets.items()})
    return cfg


def load_config(path: Optional[str]):
    if path is None:
        return default_config()
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", path=str(path)) from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}", path=str(path)) from None
    return config_from_dict(data)
