import os
import json
import hashlib
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union
from geodl.constants import (
    distill_modes,
    classifier_types,
    seed_env
)
from geodl.utils.files import read_txt, load_json


class ConfigError(ValueError):
    """Every problem found in a configuration, each tagged with its line number.

    Line 0 marks an issue that is not tied to a single line (cross-field
    invariants over defaults, environment overrides, JSON sources).
    """

    def __init__(self, issues: List[Tuple[int, str]]):
        self.issues = sorted(issues, key=lambda item: item[0])
        super().__init__(
            "invalid configuration:\n" + "\n".join(
                f"  line {line}: {msg}" for line, msg in self.issues))


@dataclass
class ExperimentConfig:
    # task stream
    input_dim: int = 16
    hidden_dim: int = 32
    feature_dim: int = 8
    classes_total: int = 20
    base_classes: int = 10
    tasks: int = 5
    classes_per_task: int = 2
    per_class_train: int = 100
    per_class_test: int = 50
    noise_sigma: float = 3.0
    standardize: bool = True
    # optimisation
    lr: float = 0.05
    lr_decay: float = 0.1
    epochs_base: int = 60
    epochs_incr: int = 40
    batch: int = 32
    # distillation
    beta: float = 6.0
    tau: float = 2.0
    epsilon: float = 1e-12
    subspace_n: int = 6
    center: bool = True
    memory_per_class: int = 10
    classifier: str = "cosine"
    # runner
    modes: List[str] = field(default_factory=lambda: ["none", "geodl"])
    seeds: List[int] = field(default_factory=lambda: list(range(10)))
    master_seed: int = 1993
    output_path: str = "results"
    workers: int = 1
    record_timing: bool = False
    quadrature_steps: int = 2001

    def to_dict(self) -> Dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Dict) -> "ExperimentConfig":
        return _build({key: (0, value) for key, value in data.items()})

    def replace(self, **changes) -> "ExperimentConfig":
        data = self.to_dict()
        data.update(changes)
        return ExperimentConfig.from_dict(data)

    def config_hash(self) -> str:
        # runner-only fields do not change what a run computes
        data = self.to_dict()
        for key in ("modes", "seeds", "output_path", "workers", "record_timing"):
            data.pop(key)
        blob = json.dumps(data, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:12]

    def run_pairs(self) -> List[Tuple[str, int]]:
        return [(mode, seed) for mode in self.modes for seed in self.seeds]


_FIELDS = {ff.name: ff for ff in dataclasses.fields(ExperimentConfig)}
_ALIASES = {"mode": "modes", "seed": "seeds"}
_TRUE = ("true", "yes", "on", "1")
_FALSE = ("false", "no", "off", "0")


def _field_kind(name: str) -> str:
    default = ExperimentConfig()
    return type(getattr(default, name)).__name__


def _coerce_scalar(kind: str, value: Any):
    if kind == "bool":
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in _TRUE:
            return True
        if text in _FALSE:
            return False
        raise ValueError(f"expected a boolean, got {value!r}")
    if kind == "int":
        if isinstance(value, bool):
            raise ValueError(f"expected an integer, got {value!r}")
        if isinstance(value, float) and not value.is_integer():
            raise ValueError(f"expected an integer, got {value!r}")
        return int(str(value).strip()) if isinstance(value, str) else int(value)
    if kind == "float":
        return float(value)
    text = str(value).strip()
    if not text:
        raise ValueError("expected a non-empty string")
    return text


def _coerce(name: str, value: Any):
    if name == "modes":
        items = value.split(",") if isinstance(value, str) else list(value)
        return [_coerce_scalar("str", item).lower() for item in items if str(item).strip()]
    if name == "seeds":
        items = value.split(",") if isinstance(value, str) else list(value)
        return [_coerce_scalar("int", item) for item in items if str(item).strip()]
    return _coerce_scalar(_field_kind(name), value)


def _check(cfg: ExperimentConfig, lines: Dict[str, int]) -> List[Tuple[int, str]]:
    issues = []

    def bad(key, msg):
        issues.append((lines.get(key, 0), f"{key}: {msg}"))

    for key in ("input_dim", "feature_dim", "classes_total", "base_classes", "tasks",
                "classes_per_task", "per_class_train", "per_class_test",
                "memory_per_class", "subspace_n", "workers"):
        if getattr(cfg, key) < 1:
            bad(key, "must be >= 1")
    for key in ("hidden_dim", "epochs_base", "epochs_incr"):
        if getattr(cfg, key) < 0:
            bad(key, "must be >= 0")
    if cfg.batch < 2:
        bad("batch", "must be >= 2")
    if cfg.feature_dim < 2:
        bad("feature_dim", "must be >= 2 so a proper subspace exists")
    if cfg.noise_sigma < 0:
        bad("noise_sigma", "must be >= 0")
    if cfg.lr < 0:
        bad("lr", "must be >= 0")
    if not 0 < cfg.lr_decay <= 1:
        bad("lr_decay", "must lie in (0, 1]")
    if cfg.beta < 0:
        bad("beta", "must be >= 0")
    for key in ("tau", "epsilon"):
        if getattr(cfg, key) <= 0:
            bad(key, "must be > 0")
    if cfg.quadrature_steps < 3 or cfg.quadrature_steps % 2 == 0:
        bad("quadrature_steps", "must be odd and >= 3")
    if cfg.classifier not in classifier_types:
        bad("classifier", f"must be one of {', '.join(classifier_types)}")
    if not cfg.modes:
        bad("modes", "at least one mode is required")
    for mode in cfg.modes:
        if mode not in distill_modes:
            bad("modes", f"unknown mode {mode!r}, expected one of {', '.join(distill_modes)}")
    if len(set(cfg.modes)) != len(cfg.modes):
        bad("modes", "duplicated mode")
    if not cfg.seeds:
        bad("seeds", "at least one seed is required")
    if len(set(cfg.seeds)) != len(cfg.seeds):
        bad("seeds", "duplicated seed")
    if cfg.base_classes + cfg.tasks * cfg.classes_per_task != cfg.classes_total:
        key = next((kk for kk in ("classes_total", "base_classes", "tasks", "classes_per_task")
                    if kk in lines), "classes_total")
        bad(key, "base_classes + tasks * classes_per_task must equal classes_total "
                 f"({cfg.base_classes} + {cfg.tasks} * {cfg.classes_per_task} != {cfg.classes_total})")
    if cfg.subspace_n >= cfg.feature_dim:
        bad("subspace_n", f"must be < feature_dim ({cfg.feature_dim})")
    if cfg.memory_per_class > cfg.per_class_train:
        bad("memory_per_class", f"must be <= per_class_train ({cfg.per_class_train})")
    return issues


def _build(
        entries: Dict[str, Tuple[int, Any]],
        use_env: bool = False
    ) -> ExperimentConfig:
    issues = []
    values = {}
    lines = {}
    for key, (line, raw) in entries.items():
        name = _ALIASES.get(key, key)
        if name not in _FIELDS:
            issues.append((line, f"unknown key {key!r}"))
            continue
        if name in values:
            issues.append((line, f"duplicated key {key!r} (first set on line {lines[name]})"))
            continue
        try:
            values[name] = _coerce(name, raw)
        except (TypeError, ValueError) as err:
            issues.append((line, f"{key}: cannot parse {raw!r} ({err})"))
            continue
        lines[name] = line

    env_seed = os.environ.get(seed_env) if use_env else None
    if env_seed is not None:
        try:
            values["master_seed"] = _coerce_scalar("int", env_seed)
        except ValueError:
            issues.append((0, f"{seed_env}: cannot parse {env_seed!r} as an integer"))

    if issues:
        raise ConfigError(issues)
    cfg = ExperimentConfig(**values)
    issues = _check(cfg, lines)
    if issues:
        raise ConfigError(issues)
    return cfg


def _split_lines(text: str) -> Tuple[Dict[str, Tuple[int, str]], List[Tuple[int, str]]]:
    entries = {}
    issues = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            issues.append((lineno, f"expected 'key = value', got {content!r}"))
            continue
        key, value = (part.strip() for part in content.split("=", 1))
        if not key:
            issues.append((lineno, "missing key before '='"))
            continue
        if key in entries:
            issues.append((lineno, f"duplicated key {key!r} (first set on line {entries[key][0]})"))
            continue
        entries[key] = (lineno, value)
    return entries, issues


def parse_config(
        source: Union[str, Path, None] = None
    ) -> ExperimentConfig:
    """Parse a `key = value` config (file path or text) or a flat JSON file.

    Parameters
    ----------
    source : str, Path or None
        A path to a file, or the config text itself. A single line without
        "=" is taken as a path. None and the empty string give the defaults.

    Raises
    ------
    ConfigError
        Listing every unknown key, unparsable value and violated invariant.
    """
    if source is None:
        return _build({}, use_env=True)
    text = None
    line = source.strip() if isinstance(source, str) else ""
    if line and not line.startswith("#") and "\n" not in line and "=" not in line:
        # one line without an assignment can only be a file name
        source = Path(line)
    if isinstance(source, Path) or os.path.isfile(source):
        path = Path(source)
        if not path.is_file():
            raise ConfigError([(0, f"config file {str(path)!r} not found")])
        if path.suffix == ".json":
            jdata = load_json(path)
            if not isinstance(jdata, dict):
                raise ConfigError([(0, "a JSON config must be a flat object")])
            return _build({key: (0, value) for key, value in jdata.items()}, use_env=True)
        text = read_txt(path)
    else:
        text = source
    entries, issues = _split_lines(text)
    if issues:
        # report syntax problems together with the per-key ones
        try:
            _build(entries, use_env=True)
        except ConfigError as err:
            issues.extend(err.issues)
        raise ConfigError(issues)
    return _build(entries, use_env=True)


def _render(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return ",".join(str(vv) for vv in value)
    return repr(value) if isinstance(value, float) else str(value)


def default_config_text(
        cfg: Optional[ExperimentConfig] = None
    ) -> str:
    cfg = ExperimentConfig() if cfg is None else cfg
    lines = ["# geodl experiment configuration"]
    for name in _FIELDS:
        key = "mode" if name == "modes" else name
        lines.append(f"{key} = {_render(getattr(cfg, name))}")
    return "\n".join(lines) + "\n"
