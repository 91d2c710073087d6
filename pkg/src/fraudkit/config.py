"""Experiment configuration: a flat INI-style `key = value` file with
bracketed section headers, parsed with the stdlib configparser.

Seeds for every stage derive from the master seed by a fixed offset
(split +1, SMOTE +2, model fitting +3, t-SNE +4) so toggling one stage
never perturbs another.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field

from .baselines import CartParams, KnnParams
from .errors import ConfigError
from .gbdt import GbdtParams
from .resample import SmoteParams
from .embed import TsneParams

SEED_OFFSET_SPLIT = 1
SEED_OFFSET_SMOTE = 2
SEED_OFFSET_MODEL = 3
SEED_OFFSET_TSNE = 4

KNOWN_MODELS = ("knn", "logreg", "cart", "gbdt_leafwise", "gbdt_levelwise")


@dataclass
class ExperimentConfig:
    data_path: str
    label_column: str = "Class"
    test_fraction: float = 0.2
    seed: int = 0
    scaling: bool = False
    outlier_features: list = field(default_factory=list)
    outlier_multiplier: float = 1.5
    recompute_fences: bool = True
    threshold: float = 0.5
    smote_mode: str = "both"          # off | on | both
    smote: SmoteParams = None
    models: list = field(default_factory=lambda: list(KNOWN_MODELS))
    knn: KnnParams = field(default_factory=KnnParams)
    logreg: dict = field(default_factory=lambda: dict(
        learning_rate=0.5, epochs=300, l2=1e-4))
    cart: CartParams = field(default_factory=lambda: CartParams(
        max_depth=6, min_samples_leaf=5))
    gbdt: dict = field(default_factory=dict)  # overrides for GbdtParams
    tsne_enabled: bool = False
    tsne: TsneParams = field(default_factory=TsneParams)
    tsne_max_points: int = 1000
    output_dir: str = "out"
    figures: bool = True

    def __post_init__(self):
        if self.smote is None:
            self.smote = SmoteParams(seed=self.seed + SEED_OFFSET_SMOTE)
        self.validate()

    def validate(self):
        if not self.models:
            raise ConfigError("at least one model must be listed")
        for m in self.models:
            if m not in KNOWN_MODELS:
                raise ConfigError(f"unknown model {m!r}; known: {KNOWN_MODELS}")
        if self.smote_mode not in ("off", "on", "both"):
            raise ConfigError(f"smote mode must be off/on/both, got {self.smote_mode!r}")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction must be in (0,1)")

    def gbdt_params(self, growth: str) -> GbdtParams:
        kwargs = dict(self.gbdt)
        kwargs["growth"] = growth
        kwargs.setdefault("seed", self.seed + SEED_OFFSET_MODEL)
        return GbdtParams(**kwargs)

    def smote_variants(self):
        if self.smote_mode == "off":
            return [False]
        if self.smote_mode == "on":
            return [True]
        return [False, True]


def _getlist(value: str) -> list:
    return [tok.strip() for tok in value.split(",") if tok.strip()]


def load_config(path) -> ExperimentConfig:
    """Parse an experiment config file; raises ConfigError on any problem."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    if "data" not in parser or "path" not in parser["data"]:
        raise ConfigError(f"{path}: [data] section with a 'path' key is required")

    def sec(name):
        return parser[name] if name in parser else {}

    data = parser["data"]
    pipe = sec("pipeline")
    smote_sec = sec("smote")
    models_sec = sec("models")
    tsne_sec = sec("tsne")
    out_sec = sec("output")

    try:
        seed = int(pipe.get("seed", 0))
        cfg = ExperimentConfig(
            data_path=data.get("path"),
            label_column=data.get("label_column", "Class"),
            test_fraction=float(pipe.get("test_fraction", 0.2)),
            seed=seed,
            scaling=_getbool(pipe.get("scaling", "false")),
            outlier_features=_getlist(pipe.get("outlier_features", "")),
            outlier_multiplier=float(pipe.get("outlier_multiplier", 1.5)),
            recompute_fences=_getbool(pipe.get("recompute_fences", "true")),
            threshold=float(pipe.get("threshold", 0.5)),
            smote_mode=smote_sec.get("mode", "both"),
            smote=SmoteParams(
                k=int(smote_sec.get("k", 5)),
                target_ratio=float(smote_sec.get("target_ratio", 1.0)),
                seed=seed + SEED_OFFSET_SMOTE,
            ),
            models=_getlist(models_sec.get("list", ",".join(KNOWN_MODELS))),
            knn=KnnParams(k=int(sec("knn").get("k", 5))),
            logreg=dict(
                learning_rate=float(sec("logreg").get("learning_rate", 0.5)),
                epochs=int(sec("logreg").get("epochs", 300)),
                l2=float(sec("logreg").get("l2", 1e-4)),
            ),
            cart=CartParams(
                max_depth=int(sec("cart").get("max_depth", 6)),
                min_samples_leaf=int(sec("cart").get("min_samples_leaf", 5)),
            ),
            gbdt=_gbdt_overrides(sec("gbdt")),
            tsne_enabled=_getbool(tsne_sec.get("enabled", "false")),
            tsne=TsneParams(
                perplexity=float(tsne_sec.get("perplexity", 30)),
                iterations=int(tsne_sec.get("iterations", 1000)),
                learning_rate=float(tsne_sec.get("learning_rate", 200)),
                seed=seed + SEED_OFFSET_TSNE,
            ),
            tsne_max_points=int(tsne_sec.get("max_points", 1000)),
            output_dir=out_sec.get("dir", "out"),
            figures=_getbool(out_sec.get("figures", "true")),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return cfg


def _getbool(value: str) -> bool:
    v = str(value).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {value!r}")


_GBDT_INT_KEYS = {"n_trees", "max_leaves", "max_depth", "max_bins", "seed"}
_GBDT_FLOAT_KEYS = {"learning_rate", "l1", "l2", "min_split_gain", "min_child_weight"}


def _gbdt_overrides(section) -> dict:
    out = {}
    for key, raw in dict(section).items():
        if key in _GBDT_INT_KEYS:
            out[key] = int(raw)
        elif key in _GBDT_FLOAT_KEYS:
            out[key] = float(raw)
        elif key == "growth":
            raise ConfigError("growth is set by the model name "
                              "(gbdt_leafwise / gbdt_levelwise)")
        else:
            raise ConfigError(f"unknown gbdt option {key!r}")
    return out
