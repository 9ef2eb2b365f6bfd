"""Pipeline configuration: a nested key/value YAML file, losslessly round-trippable.

Every stage parameter has a named key; defaults reproduce the reference
analysis configuration (90% variance PCA, radius 60, 40 nearest neighbors,
17 quantiles from q0.10 to q0.90, 30-unit graph edges, the full 29-statistic
registry). CLI flags override file values; the MICROENV_CONFIG environment
variable supplies a default config path.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .data import ColumnSchema
from .embedding import REDUCERS, EmbedParams
from .errors import SchemaError, ValidationError
from .quantiles import QuantileSpec

ENV_CONFIG = "MICROENV_CONFIG"


@dataclass(frozen=True)
class InputConfig:
    path: str = ""
    id: str = "id"
    x: str = "x"
    y: str = "y"
    cell_type: str = "cell_type"
    expression: tuple[str, ...] = ()
    expression_span: tuple[str, str] | None = None

    def schema(self) -> ColumnSchema:
        return ColumnSchema(
            id=self.id,
            x=self.x,
            y=self.y,
            cell_type=self.cell_type,
            expression=tuple(self.expression),
            expression_span=self.expression_span,
        )


@dataclass(frozen=True)
class PcaConfig:
    variance_target: float = 0.90
    standardize: bool = True

    def __post_init__(self):
        if not 0.0 < self.variance_target <= 1.0:
            raise ValidationError("pca.variance_target must be in (0, 1]")


@dataclass(frozen=True)
class NeighborhoodConfig:
    radius: float = 60.0
    k_max: int | None = 40

    def __post_init__(self):
        if self.radius <= 0:
            raise ValidationError("neighborhood.radius must be positive")
        if self.k_max is not None and self.k_max < 1:
            raise ValidationError("neighborhood.k_max must be >= 1")


@dataclass(frozen=True)
class QuantileConfig:
    min_percentile: float = 0.10
    max_percentile: float = 0.90
    count: int = 17

    def spec(self) -> QuantileSpec:
        return QuantileSpec(self.min_percentile, self.max_percentile, self.count)


@dataclass(frozen=True)
class NetworkConfig:
    edge_threshold: float = 30.0
    statistics: tuple[str, ...] | None = None  # None = full registry
    decay_delta: float = 0.5
    kpath_k: int = 3
    aggregate: str = "center"

    def __post_init__(self):
        if self.edge_threshold <= 0:
            raise ValidationError("network.edge_threshold must be positive")
        if self.aggregate not in ("center", "mean"):
            raise ValidationError("network.aggregate must be 'center' or 'mean'")


@dataclass(frozen=True)
class AssemblyConfig:
    quantile_mode: str = "none"
    network_mode: str = "zscore"


@dataclass(frozen=True)
class EmbeddingConfig:
    n_neighbors: int = 15
    min_dist: float = 0.1
    epochs: int = 500
    seed: int = 42
    reducer: str = "umap"

    def __post_init__(self):
        if self.reducer not in REDUCERS:
            raise ValidationError(f"embedding.reducer must be one of {REDUCERS}")
        if self.n_neighbors < 2:
            raise ValidationError("embedding.n_neighbors must be >= 2")
        if self.epochs < 1:
            raise ValidationError("embedding.epochs must be >= 1")

    def params(self) -> EmbedParams:
        return EmbedParams(
            n_neighbors=self.n_neighbors,
            min_dist=self.min_dist,
            epochs=self.epochs,
            seed=self.seed,
            reducer=self.reducer,
        )


@dataclass(frozen=True)
class ClusterConfig:
    k: int = 5
    seed: int = 42

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("cluster.k must be >= 1")


@dataclass(frozen=True)
class PipelineConfig:
    input: InputConfig = field(default_factory=InputConfig)
    pca: PcaConfig = field(default_factory=PcaConfig)
    neighborhood: NeighborhoodConfig = field(default_factory=NeighborhoodConfig)
    quantiles: QuantileConfig = field(default_factory=QuantileConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    assembly: AssemblyConfig = field(default_factory=AssemblyConfig)
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    output_dir: str = "out"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["input"]["expression"] = list(self.input.expression)
        d["input"]["expression_span"] = (
            list(self.input.expression_span) if self.input.expression_span else None
        )
        d["network"]["statistics"] = (
            list(self.network.statistics) if self.network.statistics else None
        )
        return d

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        raw = dict(raw or {})
        known = {
            "input",
            "pca",
            "neighborhood",
            "quantiles",
            "network",
            "assembly",
            "embedding",
            "cluster",
            "output_dir",
        }
        unknown = set(raw) - known
        if unknown:
            raise SchemaError(f"unknown config sections: {sorted(unknown)}")

        def sect(name):
            v = raw.get(name) or {}
            if not isinstance(v, dict):
                raise SchemaError(f"config section {name!r} must be a mapping")
            return v

        inp = sect("input")
        span = inp.get("expression_span")
        input_cfg = InputConfig(
            path=str(inp.get("path", "")),
            id=str(inp.get("id", "id")),
            x=str(inp.get("x", "x")),
            y=str(inp.get("y", "y")),
            cell_type=str(inp.get("cell_type", "cell_type")),
            expression=tuple(inp.get("expression") or ()),
            expression_span=tuple(span) if span else None,
        )
        net = sect("network")
        stats = net.get("statistics")
        return cls(
            input=input_cfg,
            pca=PcaConfig(**sect("pca")),
            neighborhood=NeighborhoodConfig(**sect("neighborhood")),
            quantiles=QuantileConfig(**sect("quantiles")),
            network=NetworkConfig(
                edge_threshold=net.get("edge_threshold", 30.0),
                statistics=tuple(stats) if stats else None,
                decay_delta=net.get("decay_delta", 0.5),
                kpath_k=net.get("kpath_k", 3),
                aggregate=net.get("aggregate", "center"),
            ),
            assembly=AssemblyConfig(**sect("assembly")),
            embedding=EmbeddingConfig(**sect("embedding")),
            cluster=ClusterConfig(**sect("cluster")),
            output_dir=str(raw.get("output_dir", "out")),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            yaml.safe_dump(self.to_dict(), sort_keys=True), encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        return cls.from_dict(raw)


def apply_overrides(config: PipelineConfig, overrides: list[str]) -> PipelineConfig:
    """Apply `section.key=value` strings on top of a config; values parse as YAML."""
    raw = config.to_dict()
    for item in overrides:
        if "=" not in item:
            raise SchemaError(f"override must look like section.key=value, got {item!r}")
        dotted, value = item.split("=", 1)
        keys = dotted.strip().split(".")
        node = raw
        for key in keys[:-1]:
            if key not in node or not isinstance(node[key], dict):
                raise SchemaError(f"unknown config key: {dotted!r}")
            node = node[key]
        if keys[-1] not in node:
            raise SchemaError(f"unknown config key: {dotted!r}")
        node[keys[-1]] = yaml.safe_load(value)
    return PipelineConfig.from_dict(raw)
