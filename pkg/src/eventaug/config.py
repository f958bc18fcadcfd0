"""Pipeline configuration: one YAML file, flags override fields."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import yaml

from .curate import DiscardPolicy
from .enrich import EnrichPolicy
from .generate import AgentConfig
from .validate import PairCounts, Thresholds

DEFAULT_NER_LABELS = ("PER", "ORG", "GPE", "LOC", "FAC", "DATE", "TIME", "MONEY")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EndpointConfig:
    mode: str = "stub"  # stub | http
    url: str = ""
    timeout: float = 10.0
    retries: int = 2

    def __post_init__(self) -> None:
        if self.mode not in ("stub", "http"):
            raise ConfigError(f"endpoint mode must be stub or http, got {self.mode!r}")
        if self.mode == "http" and not self.url:
            raise ConfigError("http endpoint requires a url")


@dataclass(frozen=True)
class IndexSettings:
    normalization: str = "lemmatized"
    path: str = ""  # defaults to <workdir>/corpus.idx


@dataclass(frozen=True)
class RetrievalSettings:
    limit: int = 5
    sample: bool = False
    ner_batch_size: int = 16
    concurrency: int = 1


@dataclass(frozen=True)
class EnrichmentSettings:
    policy: str = "add_or_replace"
    replace_probability: float = 1.0
    max_variants: int = 3

    def as_policy(self) -> EnrichPolicy:
        return EnrichPolicy(mode=self.policy, replace_probability=self.replace_probability)


@dataclass(frozen=True)
class GenerationSettings:
    agent: str = "stub"
    samples_per_structure: int = 1
    negative_kinds: tuple[str, ...] = (
        "negative",
        "believed",
        "hypothetical",
        "promised",
        "desired",
    )
    rewrite_requires_validated_parent: bool = True


@dataclass(frozen=True)
class ValidationSettings:
    accuracy_threshold: float = 0.5
    coherence_threshold: float = 0.5
    polarity_adjusted_templates: bool = True
    fail_mode: str = "closed"
    batch_size: int = 32
    concurrency: int = 1
    pair_counts: tuple[int, int, int] = (8, 4, 4)

    def thresholds(self) -> Thresholds:
        return Thresholds(accuracy=self.accuracy_threshold, coherence=self.coherence_threshold)

    def counts(self) -> PairCounts:
        return PairCounts(*self.pair_counts)


@dataclass(frozen=True)
class CurationSettings:
    n: int = 4
    k: int = 2
    epochs: int = 3
    base_batch: int = 8
    gen_batch: int = 8
    discard_metric: str = "cosine"
    discard_mode: str = "quantile"
    discard_value: float = 0.9

    def discard_policy(self) -> DiscardPolicy:
        return DiscardPolicy(
            metric=self.discard_metric, mode=self.discard_mode, value=self.discard_value
        )


@dataclass(frozen=True)
class PipelineConfig:
    ontology: str = ""
    corpus: str = ""
    base_data: str = ""
    novel_data: str = ""
    workdir: str = "out"
    seed: int = 42
    ner_labels: tuple[str, ...] = DEFAULT_NER_LABELS
    gazetteer: str = ""  # required by the stub NER endpoint
    embed_dim: int = 64
    index: IndexSettings = field(default_factory=IndexSettings)
    retrieval: RetrievalSettings = field(default_factory=RetrievalSettings)
    enrichment: EnrichmentSettings = field(default_factory=EnrichmentSettings)
    generation: GenerationSettings = field(default_factory=GenerationSettings)
    validation: ValidationSettings = field(default_factory=ValidationSettings)
    curation: CurationSettings = field(default_factory=CurationSettings)
    agents: Mapping[str, AgentConfig] = field(default_factory=dict)
    endpoints: Mapping[str, EndpointConfig] = field(default_factory=dict)

    def endpoint(self, name: str) -> EndpointConfig:
        return self.endpoints.get(name, EndpointConfig())

    def agent_config(self, name: str) -> AgentConfig:
        if name == "stub":
            return self.agents.get("stub", AgentConfig(name="stub", kind="stub"))
        if name not in self.agents:
            raise ConfigError(f"agent {name!r} is not configured")
        return self.agents[name]

    def index_path(self) -> Path:
        if self.index.path:
            return Path(self.index.path)
        return Path(self.workdir) / "corpus.idx"


def _build(cls, raw: Mapping[str, Any], where: str):
    fields = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
    unknown = set(raw) - fields
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    coerced = {}
    for key, value in raw.items():
        if isinstance(value, list):
            value = tuple(value)
        coerced[key] = value
    try:
        return cls(**coerced)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def config_from_mapping(raw: Mapping[str, Any]) -> PipelineConfig:
    data = dict(raw)
    sections = {
        "index": IndexSettings,
        "retrieval": RetrievalSettings,
        "enrichment": EnrichmentSettings,
        "generation": GenerationSettings,
        "validation": ValidationSettings,
        "curation": CurationSettings,
    }
    for key, cls in sections.items():
        if key in data:
            data[key] = _build(cls, data[key] or {}, key)
    if "agents" in data:
        data["agents"] = {
            name: _build(AgentConfig, {"name": name, **(cfg or {})}, f"agents.{name}")
            for name, cfg in (data["agents"] or {}).items()
        }
    if "endpoints" in data:
        data["endpoints"] = {
            name: _build(EndpointConfig, cfg or {}, f"endpoints.{name}")
            for name, cfg in (data["endpoints"] or {}).items()
        }
    return _build(PipelineConfig, data, "config")


def load_config(path: str | Path, overrides: Mapping[str, Any] | None = None) -> PipelineConfig:
    """Load YAML config; overrides (typically CLI flags) replace top-level fields."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(raw, Mapping):
        raise ConfigError(f"{path}: config must be a mapping")
    config = config_from_mapping(raw)
    if overrides:
        cleaned = {k: v for k, v in overrides.items() if v is not None}
        if cleaned:
            config = replace(config, **cleaned)
    return config


def config_snapshot(config: PipelineConfig) -> dict[str, Any]:
    """JSON-able copy of the effective configuration (for the run manifest)."""
    import dataclasses

    def convert(value: Any) -> Any:
        if dataclasses.is_dataclass(value) and not isinstance(value, type):
            return {k: convert(v) for k, v in dataclasses.asdict(value).items()}
        if isinstance(value, Mapping):
            return {k: convert(v) for k, v in value.items()}
        if isinstance(value, tuple):
            return [convert(v) for v in value]
        return value

    return convert(config)
