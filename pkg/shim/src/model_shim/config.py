"""Server configuration and pluggable model-mode providers."""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Mapping, Sequence

ENDPOINTS = ("ner", "nli", "generate", "embed")
MODES = ("deterministic", "model")


def load_gazetteer(path: str | Path) -> dict[str, str]:
    table: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            surface, label = line.split("\t")
        except ValueError as exc:
            raise ValueError(f"{path}: line {lineno}: expected 'surface<TAB>label'") from exc
        table[surface] = label
    return table


def load_lemma_table(path: str | Path) -> dict[str, str]:
    table: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            token, lemma = line.split("\t")
        except ValueError as exc:
            raise ValueError(f"{path}: line {lineno}: expected 'token<TAB>lemma'") from exc
        table[token.lower()] = lemma.lower()
    return table


def bundled_gazetteer() -> dict[str, str]:
    data = resources.files("model_shim").joinpath("data/gazetteer.tsv")
    table: dict[str, str] = {}
    for line in data.read_text(encoding="utf-8").splitlines():
        if line.strip() and not line.startswith("#"):
            surface, label = line.split("\t")
            table[surface] = label
    return table


@dataclass(frozen=True)
class ShimConfig:
    """One mode per endpoint; deterministic mode needs no network or models."""

    modes: Mapping[str, str] = field(
        default_factory=lambda: {name: "deterministic" for name in ENDPOINTS}
    )
    port: int = 8700
    embed_dim: int = 64
    gazetteer_path: str = ""   # empty -> bundled gazetteer
    lemma_table_path: str = ""  # consumed by model-mode providers, not the
                                # deterministic routes

    def __post_init__(self) -> None:
        unknown = set(self.modes) - set(ENDPOINTS)
        if unknown:
            raise ValueError(f"unknown endpoints in modes: {sorted(unknown)}")
        for name, mode in self.modes.items():
            if mode not in MODES:
                raise ValueError(f"endpoint {name}: unknown mode {mode!r}")
        if self.embed_dim < 1:
            raise ValueError("embed_dim must be >= 1")

    def mode(self, endpoint: str) -> str:
        return self.modes.get(endpoint, "deterministic")


@dataclass(frozen=True)
class Providers:
    """Optional real-model callables for endpoints running in model mode.

    Signatures mirror the wire protocols: ner(sentences) -> per-sentence
    entity dicts; nli(pairs) -> score dicts; generate(messages, params) ->
    completion text; embed(sentences) -> vectors.
    """

    ner: Callable[[Sequence[str]], list[list[dict]]] | None = None
    nli: Callable[[Sequence[tuple[str, str]]], list[dict]] | None = None
    generate: Callable[[Sequence[dict], dict], str] | None = None
    embed: Callable[[Sequence[str]], list[list[float]]] | None = None
