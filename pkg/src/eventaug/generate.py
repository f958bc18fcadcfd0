"""Generation-agent clients and candidate-sentence packaging.

Agents speak the chat-completions wire protocol or run as the in-process
deterministic stub. Every produced sentence is wrapped in a GeneratedExample
carrying full provenance (prompt hash, source structure, context, parent)
and time/token accounting.
"""
from __future__ import annotations

import logging
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any, Mapping, NamedTuple, Protocol, Sequence

import requests

from .clients import ClientError, RetryPolicy, post_json
from .enrich import EnrichedStructure, enriched_from_record, enriched_to_record
from .prompts import (
    DEFAULT_PROMPT_CONFIG,
    POSITIVE,
    REWRITE_KINDS,
    GenerationPrompt,
    PromptConfig,
    build_rewrite_prompt,
)
from .text import first_sentence, tokenize

if TYPE_CHECKING:
    from .validate import ValidationVerdict

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AgentConfig:
    name: str = "stub"
    kind: str = "stub"  # stub | http
    base_url: str = ""
    model: str = ""
    api_key_env: str = "OPENAI_API_KEY"
    temperature: float = 0.7
    max_tokens: int = 128
    timeout: float = 30.0
    retries: int = 2
    concurrency: int = 1
    min_interval_s: float = 0.0
    price_per_1k_prompt_usd: float = 0.0
    price_per_1k_completion_usd: float = 0.0


class AgentReply(NamedTuple):
    text: str
    prompt_tokens: int
    completion_tokens: int
    elapsed_s: float


class GenerationAgent(Protocol):
    name: str
    config: AgentConfig

    def complete(self, prompt: GenerationPrompt) -> AgentReply: ...


@dataclass(frozen=True)
class GeneratedExample:
    id: str
    sentence: str
    polarity: str
    source: EnrichedStructure | None
    agent: str
    prompt_hash: str
    parent_id: str | None = None
    elapsed_s: float = 0.0
    prompt_tokens: int = 0
    completion_tokens: int = 0
    cost_usd: float = 0.0
    error: str | None = None
    verdict: "ValidationVerdict | None" = None

    @property
    def context(self):
        """The context candidate that enriched the source structure, if any."""
        return self.source.context if self.source is not None else None

    @property
    def failed(self) -> bool:
        return self.error is not None

    def with_verdict(self, verdict: "ValidationVerdict") -> "GeneratedExample":
        return replace(self, verdict=verdict)


# ---------------------------------------------------------------------------
# Deterministic stub agent

_REWRITE_SENT_RE = re.compile(
    r"Given the generated sentence(?: you provide)?, ['\"](.*?)['\"], change it into",
    re.DOTALL,
)
_REWRITE_KIND_MARKERS = (
    ("negative expression", "negative"),
    ("believed event sentence", "believed"),
    ("hypothetical event sentence", "hypothetical"),
    ("promised event sentence", "promised"),
    ("Desired event sentence", "desired"),
)
_TEMPLATE_RE = re.compile(r"Event trigger is (.+?)\.\s+(.*)$", re.DOTALL)

_REWRITE_FRAMES = {
    "negative": "It did not happen that {sent}",
    "believed": "It is believed that {sent}",
    "hypothetical": "Hypothetically, it could happen that {sent}",
    "promised": "It was promised that {sent}",
    "desired": "They desired that {sent}",
}

_FALLBACK_SENTENCE = "No event information was provided."


def deterministic_completion(prompt_text: str) -> str:
    """Pure text-to-text rule used by the stub agent (and mirrored by the shim).

    Rewrite prompts get a fixed polarity frame around the embedded sentence;
    positive prompts echo the filled argument template with the trigger
    appended. Only the prompt text is consulted, so any client that renders
    the same prompt gets the same completion.
    """
    sent_match = _REWRITE_SENT_RE.search(prompt_text)
    if sent_match:
        sentence = sent_match.group(1)
        for marker, kind in _REWRITE_KIND_MARKERS:
            if marker in prompt_text:
                return _REWRITE_FRAMES[kind].format(sent=sentence)
        return sentence
    template_match = _TEMPLATE_RE.search(prompt_text)
    if template_match:
        trigger = template_match.group(1)
        passage = template_match.group(2).strip().rstrip(".")
        return f'{passage}, triggered by "{trigger}".'
    return _FALLBACK_SENTENCE


class StubAgent:
    """Offline agent: canned responses by prompt hash, else the echo rule.

    A pure function of the prompt, so pipelines running against it are
    reproducible byte-for-byte. Reported latency is always zero.
    """

    def __init__(
        self,
        config: AgentConfig | None = None,
        canned: Mapping[str, str] | None = None,
    ):
        self.config = config or AgentConfig(name="stub", kind="stub")
        self.name = self.config.name
        self.canned = dict(canned or {})

    def complete(self, prompt: GenerationPrompt) -> AgentReply:
        text = self.canned.get(prompt.content_hash())
        if text is None:
            text = deterministic_completion(prompt.text)
        return AgentReply(
            text=text,
            prompt_tokens=len(tokenize(prompt.text)),
            completion_tokens=len(tokenize(text)),
            elapsed_s=0.0,
        )


# ---------------------------------------------------------------------------
# HTTP chat-completions agent


class HttpChatAgent:
    """POST /v1/chat/completions against any endpoint speaking the protocol."""

    def __init__(self, config: AgentConfig, session: requests.Session | None = None):
        if not config.base_url:
            raise ValueError("http agent requires base_url")
        self.config = config
        self.name = config.name
        self.url = config.base_url.rstrip("/") + "/v1/chat/completions"
        self.session = session or requests.Session()
        self._lock = threading.Lock()
        self._last_call = 0.0

    def _throttle(self) -> None:
        if self.config.min_interval_s <= 0:
            return
        with self._lock:
            wait = self.config.min_interval_s - (time.monotonic() - self._last_call)
            if wait > 0:
                time.sleep(wait)
            self._last_call = time.monotonic()

    def complete(self, prompt: GenerationPrompt) -> AgentReply:
        import os

        messages = []
        if prompt.system_preamble:
            messages.append({"role": "system", "content": prompt.system_preamble})
        messages.append({"role": "user", "content": prompt.user_message})
        payload = {
            "model": self.config.model,
            "messages": messages,
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
        }
        key = os.environ.get(self.config.api_key_env, "")
        if key:
            self.session.headers["Authorization"] = f"Bearer {key}"
        self._throttle()
        started = time.monotonic()
        body = post_json(
            self.session,
            self.url,
            payload,
            timeout=self.config.timeout,
            retry=RetryPolicy(retries=0),  # generate() owns the retry loop
        )
        elapsed = time.monotonic() - started
        try:
            text = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ClientError(f"{self.url}: malformed completion body: {exc}") from exc
        usage = body.get("usage") or {}
        return AgentReply(
            text=text or "",
            prompt_tokens=int(usage.get("prompt_tokens", 0)),
            completion_tokens=int(usage.get("completion_tokens", 0)),
            elapsed_s=elapsed,
        )


def make_agent(config: AgentConfig, canned: Mapping[str, str] | None = None) -> GenerationAgent:
    if config.kind == "stub":
        return StubAgent(config, canned)
    if config.kind == "http":
        return HttpChatAgent(config)
    raise ValueError(f"unknown agent kind {config.kind!r}")


# ---------------------------------------------------------------------------
# Generation ops


def _clean_completion(text: str) -> str:
    text = text.strip()
    while len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        text = text[1:-1].strip()
    return first_sentence(text).strip()


def _example_cost(config: AgentConfig, prompt_tokens: int, completion_tokens: int) -> float:
    return (
        prompt_tokens / 1000.0 * config.price_per_1k_prompt_usd
        + completion_tokens / 1000.0 * config.price_per_1k_completion_usd
    )


def generate(
    prompt: GenerationPrompt,
    agent: GenerationAgent,
    example_id: str | None = None,
    parent_id: str | None = None,
) -> GeneratedExample:
    """Run one prompt; retry malformed/empty completions, never raise.

    After config.retries re-attempts the example is returned marked failed
    (error recorded, empty sentence) so one bad call cannot abort a batch.
    """
    source = prompt.source if isinstance(prompt.source, EnrichedStructure) else None
    example_id = example_id or f"{prompt.kind}-{prompt.content_hash()[:16]}"
    attempts = agent.config.retries + 1
    elapsed = 0.0
    prompt_tokens = 0
    completion_tokens = 0
    error: str | None = None
    sentence = ""
    for attempt in range(attempts):
        try:
            reply = agent.complete(prompt)
        except ClientError as exc:
            error = str(exc)
            log.warning("generation attempt %d/%d failed: %s", attempt + 1, attempts, exc)
            continue
        elapsed += reply.elapsed_s
        prompt_tokens += reply.prompt_tokens
        completion_tokens += reply.completion_tokens
        sentence = _clean_completion(reply.text)
        if sentence:
            error = None
            break
        error = "empty completion"
    if error is not None:
        sentence = ""
    return GeneratedExample(
        id=example_id,
        sentence=sentence,
        polarity=prompt.kind,
        source=source,
        agent=agent.name,
        prompt_hash=prompt.content_hash(),
        parent_id=parent_id,
        elapsed_s=elapsed,
        prompt_tokens=prompt_tokens,
        completion_tokens=completion_tokens,
        cost_usd=_example_cost(agent.config, prompt_tokens, completion_tokens),
        error=error,
    )


def generate_many(
    prompts: Sequence[tuple[GenerationPrompt, str]],
    agent: GenerationAgent,
    concurrency: int | None = None,
) -> list[GeneratedExample]:
    """Generate (prompt, example_id) pairs, results in request order."""
    workers = concurrency if concurrency is not None else agent.config.concurrency
    if workers > 1 and len(prompts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda p: generate(p[0], agent, example_id=p[1]), prompts))
    return [generate(p, agent, example_id=eid) for p, eid in prompts]


def generate_negative_set(
    parent: GeneratedExample,
    kinds: Sequence[str],
    agent: GenerationAgent,
    prompts: PromptConfig = DEFAULT_PROMPT_CONFIG,
) -> list[GeneratedExample]:
    """Rewrite a positive generation into the requested polarity kinds.

    Children carry the parent id and inherit the parent's source structure
    (validation judges them against the same event). Per-child failures are
    isolated: a failed child is returned marked failed, others are unaffected.
    """
    if parent.polarity != POSITIVE:
        raise ValueError("negative augmentation requires a positive parent")
    if parent.failed or not parent.sentence:
        raise ValueError(f"parent {parent.id} has no usable sentence")
    ordered = [k for k in REWRITE_KINDS if k in set(kinds)]
    unknown = set(kinds) - set(REWRITE_KINDS)
    if unknown:
        raise ValueError(f"unknown rewrite kinds: {sorted(unknown)}")
    children: list[GeneratedExample] = []
    for kind in ordered:
        prompt = build_rewrite_prompt(kind, parent.sentence, prompts)
        child = generate(
            prompt,
            agent,
            example_id=f"{parent.id}-{kind}",
            parent_id=parent.id,
        )
        child = replace(child, source=parent.source)
        children.append(child)
    return children


# ---------------------------------------------------------------------------
# Cost accounting


@dataclass(frozen=True)
class CostRow:
    agent: str
    sentences: int
    mean_time_s: float
    mean_cost_usd: float


@dataclass(frozen=True)
class CostSummary:
    rows: tuple[CostRow, ...]

    def to_records(self) -> list[dict[str, Any]]:
        return [
            {
                "agent": r.agent,
                "sentences": r.sentences,
                "time_per_sentence_s": r.mean_time_s,
                "cost_per_sentence_usd": r.mean_cost_usd,
            }
            for r in self.rows
        ]

    def render_table(self) -> str:
        lines = [f"{'Model':<24}{'Time/Sentence(s)':>18}{'Cost/Sentence($)':>18}"]
        for r in self.rows:
            lines.append(f"{r.agent:<24}{r.mean_time_s:>18.4f}{r.mean_cost_usd:>18.6f}")
        return "\n".join(lines)


def cost_report(examples: Sequence[GeneratedExample]) -> CostSummary:
    """Mean time and cost per sentence, per agent."""
    by_agent: dict[str, list[GeneratedExample]] = {}
    for e in examples:
        by_agent.setdefault(e.agent, []).append(e)
    rows = []
    for agent in sorted(by_agent):
        group = by_agent[agent]
        n = len(group)
        rows.append(
            CostRow(
                agent=agent,
                sentences=n,
                mean_time_s=sum(e.elapsed_s for e in group) / n,
                mean_cost_usd=sum(e.cost_usd for e in group) / n,
            )
        )
    return CostSummary(rows=tuple(rows))


# ---------------------------------------------------------------------------
# Provenance serialization


def example_to_record(e: GeneratedExample) -> dict[str, Any]:
    from .validate import verdict_to_record  # local import to avoid a cycle

    return {
        "id": e.id,
        "sentence": e.sentence,
        "polarity": e.polarity,
        "source": None if e.source is None else enriched_to_record(e.source),
        "agent": e.agent,
        "prompt_hash": e.prompt_hash,
        "parent_id": e.parent_id,
        "elapsed_s": e.elapsed_s,
        "prompt_tokens": e.prompt_tokens,
        "completion_tokens": e.completion_tokens,
        "cost_usd": e.cost_usd,
        "error": e.error,
        "verdict": None if e.verdict is None else verdict_to_record(e.verdict),
    }


def example_from_record(rec: Mapping[str, Any]) -> GeneratedExample:
    from .validate import verdict_from_record

    source = rec.get("source")
    verdict = rec.get("verdict")
    return GeneratedExample(
        id=str(rec["id"]),
        sentence=str(rec["sentence"]),
        polarity=str(rec["polarity"]),
        source=None if source is None else enriched_from_record(source),
        agent=str(rec["agent"]),
        prompt_hash=str(rec["prompt_hash"]),
        parent_id=rec.get("parent_id"),
        elapsed_s=float(rec.get("elapsed_s", 0.0)),
        prompt_tokens=int(rec.get("prompt_tokens", 0)),
        completion_tokens=int(rec.get("completion_tokens", 0)),
        cost_usd=float(rec.get("cost_usd", 0.0)),
        error=rec.get("error"),
        verdict=None if verdict is None else verdict_from_record(verdict),
    )
