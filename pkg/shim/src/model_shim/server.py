"""FastAPI app exposing /ner, /nli, /v1/chat/completions, /embed, /healthz.

Deterministic mode answers every route as a pure function of the request
body. Model mode forwards to registered providers behind the same wire
formats.
"""
from __future__ import annotations

from typing import Any

from fastapi import FastAPI, HTTPException, Request

from .config import Providers, ShimConfig, bundled_gazetteer, load_gazetteer, load_lemma_table
from .heuristics import echo_completion, gazetteer_tag, hashed_embedding, overlap_entailment, tokenize


def _bad_request(reason: str) -> HTTPException:
    return HTTPException(status_code=400, detail=reason)


async def _json_body(request: Request) -> dict[str, Any]:
    try:
        body = await request.json()
    except Exception as exc:
        raise _bad_request(f"body is not valid JSON: {exc}") from exc
    if not isinstance(body, dict):
        raise _bad_request("body must be a JSON object")
    return body


def _string_list(body: dict[str, Any], key: str) -> list[str]:
    value = body.get(key)
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        raise _bad_request(f"{key!r} must be a list of strings")
    return value


def create_app(config: ShimConfig = ShimConfig(), providers: Providers | None = None) -> FastAPI:
    providers = providers or Providers()
    for name, provider in (
        ("ner", providers.ner),
        ("nli", providers.nli),
        ("generate", providers.generate),
        ("embed", providers.embed),
    ):
        if config.mode(name) == "model" and provider is None:
            raise ValueError(f"endpoint {name!r} is in model mode but no provider is registered")

    gazetteer = (
        load_gazetteer(config.gazetteer_path) if config.gazetteer_path else bundled_gazetteer()
    )
    # Loaded for model-mode providers that want it; the deterministic routes
    # never lemmatize, matching the pipeline's in-process stubs.
    lemma_table = (
        load_lemma_table(config.lemma_table_path) if config.lemma_table_path else {}
    )

    app = FastAPI(title="model-shim", version="0.1.0")
    app.state.config = config
    app.state.lemma_table = lemma_table

    @app.get("/healthz")
    async def healthz() -> dict[str, str]:
        return {"status": "ok"}

    @app.post("/ner")
    async def ner(request: Request) -> dict[str, Any]:
        body = await _json_body(request)
        sentences = _string_list(body, "sentences")
        if config.mode("ner") == "model":
            results = providers.ner(sentences)  # type: ignore[misc]
        else:
            results = [
                [
                    {"text": e.text, "label": e.label, "start": e.start, "end": e.end}
                    for e in gazetteer_tag(sentence, gazetteer)
                ]
                for sentence in sentences
            ]
        return {"results": results}

    @app.post("/nli")
    async def nli(request: Request) -> dict[str, Any]:
        body = await _json_body(request)
        pairs = body.get("pairs")
        if not isinstance(pairs, list):
            raise _bad_request("'pairs' must be a list")
        parsed: list[tuple[str, str]] = []
        for i, pair in enumerate(pairs):
            if (
                not isinstance(pair, dict)
                or not isinstance(pair.get("premise"), str)
                or not isinstance(pair.get("hypothesis"), str)
            ):
                raise _bad_request(f"pair {i} must carry string 'premise' and 'hypothesis'")
            parsed.append((pair["premise"], pair["hypothesis"]))
        if config.mode("nli") == "model":
            scores = providers.nli(parsed)  # type: ignore[misc]
        else:
            scores = []
            for premise, hypothesis in parsed:
                entail = overlap_entailment(premise, hypothesis)
                scores.append(
                    {"entail": entail, "neutral": 1.0 - entail, "contradict": 0.0}
                )
        return {"scores": scores}

    @app.post("/v1/chat/completions")
    async def chat_completions(request: Request) -> dict[str, Any]:
        body = await _json_body(request)
        messages = body.get("messages")
        if not isinstance(messages, list) or not messages:
            raise _bad_request("'messages' must be a nonempty list")
        contents = []
        for i, message in enumerate(messages):
            if not isinstance(message, dict) or not isinstance(message.get("content"), str):
                raise _bad_request(f"message {i} must carry string 'content'")
            contents.append(message["content"])
        prompt_text = " ".join(contents)
        if config.mode("generate") == "model":
            params = {k: body.get(k) for k in ("model", "temperature", "max_tokens")}
            completion = providers.generate(messages, params)  # type: ignore[misc]
        else:
            completion = echo_completion(prompt_text)
        return {
            "id": "shim-completion",
            "object": "chat.completion",
            "model": body.get("model") or "shim-echo",
            "choices": [
                {
                    "index": 0,
                    "finish_reason": "stop",
                    "message": {"role": "assistant", "content": completion},
                }
            ],
            "usage": {
                "prompt_tokens": len(tokenize(prompt_text)),
                "completion_tokens": len(tokenize(completion)),
                "total_tokens": len(tokenize(prompt_text)) + len(tokenize(completion)),
            },
        }

    @app.post("/embed")
    async def embed(request: Request) -> dict[str, Any]:
        body = await _json_body(request)
        sentences = _string_list(body, "sentences")
        if config.mode("embed") == "model":
            vectors = providers.embed(sentences)  # type: ignore[misc]
        else:
            vectors = [hashed_embedding(s, config.embed_dim) for s in sentences]
        return {"vectors": vectors}

    return app
