"""Zero-shot LLM feature scoring.

One prompt per feature carries its descriptor and the task context. The
backend answers with a number; anything that is not a number in [0, 1] (or
no answer at all) becomes the neutral score 0.5. Scores are cached on disk
keyed by a digest of model name and prompt text.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import httpx
import numpy as np

from llmfs.data import Dataset
from llmfs.errors import BackendUnreachable, MalformedResponseBody, SingleClassDataset
from llmfs.selection import ScoreVector, top_k
from llmfs.stats import SAMPLES_PER_CLASS, FeatureDescriptor, describe_feature, feature_seed

log = logging.getLogger(__name__)

FALLBACK_SCORE = 0.5
PRUNED_SCORE = -1.0
API_KEY_ENV = "LLMFS_API_KEY"

DEFAULT_TASK = "classify whether a given file is malware (1) or benign (0)"

PROMPT_TEMPLATE = (
    "You are assisting with a binary malware-detection task: {task}.\n"
    "Feature name: {name}\n"
    "Global statistics: mean={mu}, std={sigma}, median={median}, min={min}, max={max}, IQR={iqr}\n"
    "Class-conditional: malware_mean={mu_pos}, benign_mean={mu_neg}, malware_std={sigma_pos}, "
    "benign_std={sigma_neg}, mean_difference={delta_mu}\n"
    "Representative samples: malware={samples_pos}, benign={samples_neg}\n"
    "Respond with a single number between 0 and 1 indicating the importance of this feature "
    "for the classification task. Output only the number."
)


@dataclass(frozen=True)
class TaskContext:
    text: str = DEFAULT_TASK

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("task context must be non-empty")


@dataclass(frozen=True)
class Prompt:
    text: str
    feature_index: int


@dataclass(frozen=True)
class LlmConfig:
    backend_kind: str = "mock"
    endpoint_url: str = "http://127.0.0.1:8000/v1/chat/completions"
    model_name: str = "mock-separation"
    temperature: float = 0.0
    timeout: float = 30.0
    max_retries: int = 3
    max_parallel: int = 4
    cache_path: str | None = None
    backoff_base: float = 0.5

    def __post_init__(self):
        if self.backend_kind not in ("http", "mock"):
            raise ValueError(f"unknown backend {self.backend_kind!r}")
        if self.temperature != 0:
            raise ValueError("decoding must be deterministic: temperature is fixed at 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.max_parallel < 1:
            raise ValueError("max_parallel must be >= 1")


@dataclass(frozen=True)
class RawResponse:
    content: str
    latency: float = 0.0
    from_cache: bool = False


class Backend(Protocol):
    def complete(self, prompt_text: str) -> str: ...


def _num(v: float) -> str:
    return format(float(v), "#.6g")


def build_prompt(desc: FeatureDescriptor, ctx: TaskContext = TaskContext(), feature_index: int = -1) -> Prompt:
    text = PROMPT_TEMPLATE.format(
        task=ctx.text,
        name=desc.name,
        mu=_num(desc.mu),
        sigma=_num(desc.sigma),
        median=_num(desc.median),
        min=_num(desc.min),
        max=_num(desc.max),
        iqr=_num(desc.iqr),
        mu_pos=_num(desc.mu_pos),
        mu_neg=_num(desc.mu_neg),
        sigma_pos=_num(desc.sigma_pos),
        sigma_neg=_num(desc.sigma_neg),
        delta_mu=_num(desc.delta_mu),
        samples_pos="[" + ", ".join(_num(v) for v in desc.samples_pos) + "]",
        samples_neg="[" + ", ".join(_num(v) for v in desc.samples_neg) + "]",
    )
    return Prompt(text, feature_index)


_NUMBER = re.compile(r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?")


def parse_score(resp: RawResponse | str) -> float:
    """First number in the content if it lies in [0, 1], else the neutral 0.5."""
    try:
        content = resp if isinstance(resp, str) else resp.content
        m = _NUMBER.search(content)
        if m is None:
            return FALLBACK_SCORE
        value = float(m.group())
        if 0.0 <= value <= 1.0:
            return value
    except Exception:  # noqa: BLE001 - parsing is total by contract
        pass
    return FALLBACK_SCORE


def mock_score(desc: FeatureDescriptor) -> float:
    """Standardized class separation squashed into [0, 1)."""
    sep = abs(desc.delta_mu)
    return sep / (desc.sigma_pos + desc.sigma_neg + sep + 1e-9)


_PROMPT_FIELD = r"{}=([-+0-9.eEinfa]+)"


class MockBackend:
    """Offline, deterministic stand-in for a chat model.

    Reads the class-conditional fields back out of the prompt text and
    answers with :func:`mock_score` formatted to six decimals.
    """

    def __init__(self):
        self.calls = 0
        self._lock = threading.Lock()

    def complete(self, prompt_text: str) -> str:
        with self._lock:
            self.calls += 1
        values = {}
        for key in ("malware_std", "benign_std", "mean_difference"):
            m = re.search(_PROMPT_FIELD.format(key), prompt_text)
            if m is None:
                return "I cannot score this feature."
            values[key] = float(m.group(1))
        sep = abs(values["mean_difference"])
        score = sep / (values["malware_std"] + values["benign_std"] + sep + 1e-9)
        return f"{score:.6f}"


class HttpBackend:
    """OpenAI-compatible chat-completions client with exponential backoff."""

    def __init__(self, cfg: LlmConfig, client: httpx.Client | None = None):
        self.cfg = cfg
        self.calls = 0
        self._lock = threading.Lock()
        self._client = client or httpx.Client(timeout=cfg.timeout)

    def close(self) -> None:
        self._client.close()

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(API_KEY_ENV)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def complete(self, prompt_text: str) -> str:
        payload = {
            "model": self.cfg.model_name,
            "messages": [{"role": "user", "content": prompt_text}],
            "temperature": 0,
        }
        last: Exception | None = None
        for attempt in range(self.cfg.max_retries + 1):
            if attempt:
                time.sleep(self.cfg.backoff_base * 2 ** (attempt - 1))
            with self._lock:
                self.calls += 1
            try:
                resp = self._client.post(self.cfg.endpoint_url, json=payload, headers=self._headers())
            except httpx.HTTPError as exc:
                last = exc
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last = RuntimeError(f"HTTP {resp.status_code}")
                continue
            if resp.status_code >= 400:
                raise BackendUnreachable(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                content = resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise MalformedResponseBody(f"unexpected body: {resp.text[:200]}") from exc
            if not isinstance(content, str):
                raise MalformedResponseBody("choices[0].message.content is not a string")
            return content
        raise BackendUnreachable(f"{self.cfg.endpoint_url}: {last}")


def make_backend(cfg: LlmConfig) -> Backend:
    return HttpBackend(cfg) if cfg.backend_kind == "http" else MockBackend()


def prompt_digest(model_name: str, prompt_text: str) -> str:
    return hashlib.sha256((model_name + "\n" + prompt_text).encode("utf-8")).hexdigest()


class ScoreCache:
    """Append-only ``<sha256-hex>\\t<score>`` file; an in-memory dict when no path is given."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self.entries: dict[str, float] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    parts = line.rstrip("\n").split("\t")
                    if len(parts) != 2 or len(parts[0]) != 64:
                        continue
                    try:
                        score = float(parts[1])
                    except ValueError:
                        continue
                    if 0.0 <= score <= 1.0:
                        self.entries[parts[0]] = score

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, digest: str) -> float | None:
        with self._lock:
            return self.entries.get(digest)

    def put(self, digest: str, score: float) -> None:
        if not 0.0 <= score <= 1.0:
            raise ValueError(f"cache score {score} outside [0, 1]")
        with self._lock:
            if digest in self.entries:
                return
            self.entries[digest] = score
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(f"{digest}\t{score!r}\n")


def query(
    prompt: Prompt,
    cfg: LlmConfig,
    backend: Backend | None = None,
    cache: ScoreCache | None = None,
) -> RawResponse:
    """Ask the backend about one prompt, consulting and filling the cache.

    Raises BackendUnreachable / MalformedResponseBody; nothing is cached then.
    """
    digest = prompt_digest(cfg.model_name, prompt.text)
    if cache is not None:
        hit = cache.get(digest)
        if hit is not None:
            return RawResponse(repr(hit), 0.0, True)
    backend = backend if backend is not None else make_backend(cfg)
    t0 = time.monotonic()
    content = backend.complete(prompt.text)
    resp = RawResponse(content, time.monotonic() - t0, False)
    if cache is not None:
        cache.put(digest, parse_score(resp))
    return resp


@dataclass
class LlmRunStats:
    requested: int = 0
    cache_hits: int = 0
    fallbacks: int = 0
    backend_failures: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def bump(self, **kw: int) -> None:
        with self._lock:
            for k, v in kw.items():
                setattr(self, k, getattr(self, k) + v)

    def as_dict(self) -> dict[str, float]:
        n = max(self.requested, 1)
        return {
            "requested": self.requested,
            "cache_hits": self.cache_hits,
            "fallbacks": self.fallbacks,
            "backend_failures": self.backend_failures,
            "fallback_rate": self.fallbacks / n,
            "cache_hit_rate": self.cache_hits / n,
        }


def _score_indices(
    train: Dataset,
    indices: Sequence[int],
    cfg: LlmConfig,
    ctx: TaskContext,
    seed: int,
    backend: Backend | None,
    cache: ScoreCache | None,
    samples_per_class: int,
) -> tuple[np.ndarray, LlmRunStats]:
    if not train.has_both_classes():
        raise SingleClassDataset("LLM scoring needs both classes in the training split")
    backend = backend if backend is not None else make_backend(cfg)
    if cache is None:
        cache = ScoreCache(cfg.cache_path)
    stats = LlmRunStats()

    def one(j: int) -> float:
        desc = describe_feature(train, j, samples_per_class, feature_seed(seed, j))
        prompt = build_prompt(desc, ctx, j)
        stats.bump(requested=1)
        try:
            resp = query(prompt, cfg, backend, cache)
        except (BackendUnreachable, MalformedResponseBody) as exc:
            log.warning("feature %s: %s; using neutral score", desc.name, exc)
            stats.bump(fallbacks=1, backend_failures=1)
            return FALLBACK_SCORE
        if resp.from_cache:
            stats.bump(cache_hits=1)
        if not _valid(resp.content):
            stats.bump(fallbacks=1)
        return parse_score(resp)

    if cfg.max_parallel > 1 and len(indices) > 1:
        with ThreadPoolExecutor(max_workers=cfg.max_parallel) as pool:
            scores = list(pool.map(one, indices))
    else:
        scores = [one(j) for j in indices]
    return np.asarray(scores, dtype=np.float64), stats


def _valid(content: str) -> bool:
    m = _NUMBER.search(content)
    if m is None:
        return False
    try:
        return 0.0 <= float(m.group()) <= 1.0
    except ValueError:
        return False


def score_all_features(
    train: Dataset,
    cfg: LlmConfig = LlmConfig(),
    ctx: TaskContext = TaskContext(),
    seed: int = 0,
    *,
    backend: Backend | None = None,
    cache: ScoreCache | None = None,
    samples_per_class: int = SAMPLES_PER_CLASS,
) -> ScoreVector:
    """Score every feature of ``train``; results are ordered by feature index."""
    indices = list(range(train.n_features))
    scores, stats = _score_indices(train, indices, cfg, ctx, seed, backend, cache, samples_per_class)
    info = stats.as_dict()
    log.info("llm scoring (%s): %s", cfg.model_name, json.dumps(info))
    return ScoreVector(scores, "llm", info=info)


def prefilter_rerank(
    train: Dataset,
    prefilter: ScoreVector,
    m: int,
    cfg: LlmConfig = LlmConfig(),
    ctx: TaskContext = TaskContext(),
    seed: int = 0,
    *,
    backend: Backend | None = None,
    cache: ScoreCache | None = None,
    samples_per_class: int = SAMPLES_PER_CLASS,
) -> ScoreVector:
    """LLM-score only the prefilter's top ``m`` features; the rest get -1."""
    survivors = top_k(prefilter, m).indices
    scores, stats = _score_indices(
        train, survivors, cfg, ctx, seed, backend, cache, samples_per_class
    )
    full = np.full(train.n_features, PRUNED_SCORE)
    full[list(survivors)] = scores
    info = stats.as_dict()
    info["prefilter"] = prefilter.method_name
    info["m"] = m
    log.info("llm re-ranking of %s top-%d: %s", prefilter.method_name, m, json.dumps(info))
    return ScoreVector(full, "llm_prefilter", info=info)
