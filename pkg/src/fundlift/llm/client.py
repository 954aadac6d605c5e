"""LLM provider access: prompt rendering, disk cache, retries, mock provider.

The mock provider is a first-class citizen: it answers every prompt with
deterministic keyword rules so the whole pipeline runs offline and twice-run
outputs are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources as importlib_resources
from pathlib import Path

from ..errors import ProviderError, SchemaError

DEFAULT_MODEL_ID = "gpt-4-1106-preview"

_TRIPLE_QUOTED = re.compile(r'"""(.*?)"""', re.DOTALL)


def load_prompt(name: str) -> str:
    ref = importlib_resources.files("fundlift.llm") / "prompts" / f"{name}.txt"
    return ref.read_text(encoding="utf-8")


def render_prompt(name: str, **fields) -> str:
    return load_prompt(name).format(**fields)


@dataclass
class LlmClientConfig:
    provider: str = "mock"
    model_id: str = DEFAULT_MODEL_ID
    sampling_temperature: float = 0.0
    max_in_flight: int = 4
    retry_limit: int = 3
    cache_dir: str | None = None

    def __post_init__(self) -> None:
        if self.provider not in ("remote", "mock"):
            raise SchemaError(f"unknown LLM provider {self.provider!r}")
        if self.retry_limit < 1:
            raise SchemaError("retry_limit must be >= 1")
        if self.sampling_temperature < 0:
            raise SchemaError("sampling_temperature must be >= 0")


class MockProvider:
    """Deterministic rule-based stand-in for the chat-completion API.

    Prompt kind is recognized from distinctive template phrases; the campaign
    text is recovered from the (first) triple-quoted span.
    """

    # Keyword triggers for the 11 semantic flags.
    RULES = {
        "Employee mentioned": ("employee", "employees", "staff", "payroll", "our team"),
        "Rent mentioned": ("rent", "lease", "landlord"),
        "New business": ("newly opened", "just opened", "brand new business",
                         "new business", "recently opened", "startup"),
        "Match grant mentioned": ("will match", "matching grant", "matched by gofundme",
                                  "small business relief initiative"),
        "Gratitude expressed": ("thank you", "thanks", "grateful", "gratitude",
                                "we appreciate", "appreciate your"),
        "Urgency explained": ("urgent", "urgency", "urgently", "pressing",
                              "critical juncture", "running out of time"),
        "Social comparison (better than peers)": ("better than", "best in", "superior to",
                                                  "unlike other", "outperform"),
        "Self comparison (worse than before)": ("worse than before", "weaker than before",
                                                "not what it was", "once thrived",
                                                "compared to before"),
        "Extrinsic incentive": ("gift card", "thank-you gift", "free gift",
                                "small gift", "voucher"),
    }

    GRATITUDE_SENTENCE = (
        "We are sincerely grateful to every potential backer, and we thank you "
        "for your kindness and generous support."
    )
    MATCH_SENTENCE = (
        "If we can raise $500, GoFundMe's Small Business Relief Initiative will "
        "match $500 for our business, doubling the impact of your donation."
    )
    URGENCY_SENTENCE = (
        "The need for these funds is urgent, and timely help right now makes a "
        "pressing difference for our survival."
    )
    FILLER_WORDS = (
        "we keep offering the same careful service to our community with "
        "steady focus each day"
    )

    BUSINESS_WORDS = (
        "business", "shop", "store", "studio", "restaurant", "salon", "cafe",
        "bakery", "bake", "bar", "brewery", "boutique", "company", "farm", "gym",
        "diner", "bookstore", "school",
    )

    def complete(self, prompt: str, model_id: str, temperature: float) -> str:
        text = self._extract_text(prompt)
        if "Determine if the campaign is about a small business" in prompt:
            return self._validate(text)
        if "[Employee mentioned]" in prompt:
            return self._features(text)
        if "[correct_three]" in prompt:
            return self._augment(text)
        if "emotion-neutral words" in prompt:
            return self._extend(prompt, text)
        raise ProviderError("mock provider does not recognize this prompt")

    @staticmethod
    def _extract_text(prompt: str) -> str:
        m = _TRIPLE_QUOTED.search(prompt)
        return m.group(1) if m else ""

    def _validate(self, text: str) -> str:
        low = text.lower()
        business = any(w in low for w in self.BUSINESS_WORDS)
        out = {"business": business, "business_explanation": "keyword rule"}
        if not business:
            out["owner_support"] = "employee" in low
            out["owner_support_explanation"] = "keyword rule"
        return json.dumps(out)

    def _features(self, text: str) -> str:
        from .schema import FEATURE_FIELDS, NO_TAG, TAG_FIELD

        low = text.lower()
        out: dict[str, object] = {}
        for field, keywords in self.RULES.items():
            out[field] = any(k in low for k in keywords)
        out["Business longer than 2 years"] = bool(
            re.search(r"\b([2-9]|[1-9][0-9]+)\s+years\b", low)
            or "long history" in low or "decades" in low or "generations" in low
        )
        tag_match = re.search(r"#(\w+)", text)
        tag = f"#{tag_match.group(1)}" if tag_match else NO_TAG
        out[TAG_FIELD] = tag
        out["Small Business Specified"] = "smallbusiness" in tag.lower().replace("-", "")
        for field, explanation, _ in FEATURE_FIELDS:
            out[explanation] = f"keyword rule for {field}"
        return json.dumps(out)

    def _augment(self, text: str) -> str:
        from ..textfeat.tokenize import sentence_texts

        extra = f"{self.GRATITUDE_SENTENCE} {self.MATCH_SENTENCE} {self.URGENCY_SENTENCE}"
        sentences = sentence_texts(text)
        keywords = ("thank", "grateful", "gratitude", "appreciate")
        kept = [s for s in sentences if not any(k in s.lower() for k in keywords)]
        removed_any = len(kept) < len(sentences)
        minus = " ".join(kept) if removed_any else text
        return json.dumps({
            "correct_three": f"{text} {extra}",
            "add_gratitude": f"{text} {self.GRATITUDE_SENTENCE}",
            "minus_gratitude": minus,
        })

    def _extend(self, prompt: str, text: str) -> str:
        from ..textfeat.tokenize import sentence_texts

        m = re.search(r"add about (\d+) emotion-neutral words", prompt)
        target = int(m.group(1)) if m else 0
        sentences = sentence_texts(text)
        filler_words = self.FILLER_WORDS.split()
        n_sentences = max(1, round(target / len(filler_words)))
        filler = " ".join([" ".join(filler_words).capitalize() + "." for _ in range(n_sentences)])
        middle = " ".join(sentences[1:-1])
        parts = [sentences[0], middle, filler, sentences[-1]]
        return " ".join(p for p in parts if p)


class RemoteProvider:
    """Chat-completion HTTP provider; endpoint and key come from env vars."""

    ENDPOINT_ENV = "FUNDLIFT_LLM_ENDPOINT"
    API_KEY_ENV = "FUNDLIFT_LLM_API_KEY"

    def __init__(self, timeout: float = 60.0, backoff_base: float = 0.5):
        self.timeout = timeout
        self.backoff_base = backoff_base

    def complete(self, prompt: str, model_id: str, temperature: float) -> str:
        import httpx

        endpoint = os.environ.get(self.ENDPOINT_ENV, "https://api.openai.com/v1")
        api_key = os.environ.get(self.API_KEY_ENV) or os.environ.get("OPENAI_API_KEY")
        if not api_key:
            raise ProviderError(f"no API key in ${self.API_KEY_ENV}")
        payload = {
            "model": model_id,
            "temperature": temperature,
            "messages": [{"role": "user", "content": prompt}],
        }
        headers = {"Authorization": f"Bearer {api_key}"}
        try:
            resp = httpx.post(
                f"{endpoint.rstrip('/')}/chat/completions",
                json=payload, headers=headers, timeout=self.timeout,
            )
            resp.raise_for_status()
            return resp.json()["choices"][0]["message"]["content"]
        except Exception as e:  # noqa: BLE001 - normalized below
            raise ProviderError(f"provider request failed: {e}") from e


class LlmClient:
    """Caching, retrying front door to a provider."""

    def __init__(self, config: LlmClientConfig, provider=None):
        self.config = config
        if provider is not None:
            self.provider = provider
        elif config.provider == "mock":
            self.provider = MockProvider()
        else:
            self.provider = RemoteProvider()
        self.provider_calls = 0
        self._cache_lock = threading.Lock()
        self._backoff_base = 0.5

    # -- cache -------------------------------------------------------------

    def cache_key(self, prompt: str) -> str:
        payload = f"{prompt}\x00{self.config.model_id}\x00{self.config.sampling_temperature!r}"
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def _cache_path(self, key: str) -> Path | None:
        if not self.config.cache_dir:
            return None
        return Path(self.config.cache_dir) / key[:2] / f"{key}.txt"

    def _cache_read(self, key: str) -> str | None:
        path = self._cache_path(key)
        if path and path.exists():
            return path.read_text(encoding="utf-8")
        return None

    def _cache_write(self, key: str, reply: str) -> None:
        path = self._cache_path(key)
        if not path:
            return
        with self._cache_lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(reply, encoding="utf-8")
            tmp.replace(path)

    # -- calls ---------------------------------------------------------------

    def _call_provider(self, prompt: str) -> str:
        last: Exception | None = None
        for attempt in range(self.config.retry_limit):
            try:
                self.provider_calls += 1
                return self.provider.complete(
                    prompt, self.config.model_id, self.config.sampling_temperature
                )
            except ProviderError as e:
                last = e
                if attempt + 1 < self.config.retry_limit:
                    time.sleep(self._backoff_base * (2 ** attempt))
        raise ProviderError(
            f"provider failed after {self.config.retry_limit} attempts: {last}"
        )

    def complete(self, prompt: str, bypass_cache: bool = False) -> str:
        """Cached completion: hit returns stored bytes, miss calls the provider."""
        key = self.cache_key(prompt)
        if not bypass_cache:
            cached = self._cache_read(key)
            if cached is not None:
                return cached
        reply = self._call_provider(prompt)
        self._cache_write(key, reply)
        return reply

    def complete_json(self, prompt: str, validate=None, bypass_cache: bool = False) -> dict:
        """Completion parsed as JSON; an invalid reply is retried exactly once."""
        reply = self.complete(prompt, bypass_cache=bypass_cache)
        for attempt in (0, 1):
            try:
                parsed = json.loads(reply)
                if not isinstance(parsed, dict):
                    raise SchemaError("reply is not a JSON object")
                if validate is not None:
                    validate(parsed)
                return parsed
            except (json.JSONDecodeError, SchemaError) as e:
                if attempt == 1:
                    raise SchemaError(f"invalid reply after retry: {e}") from e
                reply = self.complete(prompt, bypass_cache=True)
        raise AssertionError("unreachable")

    def map_ordered(self, fn, items):
        """Apply ``fn`` concurrently (bounded by max_in_flight), keep input order."""
        if self.config.max_in_flight <= 1 or len(items) <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.config.max_in_flight) as pool:
            return list(pool.map(fn, items))
