"""Prompt assembly and pluggable text-generation backends.

Three prompt kinds exist: the world-update call that predicts changes, the
narrator call that turns grounded outcomes into prose, and the supervised
item-generation call. Prompts are plain text with tracked byte spans so
tests can check sections; generation goes through a backend chosen by
configuration — a deterministic scripted stand-in for tests and offline
play, or a real HTTP completion endpoint.
"""

from __future__ import annotations

import importlib.resources
import os
import time
from collections import deque
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Callable, Mapping, Protocol, Sequence

import httpx

from .render import RenderedState, render_changes

PROMPT_UPDATE = "world-update"
PROMPT_NARRATOR = "narrator"
PROMPT_ITEM = "item-generation"
PROMPT_KINDS = (PROMPT_UPDATE, PROMPT_NARRATOR, PROMPT_ITEM)

# world-update wants reproducible reasoning; the creative calls want style
DEFAULT_TEMPERATURES = {PROMPT_UPDATE: 0.0, PROMPT_NARRATOR: 0.7, PROMPT_ITEM: 0.7}

DEFAULT_FEWSHOT_RESOURCE = "fewshot.txt"


class ConfigError(ValueError):
    """Backend configuration is unusable."""


class EmptyInputError(ValueError):
    """The player input is empty after trimming."""


class GenerationError(RuntimeError):
    """The backend failed to produce a completion."""


class ScriptExhaustedError(GenerationError):
    """The scripted backend ran out of canned responses."""


class FewshotFormatError(ValueError):
    """The few-shot example file cannot be parsed."""


@dataclass(frozen=True)
class Span:
    """Byte range [start, end) into the UTF-8 encoding of a prompt."""

    start: int
    end: int


@dataclass(frozen=True)
class PromptBundle:
    kind: str
    text: str
    sections: Mapping[str, Span]

    def section_text(self, name: str) -> str:
        span = self.sections[name]
        return self.text.encode("utf-8")[span.start : span.end].decode("utf-8")


@dataclass(frozen=True)
class FewshotExample:
    rendering: str
    input: str
    output: str


@dataclass(frozen=True)
class GenerationResult:
    text: str
    attempts: int


class _Assembler:
    """Accumulates prompt text while tracking byte offsets of named sections."""

    def __init__(self) -> None:
        self._parts: list[str] = []
        self._pos = 0
        self._sections: dict[str, Span] = {}

    def add(self, text: str, section: str | None = None) -> None:
        size = len(text.encode("utf-8"))
        if section is not None:
            self._sections[section] = Span(self._pos, self._pos + size)
        self._parts.append(text)
        self._pos += size

    def bundle(self, kind: str) -> PromptBundle:
        return PromptBundle(kind=kind, text="".join(self._parts), sections=dict(self._sections))


_UPDATE_INSTRUCTIONS = """\
You are the world-update engine of a work of interactive fiction. Given the
current state of the fictional world and the player's message, predict the
changes the world undergoes once the player's action plays out.

Answer only with change instructions, one per line, in exactly these forms
(keep the double quotes and use the exact names from the world state):
MOVE "<character>" TO "<location>"
TAKE "<item>" BY "<character>"
DROP "<item>" BY "<character>"
GIVE "<item>" FROM "<character>" TO "<character>"
UNBLOCK "<location>" FROM "<location>"
NONE

Characters can only move to connecting locations, take items lying in their
current location, drop or give items they carry, and unblock a blocked
location when the fiction justifies it. If nothing about the world changes,
answer with the single line NONE.
"""

_NARRATOR_INSTRUCTIONS = """\
You are the narrator of a work of interactive fiction. Tell the player the
outcome of their turn in second person, present tense, in a few sentences.
Stay strictly faithful to the outcome report below: outcomes listed as
rejected did not happen and must not be narrated as successes, and you must
not invent items, characters or passages that the world state does not
mention.
"""

_ITEM_INSTRUCTIONS = """\
You are inventing one new item for a work of interactive fiction. Answer
with a single JSON object and nothing else, with exactly these keys:
  "name": a short non-empty string, not already used by another item
  "descriptions": a non-empty array of non-empty strings, each an
    independent sentence about the item
  "gettable": true if a character could pick the item up, else false
"""


def _require_input(user_input: str) -> None:
    if not user_input.strip():
        raise EmptyInputError("player input is empty")


def build_update_prompt(
    rendered: RenderedState, user_input: str, fewshot: Sequence[FewshotExample]
) -> PromptBundle:
    """Compose the change-prediction prompt: instructions, scoped world
    rendering, few-shot examples, then the player's words."""
    _require_input(user_input)
    asm = _Assembler()
    asm.add(_UPDATE_INSTRUCTIONS, section="instructions")
    asm.add("\nCurrent world state:\n")
    asm.add(rendered.text, section="world")
    asm.add("\n\nExamples:\n")
    example_parts = []
    for example in fewshot:
        example_parts.append(
            f"World state:\n{example.rendering}\nPlayer: {example.input}\nChanges:\n{example.output}\n"
        )
    asm.add("\n".join(example_parts), section="examples")
    asm.add("\nNow the real turn.\nPlayer: ")
    asm.add(user_input, section="input")
    asm.add("\nChanges (answer only with instructions in the forms above):\n")
    return asm.bundle(PROMPT_UPDATE)


def build_narrator_prompt(
    rendered: RenderedState, applied, rejected, user_input: str
) -> PromptBundle:
    """Compose the narration prompt from the turn's grounded outcomes."""
    _require_input(user_input)
    outcome_text = render_changes(applied, rejected)
    if not outcome_text:
        outcome_text = "Nothing in the world changed."
    asm = _Assembler()
    asm.add(_NARRATOR_INSTRUCTIONS, section="instructions")
    asm.add("\nWorld state at the start of the turn:\n")
    asm.add(rendered.text, section="world")
    asm.add("\n\nOutcome report:\n")
    asm.add(outcome_text, section="outcomes")
    asm.add("\n\nThe player said: ")
    asm.add(user_input, section="input")
    asm.add("\nNarration:\n")
    return asm.bundle(PROMPT_NARRATOR)


def build_item_prompt(rendered: RenderedState, brief: str = "") -> PromptBundle:
    """Compose the item-generation prompt; the brief is appended verbatim."""
    asm = _Assembler()
    asm.add(_ITEM_INSTRUCTIONS, section="instructions")
    asm.add("\nThe item will appear in this place:\n")
    asm.add(rendered.text, section="world")
    if brief.strip():
        asm.add("\n\nDesign brief: ")
        asm.add(brief, section="input")
    asm.add("\n\nJSON object:\n")
    return asm.bundle(PROMPT_ITEM)


# ---------------------------------------------------------------------------
# Few-shot example file: blocks separated by a line of ---, each with
# RENDERING / INPUT / OUTPUT sections.

_SECTION_HEADERS = ("RENDERING:", "INPUT:", "OUTPUT:")


def parse_fewshot(text: str) -> tuple[FewshotExample, ...]:
    examples: list[FewshotExample] = []
    block: dict[str, list[str]] = {}
    current: str | None = None

    def finish() -> None:
        nonlocal block, current
        if not block:
            current = None
            return
        missing = [h[:-1] for h in _SECTION_HEADERS if h[:-1] not in block]
        if missing:
            raise FewshotFormatError(f"example block is missing sections: {missing}")
        examples.append(
            FewshotExample(
                rendering="\n".join(block["RENDERING"]).strip(),
                input="\n".join(block["INPUT"]).strip(),
                output="\n".join(block["OUTPUT"]).strip(),
            )
        )
        block = {}
        current = None

    for raw in text.splitlines():
        line = raw.rstrip()
        if line.strip() == "---":
            finish()
            continue
        if not block and current is None and line.lstrip().startswith("#"):
            continue
        if line in _SECTION_HEADERS:
            current = line[:-1]
            block.setdefault(current, [])
            continue
        if current is not None:
            block[current].append(line)
        elif line.strip():
            raise FewshotFormatError(f"text outside any example section: {line!r}")
    finish()
    if not examples:
        raise FewshotFormatError("no example blocks found")
    return tuple(examples)


def load_fewshot(path: str | Path) -> tuple[FewshotExample, ...]:
    return parse_fewshot(Path(path).read_text(encoding="utf-8"))


def default_fewshot() -> tuple[FewshotExample, ...]:
    text = (
        importlib.resources.files("fabular")
        .joinpath("data", DEFAULT_FEWSHOT_RESOURCE)
        .read_text(encoding="utf-8")
    )
    return parse_fewshot(text)


# ---------------------------------------------------------------------------
# Backends


@dataclass(frozen=True)
class BackendConfig:
    """How to reach the text-generation module.

    ``credential_env`` names the environment variable holding the API key;
    the key value itself never lives in configuration, logs or reports.
    ``temperature`` of None means per-kind defaults (0 for world-update,
    0.7 for the creative calls).
    """

    kind: str = "scripted"
    endpoint: str = ""
    model: str = ""
    temperature: float | None = None
    timeout: float = 30.0
    max_retries: int = 2
    credential_env: str = ""
    provider: str = "generic"

    def validate(self) -> None:
        if self.kind not in ("scripted", "http"):
            raise ConfigError(f"unknown backend kind {self.kind!r}")
        if self.temperature is not None and not 0.0 <= self.temperature <= 1.0:
            raise ConfigError("temperature must be within [0, 1]")
        if self.timeout <= 0:
            raise ConfigError("timeout must be positive")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be >= 0")
        if self.kind == "http":
            if not self.endpoint:
                raise ConfigError("http backend requires an endpoint")
            if not self.credential_env:
                raise ConfigError("http backend requires credential_env naming the API key variable")
            if self.provider not in PROVIDER_ADAPTERS:
                raise ConfigError(f"unknown provider {self.provider!r}")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "BackendConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            config = cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        config.validate()
        return config

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "endpoint": self.endpoint,
            "model": self.model,
            "temperature": self.temperature,
            "timeout": self.timeout,
            "max_retries": self.max_retries,
            "credential_env": self.credential_env,
            "provider": self.provider,
        }


def effective_temperature(config: BackendConfig, kind: str) -> float:
    if config.temperature is not None:
        return config.temperature
    return DEFAULT_TEMPERATURES.get(kind, 0.0)


class Backend(Protocol):
    def generate(self, prompt: PromptBundle) -> GenerationResult: ...


class ScriptedBackend:
    """Deterministic stand-in for the LLM: replays canned responses per kind.

    With it, an entire session is a pure function of (world, inputs, script).
    """

    def __init__(self, script: Mapping[str, Sequence[str]]):
        unknown = set(script) - set(PROMPT_KINDS)
        if unknown:
            raise ConfigError(f"script has unknown prompt kinds: {sorted(unknown)}")
        self._queues: dict[str, deque[str]] = {
            kind: deque(script.get(kind, ())) for kind in PROMPT_KINDS
        }

    def remaining(self, kind: str) -> int:
        return len(self._queues[kind])

    def generate(self, prompt: PromptBundle) -> GenerationResult:
        queue = self._queues.get(prompt.kind)
        if queue is None:
            raise ScriptExhaustedError(f"script has no responses for kind {prompt.kind!r}")
        if not queue:
            raise ScriptExhaustedError(f"script ran out of {prompt.kind!r} responses")
        return GenerationResult(text=queue.popleft(), attempts=1)


def _extract_generic(data: Any) -> str:
    if isinstance(data, dict) and isinstance(data.get("text"), str):
        return data["text"]
    raise GenerationError("malformed backend response: expected an object with a \"text\" string")


# One adapter per provider, selected via BackendConfig.provider. Each maps
# the provider's completion-response JSON to plain text.
PROVIDER_ADAPTERS: dict[str, Callable[[Any], str]] = {
    "generic": _extract_generic,
}


class HttpBackend:
    """Blocking HTTP completion client with timeout and retry-on-transient-failure."""

    def __init__(
        self,
        config: BackendConfig,
        client: httpx.Client | None = None,
        retry_delay: float = 0.2,
    ):
        config.validate()
        if config.kind != "http":
            raise ConfigError("HttpBackend requires kind='http'")
        self._config = config
        self._client = client or httpx.Client()
        self._retry_delay = retry_delay

    def _credential(self) -> str:
        value = os.environ.get(self._config.credential_env, "")
        if not value:
            raise ConfigError(
                f"environment variable {self._config.credential_env!r} is not set"
            )
        return value

    def generate(self, prompt: PromptBundle) -> GenerationResult:
        credential = self._credential()  # fail before any network traffic
        payload = {
            "model": self._config.model,
            "prompt": prompt.text,
            "temperature": effective_temperature(self._config, prompt.kind),
        }
        adapter = PROVIDER_ADAPTERS[self._config.provider]
        attempts = self._config.max_retries + 1
        last_error: Exception | None = None
        for attempt in range(1, attempts + 1):
            try:
                response = self._client.post(
                    self._config.endpoint,
                    json=payload,
                    headers={"Authorization": f"Bearer {credential}"},
                    timeout=self._config.timeout,
                )
            except httpx.TransportError as exc:
                last_error = exc
                if attempt < attempts and self._retry_delay:
                    time.sleep(self._retry_delay)
                continue
            if response.status_code >= 500:
                last_error = GenerationError(f"backend returned status {response.status_code}")
                if attempt < attempts and self._retry_delay:
                    time.sleep(self._retry_delay)
                continue
            if response.status_code >= 400:
                raise GenerationError(f"backend rejected the request: status {response.status_code}")
            try:
                data = response.json()
            except ValueError as exc:
                raise GenerationError("backend response is not JSON") from exc
            return GenerationResult(text=adapter(data), attempts=attempt)
        raise GenerationError(
            f"backend unreachable after {attempts} attempts: {last_error}"
        ) from last_error


def make_backend(
    config: BackendConfig,
    script: Mapping[str, Sequence[str]] | None = None,
    client: httpx.Client | None = None,
) -> Backend:
    config.validate()
    if config.kind == "scripted":
        if script is None:
            raise ConfigError("scripted backend requires a script")
        return ScriptedBackend(script)
    return HttpBackend(config, client=client)


def generate(
    config: BackendConfig,
    prompt: PromptBundle,
    script: Mapping[str, Sequence[str]] | None = None,
    client: httpx.Client | None = None,
) -> GenerationResult:
    """One-shot convenience: build the configured backend and call it."""
    return make_backend(config, script=script, client=client).generate(prompt)
