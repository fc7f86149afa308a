"""Run manifests: a strict JSON schema and the agent factories built from it."""

from __future__ import annotations

import functools
import json
from pathlib import Path
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import game
from .agents import RandomCodemaster, RandomGuesser, Script, ScriptedCodemaster, ScriptedGuesser
from .embeddings import (
    EmbeddingModel,
    VvParams,
    WordVectorCodemaster,
    WordVectorGuesser,
    combine_models,
    default_candidate_pool,
    load_embeddings,
)
from .game import Mode, Team
from .llm import PROMPT_VERSION, ChatClient, LlmCodemaster, LlmEndpointConfig, LlmGuesser
from .tournament import AgentSpec, ConfigError, TournamentSpec


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class EmbeddingAgentConfig(_Strict):
    kind: Literal["embedding"]
    name: str
    # one path, or two paths for the concatenated model
    vectors: str | list[str]
    format: Literal["auto", "text", "binary"] = "auto"
    threshold: float | None = 0.7
    margin: float = 0.0
    max_targets: int = Field(9, ge=1)
    pool_size: int | None = Field(20_000, ge=1)


class LlmAgentConfig(_Strict):
    kind: Literal["llm"]
    name: str | None = None
    endpoint: LlmEndpointConfig
    prune_invalid: bool = False


class ScriptedAgentConfig(_Strict):
    kind: Literal["scripted"]
    name: str = "scripted"
    script: str


class RandomAgentConfig(_Strict):
    kind: Literal["random"]
    name: str = "random"
    max_count: int = Field(3, ge=0)
    stop_probability: float = Field(0.3, ge=0.0, le=1.0)


AgentConfig = Annotated[
    Union[EmbeddingAgentConfig, LlmAgentConfig, ScriptedAgentConfig, RandomAgentConfig],
    Field(discriminator="kind"),
]


class TeamConfig(_Strict):
    codemaster: AgentConfig
    guesser: AgentConfig


class SeedRange(_Strict):
    start: int = Field(0, ge=0)
    stop: int = Field(100, ge=0)

    def seeds(self) -> list[int]:
        return list(range(self.start, self.stop))


class OutputConfig(_Strict):
    dir: str = "runs"
    records: str = "records.jsonl"
    summary_csv: str = "summary.csv"
    table: str = "summary.txt"
    curve_csv: str = "curve.csv"


class RunConfig(_Strict):
    mode: Mode = Mode.SINGLE
    red: TeamConfig
    blue: TeamConfig | None = None
    wordlist: str | None = None
    seeds: SeedRange | list[Annotated[int, Field(ge=0)]] = Field(default_factory=SeedRange)
    workers: int = Field(1, ge=1)
    output: OutputConfig = Field(default_factory=OutputConfig)
    prompt_version: str = PROMPT_VERSION
    record_timing: bool = True
    # relative paths resolve against this; set by load_config
    base_dir: Path = Field(default=Path("."), exclude=True)

    @model_validator(mode="after")
    def _check_teams(self) -> "RunConfig":
        if self.mode is Mode.TWO and self.blue is None:
            raise ValueError("mode 'two' needs a 'blue' team")
        return self

    def seed_list(self) -> list[int]:
        return self.seeds.seeds() if isinstance(self.seeds, SeedRange) else list(self.seeds)

    def resolve(self, path: str | Path) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self.base_dir / path

    def output_path(self, name: str, out_dir: str | Path | None = None) -> Path:
        base = Path(out_dir) if out_dir is not None else self.resolve(self.output.dir)
        return base / getattr(self.output, name)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    try:
        return RunConfig.model_validate({**raw, "base_dir": path.parent})
    except ValidationError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


# --- building agents ----------------------------------------------------------


@functools.lru_cache(maxsize=8)
def _cached_model(paths: tuple[Path, ...], format: str) -> EmbeddingModel:
    models = [load_embeddings(p, format) for p in paths]
    model = models[0]
    for other in models[1:]:
        model = combine_models(model, other)
    return model


def _embedding_factory(cfg: EmbeddingAgentConfig, run: RunConfig, role: str):
    paths = [cfg.vectors] if isinstance(cfg.vectors, str) else cfg.vectors
    model = _cached_model(tuple(run.resolve(p) for p in paths), cfg.format)
    if role == "guesser":
        guesser = WordVectorGuesser(model, name=cfg.name)  # stateless, safe to share
        return lambda team, seed: guesser
    params = VvParams(cfg.threshold, default_candidate_pool(model, cfg.pool_size),
                      cfg.max_targets, cfg.margin)
    codemaster = WordVectorCodemaster(model, params, name=cfg.name)
    return lambda team, seed: codemaster


def _llm_factory(cfg: LlmAgentConfig, run: RunConfig, role: str):
    cfg.endpoint.api_key()  # missing key fails here, before any game
    cls = LlmCodemaster if role == "codemaster" else LlmGuesser

    def make(team: Team, seed: int):
        return cls(ChatClient(cfg.endpoint), run.mode, team.value,
                   version=run.prompt_version, prune_invalid=cfg.prune_invalid, name=cfg.name)

    return make


def _scripted_factory(cfg: ScriptedAgentConfig, run: RunConfig, role: str):
    path = run.resolve(cfg.script)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        Script.from_dict(raw)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"bad script file {path}: {exc}") from exc

    def make(team: Team, seed: int):
        script = Script.from_dict(raw, seed)
        if role == "codemaster":
            return ScriptedCodemaster(script.clues, name=cfg.name)
        return ScriptedGuesser(script.guesses, script.continues, name=cfg.name)

    return make


def _random_factory(cfg: RandomAgentConfig, run: RunConfig, role: str):
    offset = 0 if role == "codemaster" else 1

    def make(team: Team, seed: int):
        agent_seed = (seed << 2) | (offset << 1) | (team is Team.BLUE)
        if role == "codemaster":
            return RandomCodemaster(agent_seed, cfg.max_count, name=cfg.name)
        return RandomGuesser(agent_seed, cfg.stop_probability, name=cfg.name)

    return make


_FACTORIES = {
    "embedding": _embedding_factory,
    "llm": _llm_factory,
    "scripted": _scripted_factory,
    "random": _random_factory,
}


def agent_spec(cfg, run: RunConfig, role: str) -> AgentSpec:
    factory = _FACTORIES[cfg.kind](cfg, run, role)
    name = cfg.name or getattr(getattr(cfg, "endpoint", None), "model", cfg.kind)
    return AgentSpec(name, factory)


def _team(team: TeamConfig, run: RunConfig) -> tuple[AgentSpec, AgentSpec]:
    return agent_spec(team.codemaster, run, "codemaster"), agent_spec(team.guesser, run, "guesser")


def build_wordlist(run: RunConfig) -> list[str]:
    return game.load_wordlist(run.resolve(run.wordlist) if run.wordlist else None)


def build_spec(run: RunConfig, seeds: list[int] | None = None) -> TournamentSpec:
    """Load vectors, check credentials and scripts; everything fails here or not at all."""
    return TournamentSpec(
        mode=run.mode,
        seeds=run.seed_list() if seeds is None else seeds,
        wordlist=build_wordlist(run),
        red=_team(run.red, run),
        blue=_team(run.blue, run) if run.mode is Mode.TWO and run.blue else None,
        workers=run.workers,
        record_timing=run.record_timing,
    )
