"""Pipeline configuration: TOML loading and content digests."""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from emphst.backends import BackendConfig
from emphst.instruct.prompts import DEFAULT_EXPERT_PROMPT, DEFAULT_JUDGE_PROMPT

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    experts: tuple[BackendConfig, ...]
    judge: BackendConfig
    expert_prompt: str = DEFAULT_EXPERT_PROMPT
    judge_prompt: str = DEFAULT_JUDGE_PROMPT
    worker_budget: int = 8
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.experts:
            raise ConfigError("pipeline needs at least one expert")
        ids = [e.id for e in self.experts] + [self.judge.id]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"backend ids must be unique, got {ids}")
        if self.worker_budget < 1:
            raise ConfigError("worker_budget must be >= 1")
        if "{source}" not in self.expert_prompt:
            raise ConfigError("expert prompt template must contain {source}")
        if "{source}" not in self.judge_prompt or "{candidates}" not in self.judge_prompt:
            raise ConfigError("judge prompt template must contain {source} and {candidates}")

    def digest(self) -> str:
        """Content hash of the fully resolved config (prompts inlined)."""
        payload = {
            "experts": [vars(e) for e in self.experts],
            "judge": vars(self.judge),
            "expert_prompt": self.expert_prompt,
            "judge_prompt": self.judge_prompt,
            "worker_budget": self.worker_budget,
            "seed": self.seed,
        }
        blob = json.dumps(payload, sort_keys=True, ensure_ascii=False).encode()
        return hashlib.sha256(blob).hexdigest()


def _backend_from_table(table: dict, kind: str, where: str) -> BackendConfig:
    try:
        return BackendConfig(
            id=table["id"],
            kind=table.get("kind", kind),
            endpoint=table["endpoint"],
            model=table.get("model", "default"),
            temperature=float(table.get("temperature", 0.0)),
            timeout=float(table.get("timeout", 30.0)),
            max_retries=int(table.get("max_retries", 2)),
            rate_limit=float(table.get("rate_limit", 8.0)),
        )
    except KeyError as exc:
        raise ConfigError(f"{where}: missing required key {exc.args[0]!r}") from exc
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _read_template(raw: dict, key: str, base: Path, default: str) -> str:
    path = raw.get(key)
    if path is None:
        return default
    resolved = base / path
    if not resolved.is_file():
        raise ConfigError(f"{key}: template file not found: {resolved}")
    return resolved.read_text(encoding="utf-8")


def _resolve_endpoint(table: dict, base: Path) -> dict:
    """Anchor relative mock lexicon/table file paths beside the config file."""
    endpoint = table.get("endpoint", "")
    for prefix in ("mock:lexicon:", "mock:table:"):
        if endpoint.startswith(prefix):
            table = dict(table)
            table["endpoint"] = prefix + str(base / endpoint[len(prefix):])
    return table


def load_pipeline_config(path: str | Path) -> PipelineConfig:
    """Load a pipeline TOML; relative template/lexicon paths resolve beside it."""
    path = Path(path)
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    base = path.parent

    expert_tables = raw.get("experts")
    if not isinstance(expert_tables, list) or not expert_tables:
        raise ConfigError("config needs a non-empty [[experts]] array")
    judge_table = raw.get("judge")
    if not isinstance(judge_table, dict):
        raise ConfigError("config needs a [judge] table")

    experts = tuple(
        _backend_from_table(_resolve_endpoint(t, base), "expert", f"experts[{i}]")
        for i, t in enumerate(expert_tables)
    )
    judge = _backend_from_table(_resolve_endpoint(judge_table, base), "judge", "[judge]")

    return PipelineConfig(
        experts=experts,
        judge=judge,
        expert_prompt=_read_template(raw, "expert_prompt_template", base, DEFAULT_EXPERT_PROMPT),
        judge_prompt=_read_template(raw, "judge_prompt_template", base, DEFAULT_JUDGE_PROMPT),
        worker_budget=int(raw.get("worker_budget", 8)),
        seed=int(raw.get("seed", 0)),
    )


def load_backend_tables(path: str | Path, *names: str) -> dict[str, BackendConfig]:
    """Load named backend tables (e.g. [judge], [s2tt], [tts]) from a TOML file."""
    path = Path(path)
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    out = {}
    for name in names:
        table = raw.get(name)
        if not isinstance(table, dict):
            raise ConfigError(f"config needs a [{name}] table")
        out[name] = _backend_from_table(_resolve_endpoint(table, path.parent), name, f"[{name}]")
    return out
