"""
RunConfig: the single JSON document that describes a run.

- Reads the default thread count from .env / the environment
- Parses a config dict (or JSON file) on top of built-in defaults
- Validates every field against the schema tables, collecting all problems with
  their field paths before raising one ConfigError
- Converts dB fields to linear exactly once, when PlayerModels are built

Precedence: defaults < config file < command-line flags (applied by the CLI
through `override`).
"""

import copy
import json
import logging
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from dotenv import load_dotenv

from channel_models import MODELS, NAKAGAMI, RAYLEIGH, RICIAN, GainDistribution, PlayerModel
from errors import ConfigError, GameError
from io_tables import FORMATS

logger = logging.getLogger(__name__)


# LOAD ENV

load_dotenv()

THREADS_ENV = "INTERFERENCE_GAME_THREADS"


def default_threads() -> int:
    raw = os.getenv(THREADS_ENV, "1").strip()
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigError([(THREADS_ENV, f"must be an integer (got '{raw}')")])
    if threads < 1:
        raise ConfigError([(THREADS_ENV, f"must be >= 1 (got {threads})")])
    return threads


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


# -------------------------
# DEFAULTS
# -------------------------
def _default_player() -> Dict[str, Any]:
    return {
        "direct": {"model": RAYLEIGH, "mean_db": 0.0, "shape": None},
        "cross": {"model": RAYLEIGH, "mean_db": 0.0, "shape": None},
        "power_db": 20.0,
    }


DEFAULTS: Dict[str, Any] = {
    "players": [_default_player(), _default_player()],
    "solver": {"grid": 2000, "tol": 1e-10},
    "montecarlo": {"trials": 100_000, "seed": 42, "threads": None},
    "output": {"format": "csv", "path": None},
}


# -------------------------
# SCHEMA
# -------------------------
LINK_SCHEMA = {
    "required_columns": {"model", "mean_db"},
    "optional_columns": {"shape"},
    "floats": {"mean_db", "shape"},
    "allow_nulls": {"shape"},
    "allowed_values": {"model": set(MODELS)},
    "min_values": {},
    "max_values": {"mean_db": 100.0},
}

PLAYER_SCHEMA = {
    "required_columns": {"direct", "cross", "power_db"},
    "optional_columns": set(),
    "floats": {"power_db"},
    "allow_nulls": set(),
    "allowed_values": {},
    "min_values": {"power_db": -100.0},
    "max_values": {"power_db": 200.0},
}

SECTION_SCHEMAS = {
    "solver": {
        "required_columns": set(),
        "optional_columns": {"grid", "tol"},
        "ints": {"grid"},
        "floats": {"tol"},
        "allow_nulls": set(),
        "allowed_values": {},
        "min_values": {"grid": 100, "tol": 0.0},
        "max_values": {"tol": 1e-3},
    },
    "montecarlo": {
        "required_columns": set(),
        "optional_columns": {"trials", "seed", "threads"},
        "ints": {"trials", "seed", "threads"},
        "floats": set(),
        "allow_nulls": {"threads"},
        "allowed_values": {},
        "min_values": {"trials": 1, "seed": 0, "threads": 1},
        "max_values": {},
    },
    "output": {
        "required_columns": set(),
        "optional_columns": {"format", "path"},
        "strings": {"format", "path"},
        "allow_nulls": {"path"},
        "allowed_values": {"format": set(FORMATS)},
        "min_values": {},
        "max_values": {},
    },
}


# -------------------------
# VALIDATION HELPERS
# -------------------------
Problems = List[Tuple[str, str]]


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def validate_keys(path: str, section: Any, schema: dict, problems: Problems) -> bool:
    if not isinstance(section, dict):
        problems.append((path, f"expected an object, got {type(section).__name__}"))
        return False
    known = schema["required_columns"] | schema["optional_columns"]
    for key in sorted(schema["required_columns"] - set(section)):
        problems.append((f"{path}.{key}", "missing required field"))
    for key in sorted(set(section) - known):
        problems.append((f"{path}.{key}", "unknown field"))
    return True


def validate_types(path: str, section: dict, schema: dict, problems: Problems) -> None:
    nullable = schema.get("allow_nulls", set())
    for key, value in section.items():
        where = f"{path}.{key}"
        if value is None:
            if key not in nullable:
                problems.append((where, "must not be null"))
            continue
        if key in schema.get("ints", set()) and not (_is_number(value) and float(value).is_integer()):
            problems.append((where, f"expected an integer, got {value!r}"))
        elif key in schema.get("floats", set()) and not _is_number(value):
            problems.append((where, f"expected a number, got {value!r}"))
        elif key in schema.get("strings", set()) and not isinstance(value, str):
            problems.append((where, f"expected a string, got {value!r}"))


def validate_allowed_values(path: str, section: dict, schema: dict, problems: Problems) -> None:
    for key, allowed in schema.get("allowed_values", {}).items():
        value = section.get(key)
        if value is not None and value not in allowed:
            problems.append((f"{path}.{key}", f"must be one of {sorted(allowed)}, got {value!r}"))


def validate_ranges(path: str, section: dict, schema: dict, problems: Problems) -> None:
    for key, lo in schema.get("min_values", {}).items():
        value = section.get(key)
        if _is_number(value) and value < lo:
            problems.append((f"{path}.{key}", f"must be >= {lo}, got {value}"))
    for key, hi in schema.get("max_values", {}).items():
        value = section.get(key)
        if _is_number(value) and value > hi:
            problems.append((f"{path}.{key}", f"must be <= {hi}, got {value}"))


def validate_section(path: str, section: Any, schema: dict, problems: Problems) -> None:
    if validate_keys(path, section, schema, problems):
        validate_types(path, section, schema, problems)
        validate_allowed_values(path, section, schema, problems)
        validate_ranges(path, section, schema, problems)


def validate_link(path: str, link: Any, problems: Problems) -> None:
    validate_section(path, link, LINK_SCHEMA, problems)
    if not isinstance(link, dict):
        return
    model, shape = link.get("model"), link.get("shape")
    if model == RAYLEIGH and shape is not None:
        problems.append((f"{path}.shape", "rayleigh takes no shape parameter"))
    elif model in (NAKAGAMI, RICIAN) and shape is None:
        problems.append((f"{path}.shape", f"{model} needs a shape parameter (m or K)"))
    elif model in (NAKAGAMI, RICIAN) and _is_number(shape):
        # let the distribution itself report the admissible range
        try:
            GainDistribution(model, 1.0, float(shape))
        except GameError as e:
            problems.append((f"{path}.shape", str(e)))


def validate_config(doc: Any) -> Problems:
    problems: Problems = []
    if not isinstance(doc, dict):
        return [("$", "config must be a JSON object")]

    for key in sorted(set(doc) - set(DEFAULTS)):
        problems.append((key, "unknown section"))

    players = doc.get("players")
    if not isinstance(players, list) or len(players) != 2:
        problems.append(("players", "exactly two players are required"))
    else:
        for idx, player in enumerate(players):
            path = f"players[{idx}]"
            validate_section(path, player, PLAYER_SCHEMA, problems)
            if isinstance(player, dict):
                for link in ("direct", "cross"):
                    if link in player:
                        validate_link(f"{path}.{link}", player[link], problems)

    for name, schema in SECTION_SCHEMAS.items():
        validate_section(name, doc.get(name, {}), schema, problems)
    return problems


# -------------------------
# TYPED CONFIG
# -------------------------
@dataclass(frozen=True)
class RunConfig:
    doc: Dict[str, Any]

    @property
    def grid(self) -> int:
        return int(self.doc["solver"]["grid"])

    @property
    def tol(self) -> float:
        return float(self.doc["solver"]["tol"])

    @property
    def trials(self) -> int:
        return int(self.doc["montecarlo"]["trials"])

    @property
    def seed(self) -> int:
        return int(self.doc["montecarlo"]["seed"])

    @property
    def threads(self) -> int:
        threads = self.doc["montecarlo"]["threads"]
        return default_threads() if threads is None else int(threads)

    @property
    def output_format(self) -> str:
        return self.doc["output"]["format"]

    @property
    def output_path(self) -> Optional[str]:
        return self.doc["output"]["path"]

    def player_models(self) -> Tuple[PlayerModel, PlayerModel]:
        return tuple(_player_model(p) for p in self.doc["players"])

    def to_dict(self) -> Dict[str, Any]:
        return copy.deepcopy(self.doc)


def _link(link: Dict[str, Any]) -> GainDistribution:
    shape = link.get("shape")
    return GainDistribution(link["model"], db_to_linear(float(link["mean_db"])), None if shape is None else float(shape))


def _player_model(player: Dict[str, Any]) -> PlayerModel:
    return PlayerModel(
        direct=_link(player["direct"]),
        cross=_link(player["cross"]),
        power_scale=db_to_linear(float(player["power_db"])),
    )


def _merge(base: Dict[str, Any], doc: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in doc.items():
        if key in merged and isinstance(merged[key], dict) and isinstance(value, dict):
            merged[key].update(copy.deepcopy(value))
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def parse_config(doc: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Defaults overlaid with `doc`, validated as a whole."""
    if doc is not None and not isinstance(doc, dict):
        raise ConfigError([("$", "config must be a JSON object")])
    merged = _merge(DEFAULTS, doc or {})
    problems = validate_config(merged)
    if problems:
        raise ConfigError(problems)
    return RunConfig(merged)


def load_config(path: Union[str, Path, None]) -> RunConfig:
    if path is None:
        return parse_config()
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError([("--config", f"file not found: {path}")])
    except json.JSONDecodeError as e:
        raise ConfigError([("--config", f"invalid JSON in {path}: {e}")])
    config = parse_config(doc)
    logger.info(f"Loaded config from {path}")
    return config


# -------------------------
# OVERRIDES
# -------------------------
def _resolve(doc: Dict[str, Any], path: str) -> List[Tuple[Any, str]]:
    """(container, key) targets for a dotted path; `players.` targets both players."""
    parts = path.split(".")
    head, rest = parts[0], parts[1:]
    if head == "players":
        roots = list(doc["players"])
    elif head in ("player1", "player2"):
        roots = [doc["players"][int(head[-1]) - 1]]
    elif head in doc and rest:
        roots = [doc[head]]
    else:
        raise ConfigError([(path, "unknown config path")])
    if not rest:
        raise ConfigError([(path, "path must name a field")])

    targets = []
    for root in roots:
        node = root
        for part in rest[:-1]:
            if not isinstance(node, dict) or part not in node:
                raise ConfigError([(path, f"unknown config path (no '{part}')")])
            node = node[part]
        if not isinstance(node, dict):
            raise ConfigError([(path, "unknown config path")])
        targets.append((node, rest[-1]))
    return targets


def override(config: RunConfig, path: str, value: Any) -> RunConfig:
    """A new RunConfig with `path` set to `value`, re-validated."""
    doc = config.to_dict()
    for node, key in _resolve(doc, path):
        node[key] = value
    return parse_config(doc)
