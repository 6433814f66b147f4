"""
Output files

CSV tables go through pandas with one leading metadata comment line; event
streams are JSONL whose first line is ``{"meta": {...}}``. Floats are written
with their shortest round-trip repr, so replays are bit-exact.
"""

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import pandas as pd

from .errors import ConfigError
from .log import get_logger
from .models import RunConfig

logger = get_logger("outputs")

PathLike = Union[str, Path]

# fields that never change what a run produces
UNHASHED_FIELDS = {"threads", "out_dir"}


def config_hash(config: RunConfig) -> str:
    """SHA-256 of the canonical JSON dump of the effective config, minus UNHASHED_FIELDS"""
    fields = config.model_dump(mode="json", exclude=UNHASHED_FIELDS)
    canonical = json.dumps(fields, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def run_meta(config: Optional[RunConfig], **extra: Any) -> Dict[str, Any]:
    """Metadata block embedded in every output"""
    meta: Dict[str, Any] = {}
    if config is not None:
        meta.update(
            {
                "config_hash": config_hash(config),
                "seed": config.seed,
                "command": config.command.value,
                "measure": config.measure.model_dump(mode="json", exclude_none=True),
                "n": config.n,
            }
        )
    meta.update(extra)
    return meta


def metadata_line(meta: Dict[str, Any]) -> str:
    return (
        f"# lambda-flows config_hash={meta.get('config_hash', '')} "
        f"seed={meta.get('seed')} command={meta.get('command', '')}"
    )


def write_csv(frame: pd.DataFrame, path: PathLike, meta: Dict[str, Any]) -> Path:
    """Writes the metadata comment line followed by the table"""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="") as handle:
        handle.write(metadata_line(meta) + "\n")
        frame.to_csv(handle, index=False)
    logger.info("Wrote %d rows to %s", len(frame), target)
    return target


def read_csv(path: PathLike) -> pd.DataFrame:
    """Reads a table written by write_csv, skipping the metadata line"""
    return pd.read_csv(path, skiprows=1)


def write_jsonl(path: PathLike, meta: Dict[str, Any], records: Iterable[Dict[str, Any]]) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(target, "w", encoding="utf-8") as handle:
        handle.write(json.dumps({"meta": meta}, sort_keys=True) + "\n")
        for record in records:
            handle.write(json.dumps(record, sort_keys=True) + "\n")
            count += 1
    logger.info("Wrote %d records to %s", count, target)
    return target


def read_jsonl(path: PathLike) -> Tuple[Dict[str, Any], List[Dict[str, Any]]]:
    """Returns (meta, records) of a JSONL file"""
    source = Path(path)
    if not source.is_file():
        raise ConfigError(f"File not found: {source}")
    with open(source, "r", encoding="utf-8") as handle:
        lines = [line for line in handle if line.strip()]
    if not lines:
        raise ConfigError(f"Empty JSONL file: {source}")
    try:
        head = json.loads(lines[0])
        records = [json.loads(line) for line in lines[1:]]
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Malformed JSONL in {source}: {exc}")
    if not isinstance(head, dict) or "meta" not in head:
        raise ConfigError(f"{source} does not start with a meta line")
    return head["meta"], records


def write_json(path: PathLike, payload: Any) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return target
