"""Reading and writing JSON, CSV and state files.

JSON artifacts are canonical: sorted keys, two-space indent, floats in their
shortest round-trip form and non-finite floats as ``null``. Each artifact
carries a ``meta`` object naming the tool, the command line, the seed and
the metric labels of the numbers it holds.
"""

import json
import logging
import math
import sys
from collections.abc import Mapping, Sequence
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from qfi_optics import __version__
from qfi_optics.core.fock import FloatArray, ProbeState
from qfi_optics.errors import InputError

logger = logging.getLogger(__name__)

TOOL_NAME = "qfi-optics"
CSV_FORMAT = "%.12e"
RENORMALIZE_TOLERANCE = 1e-9


class ArtifactMeta(BaseModel):
    model_config = ConfigDict(frozen=True)

    tool: str = TOOL_NAME
    version: str = __version__
    command: tuple[str, ...]
    seed: int | None = None
    metrics: dict[str, str | None] = Field(default_factory=dict)


def build_meta(
    argv: Sequence[str],
    metrics: Mapping[str, str | None],
    seed: int | None = None,
) -> ArtifactMeta:
    return ArtifactMeta(command=(TOOL_NAME, *argv), seed=seed, metrics=dict(metrics))


def to_jsonable(value: Any) -> Any:
    """Plain JSON types; NaN and infinities become None."""
    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump(mode="python"))
    if isinstance(value, Mapping):
        return {str(to_jsonable(key)): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, np.ndarray):
        return [to_jsonable(item) for item in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        return number if math.isfinite(number) else None
    return value


def canonical_json(document: Any) -> str:
    return json.dumps(to_jsonable(document), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path: Path | None, result: Any, meta: ArtifactMeta) -> str:
    """Write ``{"meta": ..., "result": ...}`` to ``path``, or to stdout when ``path`` is None."""
    text = canonical_json({"meta": meta, "result": result})
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")
        logger.info(f"Wrote {path}")
    return text


def read_json(path: Path) -> dict[str, Any]:
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(document, dict):
        raise InputError(f"{path} must hold a JSON object")
    return document


def write_csv(path: Path, columns: Sequence[str], rows: FloatArray, meta: ArtifactMeta) -> None:
    """Fixed-format CSV; meta lines and the column header are ``#`` comments."""
    meta_lines = [
        f"{key}: {json.dumps(to_jsonable(value), sort_keys=True)}"
        for key, value in sorted(meta.model_dump(mode="python").items())
    ]
    header = "\n".join([*meta_lines, ",".join(columns)])
    np.savetxt(path, rows, fmt=CSV_FORMAT, delimiter=",", header=header, comments="# ")
    logger.info(f"Wrote {path} ({rows.shape[0]} rows)")


def read_csv(path: Path) -> tuple[list[str], FloatArray]:
    """Column names (the last comment line) and the numeric rows."""
    comments = [
        line[1:].strip()
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.startswith("#")
    ]
    if not comments:
        raise InputError(f"{path} has no column header")
    rows = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    return comments[-1].split(","), rows


def load_state(path: Path) -> ProbeState:
    """Read ``{"n_photons": N, "weights": [...], "phases": [...]?}``.

    Weights within 1e-9 of unit sum are renormalized; anything further off is
    rejected. An optional ``meta`` object is accepted and ignored.
    """
    document = read_json(path)
    unknown = set(document) - {"n_photons", "weights", "phases", "meta"}
    if unknown:
        raise InputError(f"unknown state fields: {sorted(unknown)}")
    n_photons = document.get("n_photons")
    weights = document.get("weights")
    if not isinstance(n_photons, int) or isinstance(n_photons, bool) or n_photons < 0:
        raise InputError("n_photons must be a nonnegative integer")
    if not isinstance(weights, list) or len(weights) != n_photons + 1:
        raise InputError(f"weights must be a list of {n_photons + 1} numbers")
    if not all(isinstance(w, (int, float)) and not isinstance(w, bool) for w in weights):
        raise InputError("weights must be numbers")
    values = np.asarray(weights, dtype=np.float64)
    if np.any(~np.isfinite(values)) or np.any(values < 0.0):
        raise InputError("weights must be finite and nonnegative")
    total = math.fsum(values)
    if abs(total - 1.0) > RENORMALIZE_TOLERANCE:
        raise InputError(f"weights sum to {total!r}; expected 1 within {RENORMALIZE_TOLERANCE}")
    phases = document.get("phases")
    if phases is not None and (
        not isinstance(phases, list)
        or len(phases) != n_photons + 1
        or not all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in phases)
    ):
        raise InputError(f"phases must be a list of {n_photons + 1} numbers")
    return ProbeState.from_weights(values / total, phases)


def save_state(path: Path, state: ProbeState, meta: ArtifactMeta | None = None) -> None:
    document: dict[str, Any] = {"n_photons": state.n_photons, "weights": list(state.weights)}
    if meta is not None:
        document["meta"] = meta
    if state.phases is not None:
        document["phases"] = list(state.phases)
    path.write_text(canonical_json(document), encoding="utf-8")
    logger.info(f"Wrote state {path}")
