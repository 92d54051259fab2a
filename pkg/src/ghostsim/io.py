"""File formats: matrix-text maps, ASCII graymaps, patterns, configs.

matrix-text: '#'-prefixed "key = value" header lines followed by one row of
space-separated decimal values per y row; UTF-8, LF line endings. Graymaps
are ASCII portable graymaps (magic "P2"); negative values are clipped to 0
and noted in a sidecar file.
"""

from __future__ import annotations

import os
from typing import Optional, Tuple, Union

import numpy as np

from .detector import CountFrame, SignedCountFrame
from .errors import ConfigError, ParameterError
from .experiments import CoincidenceMap, PhasePattern, pattern_from_extent

PGM_MAXVAL = 65535

_RADIANS_KEY = "values_are_radians"


# ---------------------------------------------------------------------------
# matrix-text
# ---------------------------------------------------------------------------


def save_matrix_text(path: str, values: np.ndarray, meta: Optional[dict] = None) -> None:
    """Write a 2D array as headered rows of decimals, one row per y."""
    values = np.asarray(values)
    lines = []
    for key in sorted((meta or {})):
        lines.append(f"# {key} = {(meta or {})[key]}")
    for row in values:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_matrix_text(path: str) -> Tuple[np.ndarray, dict]:
    """Read a matrix-text file back into (values, header dict)."""
    meta = {}
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    meta[key.strip()] = val.strip()
                continue
            try:
                rows.append([float(tok) for tok in line.split()])
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: non-numeric token ({exc})") from None
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ConfigError(f"{path}: ragged rows")
    return np.array(rows, dtype=float), meta


# ---------------------------------------------------------------------------
# ASCII portable graymap
# ---------------------------------------------------------------------------


def save_pgm(path: str, values: np.ndarray, maxval: int = PGM_MAXVAL) -> None:
    """Write values rescaled to [0, maxval] as an ASCII graymap (magic P2).

    Negative inputs are clipped to 0; if any were present, a sidecar file
    <path>.note records how many.
    """
    values = np.asarray(values, dtype=float)
    clipped = int(np.count_nonzero(values < 0))
    vals = np.clip(values, 0.0, None)
    top = float(vals.max())
    gray = np.rint(vals / top * maxval).astype(int) if top > 0 else vals.astype(int)
    ny, nx = gray.shape
    lines = ["P2", f"{nx} {ny}", f"{maxval}"]
    for row in gray:
        lines.append(" ".join(str(g) for g in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    note = path + ".note"
    if clipped:
        with open(note, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{clipped} negative values clipped to 0 in {os.path.basename(path)}\n")
    elif os.path.exists(note):
        os.remove(note)


def load_pgm(path: str) -> Tuple[np.ndarray, int]:
    """Read an ASCII graymap; returns (values, maxval)."""
    tokens = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            body = line.split("#", 1)[0]
            tokens.extend(body.split())
    if not tokens or tokens[0] != "P2":
        raise ConfigError(f"{path}: not an ASCII graymap (magic P2 missing)")
    try:
        nx, ny, maxval = (int(t) for t in tokens[1:4])
        data = np.array([int(t) for t in tokens[4:]], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"{path}: malformed graymap ({exc})") from None
    if data.size != nx * ny:
        raise ConfigError(f"{path}: expected {nx * ny} samples, found {data.size}")
    return data.reshape(ny, nx), maxval


# ---------------------------------------------------------------------------
# phase patterns
# ---------------------------------------------------------------------------


def load_pattern(
    path: str,
    phase_scale: float = np.pi,
    extent: Tuple[float, float] = (4e-3, 4e-3),
    center: Tuple[float, float] = (0.0, 0.0),
) -> PhasePattern:
    """Load a phase pattern from a graymap or a numeric matrix file.

    Gray value g maps to phase phase_scale * g / g_max, so a binary image at
    the default scale becomes a pi/0 two-region pattern. Matrix files saved by
    save_pattern carry their values in radians and are restored exactly.
    """
    with open(path, "r", encoding="utf-8") as fh:
        head = fh.read(2)
    if head == "P2":
        gray, maxval = load_pgm(path)
        grid = phase_scale * gray / maxval
    else:
        gray, meta = load_matrix_text(path)
        if meta.get(_RADIANS_KEY) == "true":
            grid = gray
        else:
            top = float(gray.max())
            grid = phase_scale * gray / top if top > 0 else np.zeros_like(gray)
    if gray.size == 0:
        raise ConfigError(f"{path}: empty pattern")
    return pattern_from_extent(grid, extent, center)


def save_pattern(path: str, pattern: PhasePattern) -> None:
    """Write a pattern's phase grid (radians) as matrix-text; loads back exactly."""
    meta = {
        _RADIANS_KEY: "true",
        "pitch_x_m": f"{pattern.pitch[0]:.17g}",
        "pitch_y_m": f"{pattern.pitch[1]:.17g}",
        "origin_x_m": f"{pattern.origin[0]:.17g}",
        "origin_y_m": f"{pattern.origin[1]:.17g}",
    }
    save_matrix_text(path, pattern.grid, meta)


# ---------------------------------------------------------------------------
# map / frame serialization
# ---------------------------------------------------------------------------

Saveable = Union[CoincidenceMap, CountFrame, SignedCountFrame]


def _values_and_meta(obj: Saveable) -> Tuple[np.ndarray, dict]:
    if isinstance(obj, CoincidenceMap):
        meta = {
            "pitch_x_m": f"{obj.pitch[0]:.17g}",
            "pitch_y_m": f"{obj.pitch[1]:.17g}",
            "origin_x_m": f"{obj.origin[0]:.17g}",
            "origin_y_m": f"{obj.origin[1]:.17g}",
        }
        for key, val in obj.meta.items():
            meta[str(key)] = val
        return obj.values, meta
    if isinstance(obj, (CountFrame, SignedCountFrame)):
        return np.asarray(obj.counts, dtype=float), {
            str(k): v for k, v in obj.meta.items()
        }
    raise ParameterError(f"cannot serialize {type(obj).__name__}")


def save_map(obj: Saveable, path: str, fmt: str = "matrix-text") -> None:
    """Serialize a map or count frame as matrix-text or an ASCII graymap."""
    values, meta = _values_and_meta(obj)
    if fmt == "matrix-text":
        save_matrix_text(path, values, meta)
    elif fmt == "graymap":
        save_pgm(path, values)
    else:
        raise ParameterError(f"unknown format {fmt!r}; use matrix-text or graymap")


# ---------------------------------------------------------------------------
# flat key=value configs
# ---------------------------------------------------------------------------


def parse_config(path: str) -> dict:
    """Parse a flat key=value config file; '#' starts a comment."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {body!r}")
            key, _, val = body.partition("=")
            key = key.strip()
            val = val.strip()
            if not key:
                raise ConfigError(f"{path}:{lineno}: empty key")
            if key in out:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            out[key] = val
    return out


def write_config_echo(path: str, resolved: dict) -> None:
    """Write the fully resolved configuration, sorted, deterministic."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(resolved):
            fh.write(f"{key} = {resolved[key]}\n")
