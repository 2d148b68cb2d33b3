"""On-disk zero table: ``zeros.csv`` plus a small JSON sidecar.

A cached table is never trusted as is. Loading recomputes the
argument-principle count at the stored heights and checks that Z changes
sign across every stored ordinate; a table that fails is moved aside
(quarantined) and an error is raised instead of silently rebuilding it.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .zeros import ORDINATE_DECIMALS, ZeroCertificationError, ZeroTable, certify, locate_zeros
from .zetanum import hardy_Z

CACHE_ENV = "NATBOUND_CACHE_DIR"
ZEROS_FILE = "zeros.csv"
META_FILE = "zeros.meta.json"
_SIGN_OFFSET = 1e-8


class CacheCorruptError(ZeroCertificationError):
    """A cached zero table failed re-certification."""


def cache_dir(path: str | os.PathLike | None = None) -> Path:
    """Explicit path, else ``$NATBOUND_CACHE_DIR``, else ``~/.cache/natbound``."""
    if path is None:
        path = os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "natbound"
    return Path(path)


def atomic_write_text(path: Path, text: str) -> None:
    """Write via a temporary file in the same directory and rename over ``path``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def zeros_csv_text(table: ZeroTable) -> str:
    lines = ["index,ordinate"]
    lines += [f"{k},{g:.{ORDINATE_DECIMALS}f}" for k, g in enumerate(table.ordinates, start=1)]
    return "\n".join(lines) + "\n"


def save_table(table: ZeroTable, directory: Path) -> None:
    meta = {
        "schema": 1,
        "t_max": table.t_max,
        "certified_at": [[T, n] for T, n in table.certified_at],
    }
    # the CSV goes first: a crash in between leaves a sidecar that fails re-certification
    atomic_write_text(directory / ZEROS_FILE, zeros_csv_text(table))
    atomic_write_text(directory / META_FILE, json.dumps(meta, indent=2) + "\n")


def _quarantine(directory: Path) -> Path:
    k = 1
    while (directory / f"{ZEROS_FILE}.quarantine{k}").exists():
        k += 1
    target = directory / f"{ZEROS_FILE}.quarantine{k}"
    os.replace(directory / ZEROS_FILE, target)
    if (directory / META_FILE).exists():
        os.replace(directory / META_FILE, directory / f"{META_FILE}.quarantine{k}")
    return target


def _read(directory: Path) -> tuple[np.ndarray, dict]:
    with open(directory / ZEROS_FILE, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["index", "ordinate"]:
        raise CacheCorruptError("bad header in zeros.csv")
    ords = []
    for k, row in enumerate(rows[1:], start=1):
        if len(row) != 2 or int(row[0]) != k:
            raise CacheCorruptError(f"bad row {k} in zeros.csv")
        ords.append(float(row[1]))
    meta = json.loads((directory / META_FILE).read_text())
    return np.array(ords), meta


def recertify(ordinates: np.ndarray, meta: dict) -> ZeroTable:
    """Rebuild a table from raw data, re-running both completeness checks."""
    heights = [float(T) for T, _ in meta["certified_at"]]
    if not heights or max(heights) < meta["t_max"]:
        raise CacheCorruptError("sidecar does not certify up to t_max")
    if ordinates.size and np.any(np.diff(ordinates) <= 0):
        raise CacheCorruptError("ordinates not strictly increasing")
    try:
        cert = certify(ordinates, heights)
    except ZeroCertificationError as exc:
        raise CacheCorruptError(str(exc)) from exc
    if ordinates.size:
        lo = hardy_Z(ordinates - _SIGN_OFFSET)
        hi = hardy_Z(ordinates + _SIGN_OFFSET)
        bad = np.flatnonzero(lo * hi >= 0)
        if bad.size:
            raise CacheCorruptError(f"no sign change at stored ordinate #{bad[0] + 1}")
    kept = ordinates[ordinates <= meta["t_max"]]
    return ZeroTable(tuple(float(g) for g in kept), float(meta["t_max"]), certified_at=tuple(cert))


def load_table(directory: Path) -> ZeroTable | None:
    """Cached table after re-certification, ``None`` if there is no cache."""
    if not (directory / ZEROS_FILE).exists():
        return None
    try:
        ordinates, meta = _read(directory)
        return recertify(ordinates, meta)
    except (CacheCorruptError, ValueError, KeyError, OSError) as exc:
        moved = _quarantine(directory)
        raise CacheCorruptError(f"zero cache failed verification ({exc}); moved to {moved.name}") from exc


def restrict(table: ZeroTable, t_max: float) -> ZeroTable:
    """The same table cut down to ``t_max``.

    The first certification height beyond ``t_max`` is kept: it is the one
    that shows no zero just below ``t_max`` is missing.
    """
    kept = tuple(g for g in table.ordinates if g <= t_max)
    cert = tuple((T, n) for T, n in table.certified_at if T <= t_max)
    beyond = [(T, n) for T, n in table.certified_at if T > t_max]
    if beyond:
        cert += (beyond[0],)
    return ZeroTable(kept, float(t_max), table.precision, cert)


def get_zero_table(t_max: float, directory: Path | None = None, jobs: int = 1, use_cache: bool = True) -> ZeroTable:
    """Certified zeros up to ``t_max``, served from the cache when it reaches far enough."""
    if not use_cache:
        return locate_zeros(t_max, jobs=jobs)
    directory = cache_dir(directory)
    cached = load_table(directory)
    if cached is not None and cached.t_max >= t_max:
        return restrict(cached, t_max)
    table = locate_zeros(t_max, jobs=jobs)
    save_table(table, directory)
    return table


def warm(t_max: float, directory: Path | None = None, jobs: int = 1) -> dict:
    table = get_zero_table(t_max, directory, jobs=jobs)
    return {"status": "ok", "zeros": len(table), "t_max": table.t_max}


def verify(directory: Path | None = None) -> dict:
    directory = cache_dir(directory)
    table = load_table(directory)
    if table is None:
        return {"status": "empty"}
    return {"status": "ok", "zeros": len(table), "t_max": table.t_max}


def purge(directory: Path | None = None) -> dict:
    """Remove the cache files; removing nothing is also success."""
    directory = cache_dir(directory)
    removed = 0
    if directory.exists():
        for path in sorted(directory.iterdir()):
            if path.name.startswith((ZEROS_FILE, META_FILE)):
                # rename first so a concurrent reader never sees a half-deleted pair
                doomed = path.with_name(f".purge-{path.name}")
                os.replace(path, doomed)
                doomed.unlink()
                removed += 1
    return {"status": "ok", "removed": removed}
