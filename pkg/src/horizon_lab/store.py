"""Result files and the radial-solution disk cache.

Cache records are one file each: a JSON header line (key, array shapes,
SHA-256 of the payload) followed by the payload as hexadecimal
little-endian ``float64``/``complex128`` bytes.  Writes go to a temporary
file in the same directory and are renamed into place.
"""

import csv
import hashlib
import io
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import HorizonLabError, MissingSolution
from .geometry import BlackHole
from .radial import RadialSolution


class StoreError(HorizonLabError):
    exit_code = 3


CSV_COLUMNS = ("study_id", "alpha", "u0", "rho", "M", "m", "k", "n", "lambda",
               "trace_restricted", "trace_masked", "d_value", "slope", "slope_err", "r_squared")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def csv_text(records) -> str:
    """CSV with the fixed column order; missing fields are left empty."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow([_cell(rec.get(c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def json_text(summary) -> str:
    return json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise StoreError(f"cannot write {path}: {exc}") from exc


def write_results(records, fmt: str, directory, stem: str = "results", summary=None) -> Path:
    """Write ``records`` as ``stem.csv`` or ``stem.json`` and return the path.

    The JSON file holds ``{"records": [...], "summary": ...}``.
    """
    directory = Path(directory)
    if fmt == "csv":
        path = directory / f"{stem}.csv"
        _atomic_write(path, csv_text(records))
    elif fmt == "json":
        path = directory / f"{stem}.json"
        _atomic_write(path, json_text({"records": list(records), "summary": summary}))
    else:
        raise StoreError(f"unknown format {fmt!r}")
    return path


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# -- cache ---------------------------------------------------------------------

def cache_dir() -> Path:
    env = os.environ.get("HORIZON_LAB_CACHE_DIR")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "horizon-lab"


@dataclass(frozen=True)
class CacheKey:
    M: float
    m: float
    k: float
    n: int
    omega: float
    tol: float
    u_start: float
    u_end: float

    def text(self) -> str:
        """Canonical decimal text of the key."""
        return ",".join(f"{name}={getattr(self, name)!r}" for name in
                        ("M", "m", "k", "n", "omega", "tol", "u_start", "u_end"))

    def filename(self) -> str:
        return hashlib.sha256(self.text().encode()).hexdigest()[:32] + ".rec"


@dataclass(frozen=True)
class CacheRecord:
    key: CacheKey
    solution: RadialSolution

    def payload(self) -> bytes:
        s = self.solution
        parts = [np.asarray(s.grid, dtype="<f8"), np.asarray(s.f_plus, dtype="<c16"),
                 np.asarray(s.f_minus, dtype="<c16"), np.asarray(s.f0, dtype="<c16"),
                 np.asarray([s.omega, s.lam, s.m, s.horizon_error], dtype="<f8")]
        return b"".join(p.tobytes() for p in parts)


def encode_record(record: CacheRecord) -> str:
    payload = record.payload()
    header = {"key": record.key.text(), "count": len(record.solution.grid),
              "M": record.key.M, "sha256": hashlib.sha256(payload).hexdigest()}
    return json.dumps(header, sort_keys=True) + "\n" + payload.hex() + "\n"


def decode_record(text: str, key: CacheKey) -> RadialSolution:
    header_line, _, body = text.partition("\n")
    header = json.loads(header_line)
    if header["key"] != key.text():
        raise StoreError("cache record key mismatch")
    payload = bytes.fromhex(body.strip())
    if hashlib.sha256(payload).hexdigest() != header["sha256"]:
        raise StoreError("cache record checksum mismatch")
    n = header["count"]
    sizes = [(n, "<f8"), (n, "<c16"), (n, "<c16"), (2, "<c16"), (4, "<f8")]
    arrays, offset = [], 0
    for count, dtype in sizes:
        nbytes = count * np.dtype(dtype).itemsize
        arrays.append(np.frombuffer(payload, dtype=dtype, count=count, offset=offset).copy())
        offset += nbytes
    grid, fp, fm, f0, (omega, lam, m, err) = arrays
    return RadialSolution(float(omega), float(lam), float(m), BlackHole(header["M"]), grid, fp, fm,
                          (complex(f0[0]), complex(f0[1])), float(err))


def cache_put(key: CacheKey, solution: RadialSolution, directory=None) -> Path:
    path = Path(directory or cache_dir()) / key.filename()
    _atomic_write(path, encode_record(CacheRecord(key, solution)))
    return path


def cache_get(key: CacheKey, directory=None) -> RadialSolution:
    path = Path(directory or cache_dir()) / key.filename()
    if not path.exists():
        raise MissingSolution(key.text())
    return decode_record(path.read_text(encoding="utf-8"), key)


def cache_list(directory=None) -> list:
    """``(filename, key text)`` pairs sorted by filename."""
    root = Path(directory or cache_dir())
    out = []
    for path in sorted(root.glob("*.rec")) if root.exists() else []:
        with open(path, encoding="utf-8") as fh:
            out.append((path.name, json.loads(fh.readline())["key"]))
    return out


def cache_gc(directory=None) -> int:
    """Remove unreadable records and stray temporaries; returns the count removed."""
    root = Path(directory or cache_dir())
    removed = 0
    if not root.exists():
        return 0
    for path in sorted(root.iterdir()):
        if path.name.startswith(".tmp-"):
            path.unlink()
            removed += 1
            continue
        if path.suffix != ".rec":
            continue
        try:
            header_line, _, body = path.read_text(encoding="utf-8").partition("\n")
            header = json.loads(header_line)
            ok = hashlib.sha256(bytes.fromhex(body.strip())).hexdigest() == header["sha256"]
        except (ValueError, KeyError):
            ok = False
        if not ok:
            path.unlink()
            removed += 1
    return removed


def cached_solution(key: CacheKey, compute, directory=None) -> RadialSolution:
    """Return the cached solution for ``key``, computing and storing it if absent."""
    try:
        return cache_get(key, directory)
    except MissingSolution:
        solution = compute()
        cache_put(key, solution, directory)
        return solution
