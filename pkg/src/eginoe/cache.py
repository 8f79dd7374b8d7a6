"""On-disk cache of spectra.

One JSON file per (n, tau), named ``spec_n{n}_tau{bits}_v{schema}.json``
where ``bits`` is the hexadecimal IEEE-754 bit pattern of tau. Writes go to
a temporary file in the same directory followed by an atomic rename.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvariantError
from .spectrum import Spectrum, compute_spectrum

SCHEMA_VERSION = 1


def tau_bits(tau: float) -> str:
    """Hex string of the 64-bit pattern of ``tau`` (big-endian)."""
    return struct.pack(">d", float(tau)).hex()


def cache_filename(n: int, tau: float, schema_version: int = SCHEMA_VERSION) -> str:
    return f"spec_n{int(n)}_tau{tau_bits(tau)}_v{schema_version}.json"


def _checksum(n: int, tau: float, lambdas: np.ndarray, route: str, precision: str) -> str:
    h = hashlib.sha256()
    h.update(struct.pack(">q", int(n)))
    h.update(struct.pack(">d", float(tau)))
    h.update(np.ascontiguousarray(lambdas, dtype=">f8").tobytes())
    h.update(route.encode())
    h.update(precision.encode())
    return h.hexdigest()


@dataclass(frozen=True)
class CacheEntry:
    """Serialised spectrum; ``checksum`` covers every numeric field."""

    schema_version: int
    n: int
    tau: float
    lambdas: list
    build_route: str
    precision: str
    checksum: str
    alpha: float | None = None

    @classmethod
    def from_spectrum(cls, s: Spectrum, build_route: str, alpha: float | None = None) -> "CacheEntry":
        lam = np.asarray(s.lambdas, dtype=np.float64)
        return cls(
            SCHEMA_VERSION,
            s.n,
            float(s.tau),
            [float(v) for v in lam],
            build_route,
            s.precision,
            _checksum(s.n, s.tau, lam, build_route, s.precision),
            alpha,
        )

    def to_spectrum(self) -> Spectrum:
        lam = np.array(self.lambdas, dtype=np.float64)
        lam.setflags(write=False)
        return Spectrum(self.n, self.tau, lam, self.precision)

    def verify(self) -> None:
        if self.schema_version != SCHEMA_VERSION:
            raise InvariantError(f"cache schema {self.schema_version} != {SCHEMA_VERSION}")
        expected = _checksum(self.n, self.tau, np.array(self.lambdas, dtype=np.float64), self.build_route, self.precision)
        if expected != self.checksum:
            raise InvariantError("cache checksum mismatch")

    def to_json(self) -> dict:
        out = {
            "schema_version": self.schema_version,
            "n": self.n,
            "tau": self.tau,
            "tau_bits": tau_bits(self.tau),
            "lambdas": self.lambdas,
            "build_route": self.build_route,
            "precision": self.precision,
            "checksum": self.checksum,
        }
        if self.alpha is not None:
            out["alpha"] = self.alpha
        return out

    @classmethod
    def from_json(cls, d: dict) -> "CacheEntry":
        tau = struct.unpack(">d", bytes.fromhex(d["tau_bits"]))[0]
        return cls(d["schema_version"], d["n"], tau, list(d["lambdas"]), d["build_route"], d["precision"], d["checksum"], d.get("alpha"))


def save(entry: CacheEntry, cache_dir) -> Path:
    """Write ``entry`` atomically; returns the final path."""
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    path = cache_dir / cache_filename(entry.n, entry.tau)
    # json writes floats with repr, which round-trips every double exactly
    fd, tmp = tempfile.mkstemp(dir=cache_dir, prefix=".tmp_", suffix=".json")
    try:
        with os.fdopen(fd, "w", newline="\n") as f:
            json.dump(entry.to_json(), f)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def load(n: int, tau: float, cache_dir) -> CacheEntry | None:
    """Cached entry for (n, tau), or None if absent; raises on corruption."""
    path = Path(cache_dir) / cache_filename(n, tau)
    if not path.exists():
        return None
    with open(path) as f:
        entry = CacheEntry.from_json(json.load(f))
    entry.verify()
    return entry


def cached_spectrum(n: int, tau: float, cache_dir=None, profile: str = "default", alpha: float | None = None) -> Spectrum:
    """:func:`compute_spectrum` backed by the on-disk cache when ``cache_dir`` is set."""
    if cache_dir is None:
        return compute_spectrum(n, tau, profile=profile)
    entry = load(n, tau, cache_dir)
    if entry is not None:
        return entry.to_spectrum()
    s = compute_spectrum(n, tau, profile=profile)
    route = "identity" if tau == 1.0 else "quadrature"
    save(CacheEntry.from_spectrum(s, route, alpha), cache_dir)
    return s
