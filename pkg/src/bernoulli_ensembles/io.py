"""File formats: NDJSON configuration streams, PMF tables, curve CSVs."""

from __future__ import annotations

import csv
import json
import math
import struct
from typing import IO, Iterable, Iterator

import numpy as np

from .ensemble import ParticleConfig
from .llt import JointPMF, WeightedSumModel, gaussian_q0, local_errors, moments
from .young import Curve

PMF_MAGIC = float(0x504D4631)  # "PMF1"
PMF_VERSION = 1.0
_HEADER = struct.Struct("<8d")


def fmt(x: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    return f"{x:.17g}"


# --- NDJSON --------------------------------------------------------------------


def dumps(record: dict) -> str:
    # json writes floats with repr, the shortest string that round-trips
    return json.dumps(record, separators=(",", ":"), allow_nan=True)


def write_ndjson(records: Iterable[dict], fh: IO[str]) -> None:
    for r in records:
        fh.write(dumps(r))
        fh.write("\n")


def read_ndjson(fh: IO[str]) -> Iterator[dict]:
    for line in fh:
        line = line.strip()
        if line:
            yield json.loads(line)


def write_configs(configs: Iterable[ParticleConfig], fh: IO[str]) -> None:
    write_ndjson((dict(type="sample", **c.to_dict()) for c in configs), fh)


def read_configs(fh: IO[str]) -> list[ParticleConfig]:
    """Every ``sample`` record of an NDJSON stream; other record types are skipped."""
    return [
        ParticleConfig.from_dict(r)
        for r in read_ndjson(fh)
        if r.get("type", "sample") == "sample"
    ]


# --- PMF tables ----------------------------------------------------------------


def write_pmf_binary(pmf: JointPMF, fh: IO[bytes]) -> None:
    """Header of 8 little-endian doubles, the table row-major, then the defect sites."""
    defects = sorted(pmf.defects)
    fh.write(
        _HEADER.pack(PMF_MAGIC, PMF_VERSION, pmf.n, pmf.k_max, pmf.l_max, len(defects), 0.0, 0.0)
    )
    fh.write(np.ascontiguousarray(pmf.table, dtype="<f8").tobytes())
    fh.write(np.asarray(defects, dtype="<f8").tobytes())


def read_pmf_binary(fh: IO[bytes]) -> JointPMF:
    """Inverse of :func:`write_pmf_binary`; the support is taken as the positive entries."""
    raw = fh.read(_HEADER.size)
    if len(raw) != _HEADER.size:
        raise ValueError("truncated PMF header")
    magic, version, n, k_max, l_max, n_def, _, _ = _HEADER.unpack(raw)
    if magic != PMF_MAGIC:
        raise ValueError("not a PMF file")
    if version != PMF_VERSION:
        raise ValueError(f"unsupported PMF version {version}")
    shape = (int(k_max) + 1, int(l_max) + 1)
    size = shape[0] * shape[1]
    table = np.frombuffer(fh.read(8 * size), dtype="<f8")
    if table.size != size:
        raise ValueError("truncated PMF table")
    defects = np.frombuffer(fh.read(8 * int(n_def)), dtype="<f8")
    if defects.size != int(n_def):
        raise ValueError("truncated defect list")
    table = table.reshape(shape).astype(float)
    return JointPMF(int(n), table, table > 0.0, frozenset(int(d) for d in defects))


def write_pmf_csv(model: WeightedSumModel, pmf: JointPMF, fh: IO[str]) -> None:
    """Rows ``K, L, P, q0, error`` over the support of the PMF."""
    mom = moments(model)
    err = local_errors(model, pmf)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["K", "L", "P", "q0", "error"])
    for K, L in zip(*np.nonzero(pmf.support)):
        y1 = (K - mom.E) / math.sqrt(mom.U)
        y2 = (L - mom.F) / math.sqrt(mom.V)
        w.writerow([int(K), int(L), fmt(pmf.table[K, L]), fmt(gaussian_q0(y1, y2, mom.lam)), fmt(err[K, L])])


# --- curves --------------------------------------------------------------------


def write_curve_csv(curve: Curve, fh: IO[str], value_name: str = "value") -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["x", value_name])
    for x, y in zip(curve.grid, curve.values):
        w.writerow([fmt(x), fmt(y)])


def read_curve_csv(fh: IO[str], kind: str = "linear") -> Curve:
    rows = list(csv.reader(fh))
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    return Curve(data[:, 0], data[:, 1], kind=kind)


def write_table_csv(header: list[str], rows: Iterable[Iterable], fh: IO[str]) -> None:
    """Generic CSV; floats at 17 significant digits, other values via ``str``."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in row])

