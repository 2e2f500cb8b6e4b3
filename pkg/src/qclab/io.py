"""CSV file formats for exponential sums, zero sets and point measures.

Headers are exact: ``omega,re,im`` for sums, ``point,multiplicity`` for
zero sets (window in a JSON sidecar next to the CSV), ``gamma,re,im``
for measures with the gamma = 0 row carrying the density.
"""

from __future__ import annotations

import csv
import json
import warnings
from pathlib import Path

import numpy as np

from .diffraction import PointMeasure
from .errors import InvalidInputError, ParseError
from .wiener import ExpSum, canonicalize
from .zeros import ZeroSet

EXPSUM_HEADER = ["omega", "re", "im"]
ZEROSET_HEADER = ["point", "multiplicity"]
MEASURE_HEADER = ["gamma", "re", "im"]


def _read_rows(path, header):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise
    rows = list(csv.reader(text.splitlines()))
    if not rows or [c.strip() for c in rows[0]] != header:
        raise ParseError(f"expected header {','.join(header)!r}", path=path, line=1)
    out = []
    for i, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}",
                             path=path, line=i)
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise ParseError(f"non-numeric field in {row!r}", path=path, line=i) from None
        if not all(np.isfinite(v) for v in vals):
            raise ParseError("non-finite value", path=path, line=i)
        out.append((i, vals))
    return out


def read_expsum(path) -> ExpSum:
    rows = _read_rows(path, EXPSUM_HEADER)
    return canonicalize([(w, re + 1j * im) for _, (w, re, im) in rows])


def write_expsum(f: ExpSum, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(EXPSUM_HEADER)
        for w, q in f.terms():
            wr.writerow([repr(float(w)), repr(q.real), repr(q.imag)])


def read_zeroset(path) -> ZeroSet:
    rows = _read_rows(path, ZEROSET_HEADER)
    pts, mults = [], []
    for line, (p, m) in rows:
        if m != int(m) or m < 1:
            raise ParseError(f"multiplicity must be a positive integer, got {m}",
                             path=path, line=line)
        pts.append(p)
        mults.append(int(m))
    pts = np.asarray(pts, dtype=float)
    mults = np.asarray(mults, dtype=np.int64)
    order = np.argsort(pts)
    pts, mults = pts[order], mults[order]
    sidecar = Path(path).with_suffix(".json")
    if sidecar.exists():
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
        window = tuple(float(x) for x in meta["window"])
    else:
        warnings.warn(f"no sidecar {sidecar.name}; taking the window from the point range")
        if pts.size == 0:
            raise InvalidInputError("empty zero set and no sidecar window")
        window = (float(pts[0]), float(pts[-1]))
    return ZeroSet(window, pts, mults)


def write_zeroset(A: ZeroSet, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(ZEROSET_HEADER)
        for p, m in zip(A.points, A.mults):
            wr.writerow([repr(float(p)), int(m)])
    sidecar = Path(path).with_suffix(".json")
    sidecar.write_text(
        json.dumps({"window": [A.window[0], A.window[1]]}, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def read_measure(path) -> PointMeasure:
    rows = _read_rows(path, MEASURE_HEADER)
    merged: dict[float, complex] = {}
    dup = False
    for _, (g, re, im) in rows:
        key = None
        for k in merged:
            if abs(k - g) <= 1e-9:
                key = k
                dup = True
                break
        if key is None:
            merged[g] = complex(re, im)
        else:
            merged[key] += complex(re, im)
    if dup:
        warnings.warn(f"{path}: duplicate gamma rows merged by summing coefficients")
    d = 0.0
    gammas, masses = [], []
    for g, b in merged.items():
        if abs(g) <= 1e-9:
            d = float(b.real)
        else:
            gammas.append(g)
            masses.append(b)
    return PointMeasure(d=d, gammas=np.asarray(gammas, float),
                        masses=np.asarray(masses, complex))


def write_measure(mu: PointMeasure, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(MEASURE_HEADER)
        wr.writerow([repr(0.0), repr(float(mu.d)), repr(0.0)])
        for g, b in mu.atoms():
            wr.writerow([repr(float(g)), repr(b.real), repr(b.imag)])


def sniff_kind(path) -> str:
    """Map a file's header line to its object kind."""
    with open(path, "r", encoding="utf-8") as fh:
        header = [c.strip() for c in fh.readline().strip().split(",")]
    if header == EXPSUM_HEADER:
        return "expsum"
    if header == ZEROSET_HEADER:
        return "zeroset"
    if header == MEASURE_HEADER:
        return "measure"
    raise ParseError(f"unrecognized header {','.join(header)!r}", path=path, line=1)
