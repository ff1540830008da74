"""CSV serialization for series, covariance, spectrum and matrix data.

Series format: one sample per line, ``index,value,weight``, optional
single header line, decimal point, no thousands separators.  Floats are
written with ``repr`` so round-trips are bit-exact for finite values.
The sampling interval is not part of the file; it is supplied on read.
"""
from __future__ import annotations

import io as _io

import numpy as np

from .core import CovarianceEstimate, GappySeries, MappingMatrix, SpectrumEstimate
from .errors import SerializationError

__all__ = [
    "serialize_series",
    "deserialize_series",
    "read_series_csv",
    "write_series_csv",
    "covariance_to_csv",
    "spectrum_to_csv",
    "matrix_to_csv",
]

_SERIES_HEADER = "index,value,weight"


def serialize_series(series: GappySeries, fmt: str = "csv", header: bool = True) -> bytes:
    """Serialize a series to the CSV layout."""
    if fmt != "csv":
        raise SerializationError(f"unknown format {fmt!r}")
    buf = _io.StringIO()
    if header:
        buf.write(_SERIES_HEADER + "\n")
    for i, (v, w) in enumerate(zip(series.values, series.weights)):
        buf.write(f"{i},{float(v)!r},{float(w)!r}\n")
    return buf.getvalue().encode()


def _is_header(line: str) -> bool:
    first = line.split(",")[0].strip()
    try:
        float(first)
        return False
    except ValueError:
        return True


def deserialize_series(data: bytes | str, dt: float = 1.0, fmt: str = "csv") -> GappySeries:
    """Parse the CSV layout back into a series.

    Raises :class:`SerializationError` naming the offending line for
    malformed rows or non-numeric tokens.
    """
    if fmt != "csv":
        raise SerializationError(f"unknown format {fmt!r}")
    if isinstance(data, bytes):
        data = data.decode()
    values, weights = [], []
    lines = data.splitlines()
    start = 0
    for start, line in enumerate(lines):
        if line.strip():
            break
    if lines and _is_header(lines[start]):
        start += 1
    for lineno, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 3:
            raise SerializationError(
                f"line {lineno}: expected 3 fields (index,value,weight), got {len(fields)}"
            )
        try:
            float(fields[0])
            values.append(float(fields[1]))
            weights.append(float(fields[2]))
        except ValueError as exc:
            raise SerializationError(f"line {lineno}: non-numeric token in {line!r}") from exc
    if not values:
        raise SerializationError("no data rows found")
    return GappySeries(np.array(values), np.array(weights), dt)


def read_series_csv(path, dt: float = 1.0) -> GappySeries:
    with open(path, "rb") as fh:
        return deserialize_series(fh.read(), dt=dt)


def write_series_csv(path, series: GappySeries) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_series(series))


def covariance_to_csv(cov: CovarianceEstimate, method: str | None = None) -> str:
    """Rows ``lag_index,lag_time,value,pair_weight`` (plus optional method)."""
    cols = "lag_index,lag_time,value,pair_weight"
    if method is not None:
        cols += ",method"
    out = [cols]
    for k, t, v, w in zip(cov.lags, cov.lag_times, cov.values, cov.pair_weights):
        row = f"{int(k)},{float(t)!r},{float(v)!r},{float(w)!r}"
        if method is not None:
            row += f",{method}"
        out.append(row)
    return "\n".join(out) + "\n"


def spectrum_to_csv(spec: SpectrumEstimate, method: str | None = None) -> str:
    """Rows ``freq,real,imag,magnitude`` (plus optional method)."""
    cols = "freq,real,imag,magnitude"
    if method is not None:
        cols += ",method"
    out = [cols]
    for f, v in zip(spec.frequencies, spec.values):
        row = f"{float(f)!r},{float(v.real)!r},{float(v.imag)!r},{float(abs(v))!r}"
        if method is not None:
            row += f",{method}"
        out.append(row)
    return "\n".join(out) + "\n"


def matrix_to_csv(matrix: MappingMatrix) -> str:
    """Header row of j-lags, one row per k-lag (first column the k lag)."""
    lags = matrix.window.lags()
    out = ["k\\j," + ",".join(str(int(j)) for j in lags)]
    for k, row in zip(lags, matrix.entries):
        out.append(str(int(k)) + "," + ",".join(repr(float(x)) for x in row))
    return "\n".join(out) + "\n"
