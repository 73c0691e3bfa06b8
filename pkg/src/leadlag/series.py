"""
Series ingestion and the return transforms applied before lattice analysis.

Raw price-like series are turned into continuously compounded returns and
then rescaled, either by their root mean square or to zero mean and unit
sample variance.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateSeries, LeadLagError, MissingValue, NonPositiveValue, TooShort

__all__ = [
    "RawSeries",
    "TimeSeries",
    "log_returns",
    "normalize_rms",
    "standardize",
    "read_csv",
    "write_csv",
    "trim_common",
]


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


def _label_key(labels: Sequence[str]):
    try:
        return [float(lab) for lab in labels]
    except ValueError:
        return list(labels)


def _check_ordered(labels: Sequence[str]) -> None:
    keys = _label_key(labels)
    for i in range(1, len(keys)):
        if not keys[i - 1] < keys[i]:
            raise LeadLagError(f"labels not strictly ordered at position {i}: {labels[i - 1]!r} >= {labels[i]!r}")


@dataclass(frozen=True)
class RawSeries:
    """Untransformed observations S(t), optionally carrying time labels."""

    values: np.ndarray
    labels: Optional[tuple] = None
    source: str = "memory"

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 1:
            raise LeadLagError("series values must be one-dimensional")
        if values.size < 2:
            raise TooShort(f"series needs at least 2 values, got {values.size}")
        object.__setattr__(self, "values", values)
        if self.labels is not None:
            labels = tuple(str(lab) for lab in self.labels)
            if len(labels) != values.size:
                raise LeadLagError(f"{len(labels)} labels for {values.size} values")
            _check_ordered(labels)
            object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class TimeSeries:
    """A uniformly sampled finite real sequence plus its provenance.

    ``meta`` records where the values came from (``source``) and the ordered
    chain of transforms applied so far (``transforms``).
    """

    values: np.ndarray
    labels: Optional[tuple] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 1:
            raise LeadLagError("series values must be one-dimensional")
        if values.size < 2:
            raise TooShort(f"series needs at least 2 values, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise LeadLagError("series contains non-finite values")
        object.__setattr__(self, "values", values)
        if self.labels is not None:
            labels = tuple(str(lab) for lab in self.labels)
            if len(labels) != values.size:
                raise LeadLagError(f"{len(labels)} labels for {values.size} values")
            object.__setattr__(self, "labels", labels)
        meta = {"source": "memory", "transforms": ()}
        meta.update(self.meta)
        meta["transforms"] = tuple(meta["transforms"])
        object.__setattr__(self, "meta", meta)

    def __len__(self):
        return self.values.size

    def derive(self, values, transform: str, labels=None) -> "TimeSeries":
        meta = dict(self.meta)
        meta["transforms"] = self.meta["transforms"] + (transform,)
        return TimeSeries(values, labels=labels if labels is not None else self.labels, meta=meta)


def log_returns(raw: RawSeries) -> TimeSeries:
    """Continuously compounded returns ``ln S(t+1) - ln S(t)``.

    The result is one element shorter than the input; the label of each
    return is the label of its later observation.
    """
    values = np.asarray(raw.values, dtype=np.float64)
    if values.size < 2:
        raise TooShort(f"series needs at least 2 values, got {values.size}")
    bad = np.flatnonzero(~(values > 0))
    if bad.size:
        raise NonPositiveValue(int(bad[0]), float(values[bad[0]]))
    out = np.diff(np.log(values))
    labels = raw.labels[1:] if raw.labels is not None else None
    meta = {"source": raw.source, "transforms": ("log_returns",)}
    return TimeSeries(out, labels=labels, meta=meta)


def normalize_rms(series: TimeSeries) -> TimeSeries:
    """Divide by the root mean square ``sqrt(mean(r**2))`` (no centering)."""
    r = series.values
    rms = np.sqrt(np.mean(r * r))
    if not rms > 0:
        raise DegenerateSeries("root-mean-square of series is zero")
    return series.derive(r / rms, "normalize_rms")


def standardize(series: TimeSeries) -> TimeSeries:
    """Center to zero mean and scale to unit sample (n-1) standard deviation."""
    v = series.values
    centered = v - v.mean()
    sd = np.std(centered, ddof=1)
    if not sd > 0:
        raise DegenerateSeries("sample standard deviation of series is zero")
    out = centered / sd
    # a second pass removes the residual rounding left by the first
    out = out - out.mean()
    out = out / np.std(out, ddof=1)
    return series.derive(out, "standardize")


def read_csv(path, column: Optional[str] = None) -> RawSeries:
    """Read a ``label,value`` CSV with a header row.

    When the file has more than two columns, ``column`` names the value
    column; the first column is always the label. Empty cells are rejected.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise LeadLagError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if len(header) < 2:
            raise LeadLagError(f"{path}: need at least two columns, got header {header!r}")
        if column is None:
            if len(header) > 2:
                raise LeadLagError(f"{path}: several value columns {header[1:]!r}; pick one with --column")
            col = 1
        else:
            if column not in header[1:]:
                raise LeadLagError(f"{path}: no column named {column!r} (have {header[1:]!r})")
            col = header.index(column, 1)
        labels, values = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) <= col or not row[col].strip():
                raise MissingValue(f"{path}: missing value on line {lineno}")
            try:
                values.append(float(row[col]))
            except ValueError:
                raise LeadLagError(f"{path}: unparsable value {row[col]!r} on line {lineno}") from None
            labels.append(row[0].strip())
    try:
        return RawSeries(values, labels=labels, source=str(path))
    except LeadLagError as exc:
        raise type(exc)(f"{path}: {exc}") from None


def write_csv(path, values, labels=None, header=("label", "value")) -> None:
    values = np.asarray(values, dtype=np.float64)
    if labels is None:
        labels = [str(i) for i in range(values.size)]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for lab, v in zip(labels, values):
            w.writerow([lab, repr(float(v))])


def trim_common(a: RawSeries, b: RawSeries) -> tuple[RawSeries, RawSeries]:
    """Restrict two labelled series to the labels they share.

    Without labels, both series are cut to the shorter length from the start.
    """
    if a.labels is None or b.labels is None:
        n = min(len(a), len(b))
        return (RawSeries(a.values[:n], source=a.source), RawSeries(b.values[:n], source=b.source))
    common = set(a.labels) & set(b.labels)
    if len(common) < 2:
        raise TooShort(f"{a.source} and {b.source} share fewer than 2 labels")
    ia = [i for i, lab in enumerate(a.labels) if lab in common]
    ib = [i for i, lab in enumerate(b.labels) if lab in common]
    return (
        RawSeries(a.values[ia], labels=[a.labels[i] for i in ia], source=a.source),
        RawSeries(b.values[ib], labels=[b.labels[i] for i in ib], source=b.source),
    )
