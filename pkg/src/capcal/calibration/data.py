"""Calibration datasets and their CSV representation.

CSV layout::

    # kind=separation_nm
    x,cap_pF,sigma_pF
    500.5,72.38765,0.0002
    ...

``kind`` is ``piezo_volts`` (x in V) or ``separation_nm`` (x in nm).
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..constants import NM, PF
from ..errors import DatasetFormatError, DomainError
from ..io import atomic_write_text

HEADER = ["x", "cap_pF", "sigma_pF"]


class AbscissaKind(str, enum.Enum):
    PIEZO_VOLTAGE = "piezo_volts"
    SEPARATION = "separation_nm"


@dataclass(frozen=True)
class Measurement:
    x: float  # V or m depending on the dataset kind
    capacitance: float  # F
    sigma: float  # F

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"measurement sigma must be > 0, got {self.sigma}")
        if not math.isfinite(self.capacitance):
            raise DomainError(f"measurement capacitance must be finite, got {self.capacitance}")


@dataclass(frozen=True)
class Dataset:
    kind: AbscissaKind
    points: tuple[Measurement, ...]
    label: str = ""

    def __post_init__(self):
        if not self.points:
            raise DomainError("dataset must contain at least one point")
        object.__setattr__(self, "kind", AbscissaKind(self.kind))
        object.__setattr__(self, "points", tuple(self.points))

    @classmethod
    def from_arrays(cls, kind, x, capacitance, sigma, label: str = "") -> "Dataset":
        x = np.asarray(x, dtype=float)
        c = np.asarray(capacitance, dtype=float)
        s = np.broadcast_to(np.asarray(sigma, dtype=float), x.shape)
        return cls(kind, tuple(Measurement(float(a), float(b), float(e)) for a, b, e in zip(x, c, s)), label)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def x(self) -> np.ndarray:
        return np.array([p.x for p in self.points])

    @property
    def capacitance(self) -> np.ndarray:
        return np.array([p.capacitance for p in self.points])

    @property
    def sigma(self) -> np.ndarray:
        return np.array([p.sigma for p in self.points])


def _x_to_display(kind: AbscissaKind, x: float) -> float:
    return x / NM if kind is AbscissaKind.SEPARATION else x


def dumps_csv(ds: Dataset) -> str:
    buf = io.StringIO()
    buf.write(f"# kind={ds.kind.value}\n")
    if ds.label:
        buf.write(f"# label={ds.label}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for p in ds.points:
        w.writerow([repr(_x_to_display(ds.kind, p.x)), repr(p.capacitance / PF), repr(p.sigma / PF)])
    return buf.getvalue()


def loads_csv(text: str, label: str = "") -> Dataset:
    """Parse the dataset CSV format; errors carry 1-based line numbers."""
    kind = None
    header_seen = False
    points = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            if key.strip() == "kind":
                try:
                    kind = AbscissaKind(value.strip())
                except ValueError:
                    raise DatasetFormatError(f"unknown kind {value.strip()!r}", lineno) from None
            elif key.strip() == "label" and not label:
                label = value.strip()
            continue
        row = next(csv.reader([line]))
        if not header_seen:
            if [c.strip() for c in row] != HEADER:
                raise DatasetFormatError(f"expected header {','.join(HEADER)}, got {line!r}", lineno)
            if kind is None:
                raise DatasetFormatError("missing '# kind=...' comment before the header", lineno)
            header_seen = True
            continue
        if len(row) != 3:
            raise DatasetFormatError(f"expected 3 fields, got {len(row)}", lineno)
        try:
            x, c, s = (float(v) for v in row)
        except ValueError:
            raise DatasetFormatError(f"non-numeric field in {line!r}", lineno) from None
        if not all(math.isfinite(v) for v in (x, c, s)) or s <= 0:
            raise DatasetFormatError(f"values must be finite and sigma_pF > 0: {line!r}", lineno)
        xs = x * NM if kind is AbscissaKind.SEPARATION else x
        points.append(Measurement(xs, c * PF, s * PF))
    if not header_seen:
        raise DatasetFormatError("no header line found", max(1, len(text.splitlines())))
    if not points:
        raise DatasetFormatError("dataset has no data rows", max(1, len(text.splitlines())))
    return Dataset(kind, tuple(points), label)


def read_csv(path: str | Path) -> Dataset:
    path = Path(path)
    return loads_csv(path.read_text(encoding="utf-8"), label=path.stem)


def write_csv(ds: Dataset, path: str | Path) -> None:
    atomic_write_text(path, dumps_csv(ds))
