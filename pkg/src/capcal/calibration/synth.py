"""Seeded synthetic datasets standing in for unpublished measurements.

Noise is drawn from numpy's counter-based Philox bit generator through
``Generator.standard_normal``; both are named in :data:`GENERATOR` so a
dataset can be regenerated bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..constants import NM, PF, PF_PER_UM
from ..errors import DomainError
from ..models import MTO_SPHERE, REFERENCE_LENS, CapacitanceModel, ExactSphere, ModifiedLens, ParasiticParams
from .data import AbscissaKind, Dataset
from .fitting import PiezoCalibration, piezo_to_separation

GENERATOR = f"numpy.random.Philox/Generator.standard_normal (numpy {np.__version__})"

MTO_SIGMA = 2e-4 * PF
MTO_TRUTH = ExactSphere(MTO_SPHERE, ParasiticParams(72.32971 * PF, 2.18e-4 * PF_PER_UM))
LENS_SIGMA = 1.5e-3 * PF
LENS_TRUTH = ModifiedLens(REFERENCE_LENS, 197.69 * PF)
LENS_CALIB = PiezoCalibration(87 * NM, 69.93)


def mto_design(n: int = 351, d_min: float = 500.5 * NM, d_max: float = 4000.2 * NM) -> np.ndarray:
    return np.linspace(d_min, d_max, n)


def lens_piezo_design(n: int = 363, v_min: float = 0.0, v_max: float = 68.76) -> np.ndarray:
    return np.linspace(v_min, v_max, n)


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a synthetic dataset.

    ``sigma`` is the uncertainty written into the dataset (scalar or per
    point, F). ``noise_sigma`` is the width of the noise actually added and
    defaults to ``sigma``; set it to 0 for a noiseless curve.
    """

    truth_model: CapacitanceModel
    abscissae: tuple[float, ...]
    sigma: float | tuple[float, ...]
    seed: int
    kind: AbscissaKind = AbscissaKind.SEPARATION
    calib: PiezoCalibration | None = None
    noise_sigma: float | tuple[float, ...] | None = None
    label: str = "synthetic"

    def __post_init__(self):
        object.__setattr__(self, "abscissae", tuple(float(x) for x in np.atleast_1d(self.abscissae)))
        for name in ("sigma", "noise_sigma"):
            val = getattr(self, name)
            if val is not None and np.ndim(val) > 0:
                object.__setattr__(self, name, tuple(float(x) for x in val))
        if np.any(~(np.asarray(self.sigma, dtype=float) > 0)):
            raise DomainError("synthetic sigma must be > 0")
        if self.noise_sigma is not None and np.any(~(np.asarray(self.noise_sigma, dtype=float) >= 0)):
            raise DomainError("noise sigma must be >= 0")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if AbscissaKind(self.kind) is AbscissaKind.PIEZO_VOLTAGE and self.calib is None:
            raise DomainError("piezo-voltage synthesis needs a PiezoCalibration")

    def to_dict(self) -> dict:
        return {
            "truth_model": self.truth_model.to_dict(),
            "abscissae": list(self.abscissae),
            "sigma": list(self.sigma) if isinstance(self.sigma, tuple) else self.sigma,
            "noise_sigma": list(self.noise_sigma) if isinstance(self.noise_sigma, tuple) else self.noise_sigma,
            "seed": int(self.seed),
            "kind": AbscissaKind(self.kind).value,
            "calib": None if self.calib is None else {"beta": self.calib.beta, "v0_pzt": self.calib.v0_pzt},
            "label": self.label,
            "generator": GENERATOR,
        }


def generate_synthetic(spec: SynthSpec) -> Dataset:
    x = np.asarray(spec.abscissae, dtype=float)
    kind = AbscissaKind(spec.kind)
    d = piezo_to_separation(x, spec.calib) if kind is AbscissaKind.PIEZO_VOLTAGE else x
    d = np.atleast_1d(d)
    bad = ~spec.truth_model.in_domain(d)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise DomainError(f"truth model {spec.truth_model.kind!r} undefined at design point {i} (x={x[i]!r}, d={d[i]!r} m)")
    truth = np.atleast_1d(spec.truth_model.capacitance(d))
    sigma = np.broadcast_to(np.asarray(spec.sigma, dtype=float), x.shape)
    noise_sigma = sigma if spec.noise_sigma is None else np.broadcast_to(np.asarray(spec.noise_sigma, dtype=float), x.shape)
    rng = np.random.Generator(np.random.Philox(int(spec.seed)))
    noise = rng.standard_normal(x.shape)
    cap = truth + noise_sigma * noise
    return Dataset.from_arrays(kind, x, cap, sigma, label=spec.label)
