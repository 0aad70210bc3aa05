"""Electrostatic models of a sphere (or modified lens) above a plane.

All inputs and outputs are SI. "Normalized force" means ``-F / (V - V0)**2``
in F/m, which is positive for the attractive electrostatic force.

The closed-form models accept scalars or numpy arrays. The bispherical
series (:func:`exact_capacitance`, :func:`exact_force_norm`) are scalar.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, ClassVar

import numpy as np

from .constants import EPSILON0, FOUR_PI_EPS0, MM, NM, PF, TWO_PI_EPS0, UM
from .errors import DomainError, ValidityWarning
from .numerics import SeriesResult, central_derivative, loglog_slope, sum_series

DEFAULT_THETA = 0.5

#: Force expansion coefficients c_k for k = -1 ... 6.
EXPANSION_COEFFS: tuple[float, ...] = (
    0.5,
    -1.18260,
    22.2375,
    -571.366,
    9592.45,
    -90200.5,
    383084.0,
    -300357.0,
)

#: Small-separation power-law constants for the reference lens, in F.
POWER_LAW_A1 = 32.804 * PF
POWER_LAW_A3 = -360.48 * PF

SERIES_RTOL = 1e-13


@dataclass(frozen=True)
class PhysicalConstants:
    epsilon0: float = EPSILON0


@dataclass(frozen=True)
class SphereGeometry:
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError(f"sphere radius must be > 0, got {self.radius}")


@dataclass(frozen=True)
class ModifiedLensGeometry:
    """Lens of radius ``r`` with two modified sectors near its bottom point.

    Sector radii ``r1 >= r >= r2`` and heights ``h_small <= h_large``.
    Equalities are allowed so that degenerate limits can be evaluated.
    """

    r: float
    r1: float
    r2: float
    h_small: float
    h_large: float

    def __post_init__(self):
        if not (self.r > 0 and self.r1 > 0 and self.r2 > 0):
            raise DomainError(f"lens radii must be > 0, got r={self.r}, r1={self.r1}, r2={self.r2}")
        if not (self.h_small >= 0 and self.h_large >= 0):
            raise DomainError(f"sector heights must be >= 0, got h={self.h_small}, H={self.h_large}")
        if not self.r2 <= self.r <= self.r1:
            raise DomainError(f"need r2 <= r <= r1, got r2={self.r2}, r={self.r}, r1={self.r1}")
        if not self.h_small <= self.h_large:
            raise DomainError(f"need h <= H, got h={self.h_small}, H={self.h_large}")


REFERENCE_LENS = ModifiedLensGeometry(r=30.9 * MM, r1=49.4 * MM, r2=30.0 * UM, h_small=8.0 * NM, h_large=250.0 * NM)
MTO_SPHERE = SphereGeometry(151.3 * UM)


@dataclass(frozen=True)
class VoltageConfig:
    v: float
    v0: float = 0.0

    @property
    def delta_sq(self) -> float:
        return (self.v - self.v0) ** 2


@dataclass(frozen=True)
class ParasiticParams:
    a1: float  # F
    a2: float  # F/m


def _check_theta(theta: float) -> None:
    if not 0.0 <= theta <= 1.0:
        raise DomainError(f"theta must lie in [0, 1], got {theta}")


def _positive(d, what: str = "separation d"):
    arr = np.asarray(d, dtype=float)
    if np.any(~(arr > 0)):
        bad = arr[~(arr > 0)].flat[0] if arr.ndim else float(arr)
        raise DomainError(f"{what} must be > 0, got {bad}")
    return arr


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


# -- perfect sphere: exact bispherical series ---------------------------------


def alpha_parameter(d: float, geom: SphereGeometry) -> float:
    """Bispherical parameter with ``cosh(alpha) = 1 + d/R``."""
    if not d >= 0:
        raise DomainError(f"separation d must be >= 0, got {d}")
    x = d / geom.radius
    return math.log1p(x + math.sqrt(x * (x + 2.0)))


def exact_capacitance_series(d: float, geom: SphereGeometry, rtol: float = SERIES_RTOL) -> SeriesResult:
    """``sum_n sinh(alpha)/sinh(n alpha)``, with summation diagnostics."""
    if not d > 0:
        raise DomainError(f"separation d must be > 0, got {d}")
    a = alpha_parameter(d, geom)
    sa = math.sinh(a)
    q = math.exp(-a)
    return sum_series(lambda n: sa / math.sinh(n * a), lambda n: q, rtol=rtol)


@functools.lru_cache(maxsize=1 << 16)
def exact_capacitance(d: float, geom: SphereGeometry) -> float:
    return FOUR_PI_EPS0 * geom.radius * exact_capacitance_series(d, geom).value


def exact_force_norm_series(d: float, geom: SphereGeometry, rtol: float = SERIES_RTOL) -> SeriesResult:
    if not d > 0:
        raise DomainError(f"separation d must be > 0, got {d}")
    a = alpha_parameter(d, geom)
    cotha = 1.0 / math.tanh(a)
    q = math.exp(-a)

    def term(n: int) -> float:
        na = n * a
        return (n / math.tanh(na) - cotha) / math.sinh(na)

    # |t_{m+1}/t_m| <= ((m+1)/m) e^{-alpha}, decreasing in m
    return sum_series(term, lambda n: (n + 1) / n * q, rtol=rtol)


@functools.lru_cache(maxsize=1 << 16)
def exact_force_norm(d: float, geom: SphereGeometry) -> float:
    """Exact normalized force ``-F/(V-V0)**2`` in F/m (positive)."""
    return TWO_PI_EPS0 * exact_force_norm_series(d, geom).value


def exact_force(d: float, geom: SphereGeometry, volts: VoltageConfig) -> float:
    """Force in N; negative means attraction."""
    return -volts.delta_sq * exact_force_norm(d, geom)


def electrostatic_energy(d: float, geom: SphereGeometry, volts: VoltageConfig) -> float:
    return -0.5 * exact_capacitance(d, geom) * volts.delta_sq


# -- small-separation forms ---------------------------------------------------


def smallsep_capacitance(d, geom: SphereGeometry, theta: float = DEFAULT_THETA, leading_only: bool = False):
    """Small-separation capacitance ``2 pi eps0 R (ln(R/d) + ln 2 + 23/20 + theta/63)``.

    With ``leading_only`` only the logarithm is kept, which is the PFA.
    """
    _check_theta(theta)
    arr = _positive(d)
    R = geom.radius
    if np.any(arr >= R):
        raise DomainError(f"small-separation form needs d < R = {R}, got {arr.max()}")
    if np.any(arr > 0.1 * R):
        warnings.warn(f"small-separation capacitance used at d/R = {arr.max() / R:.3g} > 0.1", ValidityWarning, stacklevel=2)
    const = 0.0 if leading_only else math.log(2.0) + 23.0 / 20.0 + theta / 63.0
    return _out(TWO_PI_EPS0 * R * (np.log(R / arr) + const))


def pfa_capacitance(d, geom: SphereGeometry):
    arr = _positive(d)
    R = geom.radius
    if np.any(arr > R):
        raise DomainError(f"PFA capacitance needs 0 < d <= R = {R}, got {arr.max()}")
    return _out(TWO_PI_EPS0 * R * np.log(R / arr))


def pfa_force_norm(d, geom: SphereGeometry):
    arr = _positive(d)
    return _out(math.pi * EPSILON0 * geom.radius / arr)


def _expansion_guard(x) -> None:
    if np.any(np.asarray(x) > 0.05):
        warnings.warn(f"power expansion used at d/R = {np.max(x):.3g} > 0.05", ValidityWarning, stacklevel=3)


def expansion_force_norm(d, geom: SphereGeometry, coeffs: tuple[float, ...] = EXPANSION_COEFFS):
    """``2 pi eps0 sum_{k=-1}^{6} c_k (d/R)**k``, summed in ascending k."""
    arr = _positive(d)
    x = arr / geom.radius
    _expansion_guard(x)
    flat = np.atleast_1d(x).ravel()
    vals = np.array([math.fsum(c * xi**k for k, c in enumerate(coeffs, start=-1)) for xi in flat])
    return _out(TWO_PI_EPS0 * vals.reshape(np.shape(x)))


def expansion_capacitance(
    d,
    geom: SphereGeometry,
    theta: float = DEFAULT_THETA,
    coeffs: tuple[float, ...] = EXPANSION_COEFFS,
    table_compat: bool = False,
):
    """Capacitance obtained by integrating the force expansion.

    ``4 pi eps0 R [c_{-1} ln(R/d) + c~ - sum_{k>=0} c_k/(k+1) (d/R)**(k+1)]``
    with ``c~ = ln(2)/2 + 23/40 + theta/126``. ``table_compat=True`` adds the
    power sum instead of subtracting it; that variant is what the published
    comparison table lists, but it is not the antiderivative of the force.
    """
    _check_theta(theta)
    arr = _positive(d)
    R = geom.radius
    x = arr / R
    _expansion_guard(x)
    c_tilde = 0.5 * math.log(2.0) + 23.0 / 40.0 + theta / 126.0
    sign = 1.0 if table_compat else -1.0
    flat_x = np.atleast_1d(x).ravel()
    vals = []
    for xi in flat_x:
        power = math.fsum(coeffs[k + 1] / (k + 1) * xi ** (k + 1) for k in range(0, len(coeffs) - 1))
        vals.append(math.fsum((-coeffs[0] * math.log(xi), c_tilde, sign * power)))
    return _out(FOUR_PI_EPS0 * R * np.array(vals).reshape(np.shape(x)))


# -- modified lens ------------------------------------------------------------


def _xlog(coef: float, num: float, den):
    """``coef * ln(num/den)`` with the convention ``0 * ln(0/x) = 0``."""
    if coef == 0.0:
        return np.zeros_like(den)
    return coef * np.log(num / den)


def modified_force_norm(d, geom: ModifiedLensGeometry):
    arr = _positive(d)
    g = geom
    val = g.r2 / arr + (g.r1 - g.r2) / (arr + g.h_small) - (g.r1 - g.r) / (arr + g.h_small + g.h_large)
    return _out(math.pi * EPSILON0 * val)


def modified_capacitance(d, geom: ModifiedLensGeometry, c_tilde: float = 0.0):
    arr = _positive(d)
    g = geom
    val = (
        _xlog(g.r2, g.r2, arr)
        + _xlog(g.r1 - g.r2, g.r1 - g.r2, arr + g.h_small)
        - _xlog(g.r1 - g.r, g.r1 - g.r, arr + g.h_small + g.h_large)
    )
    return _out(TWO_PI_EPS0 * val + c_tilde)


def modified_capacitance_small(d, geom: ModifiedLensGeometry = REFERENCE_LENS, a1: float = POWER_LAW_A1, a3: float = POWER_LAW_A3):
    """Power-law approximation ``A1 + A3 (d/R)**0.3`` (integration constant excluded)."""
    arr = _positive(d)
    if np.any((arr < 30 * NM) | (arr > 100 * NM)):
        warnings.warn("power-law lens approximation used outside 30-100 nm", ValidityWarning, stacklevel=2)
    return _out(a1 + a3 * (arr / geom.r) ** 0.3)


def modified_capacitance_large(d, geom: ModifiedLensGeometry, c_tilde: float = 0.0):
    """Large-separation asymptote of the modified-lens capacitance."""
    arr = _positive(d)
    if np.any(arr < 1 * UM):
        warnings.warn("large-separation lens asymptote used below 1 um", ValidityWarning, stacklevel=2)
    g = geom
    # R (H/d) ((R1-R)/R - (R-R2)/R * h/H) written without dividing by H
    corr = (g.h_large * (g.r1 - g.r) - g.h_small * (g.r - g.r2)) / arr
    return _out(TWO_PI_EPS0 * (g.r * np.log(g.r / arr) + corr) + c_tilde)


def parasitic_capacitance(d, params: ParasiticParams):
    return _out(params.a1 - params.a2 * np.asarray(d, dtype=float))


# -- model specs ----------------------------------------------------------------

_REGISTRY: dict[str, type["CapacitanceModel"]] = {}


def _register(cls):
    _REGISTRY[cls.kind] = cls
    return cls


@dataclass(frozen=True)
class CapacitanceModel:
    """Base for the closed-form capacitance models a fitter can consume.

    Subclasses implement ``_core`` (capacitance without the parasitic term)
    and ``force_norm``. ``d_min`` is the smallest admissible separation;
    separations at or below zero are invalid unless ``allows_zero``.
    """

    kind: ClassVar[str] = ""
    allows_zero: ClassVar[bool] = False

    def _core(self, d):
        raise NotImplementedError

    def force_norm(self, d):
        """Normalized force of the electrode model; the parasitic term is not included."""
        raise NotImplementedError

    def in_domain(self, d) -> np.ndarray:
        arr = np.asarray(d, dtype=float)
        return arr >= 0 if self.allows_zero else arr > 0

    def capacitance(self, d):
        core = self._core(d)
        para = getattr(self, "parasitic", None)
        if para is not None:
            core = core + parasitic_capacitance(d, para)
        return _out(core)

    def with_parasitic(self, parasitic: ParasiticParams | None):
        return replace(self, parasitic=parasitic)

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        for k, v in asdict(self).items():
            out[k] = v
        return out

    @staticmethod
    def from_dict(data: dict) -> "CapacitanceModel":
        data = dict(data)
        cls = _REGISTRY[data.pop("kind")]
        kwargs = {}
        for k, v in data.items():
            if k == "parasitic":
                v = None if v is None else ParasiticParams(**v)
            elif k == "geom":
                v = ModifiedLensGeometry(**v) if "r1" in v else SphereGeometry(**v)
            kwargs[k] = v
        return cls(**kwargs)


def _map_scalar(fn: Callable[[float], float], d):
    arr = np.asarray(d, dtype=float)
    if arr.ndim == 0:
        return fn(float(arr))
    return np.array([fn(float(x)) for x in arr.ravel()]).reshape(arr.shape)


@_register
@dataclass(frozen=True)
class ExactSphere(CapacitanceModel):
    kind: ClassVar[str] = "exact"
    geom: SphereGeometry = MTO_SPHERE
    parasitic: ParasiticParams | None = None

    def _core(self, d):
        return _map_scalar(lambda x: exact_capacitance(x, self.geom), d)

    def force_norm(self, d):
        return _map_scalar(lambda x: exact_force_norm(x, self.geom), d)


@_register
@dataclass(frozen=True)
class PfaLeading(CapacitanceModel):
    kind: ClassVar[str] = "pfa"
    geom: SphereGeometry = MTO_SPHERE
    parasitic: ParasiticParams | None = None

    def _core(self, d):
        return pfa_capacitance(d, self.geom)

    def force_norm(self, d):
        return pfa_force_norm(d, self.geom)


@_register
@dataclass(frozen=True)
class SmallSepLog(CapacitanceModel):
    kind: ClassVar[str] = "smallsep"
    geom: SphereGeometry = MTO_SPHERE
    theta: float = DEFAULT_THETA
    parasitic: ParasiticParams | None = None

    def _core(self, d):
        return smallsep_capacitance(d, self.geom, self.theta)

    def force_norm(self, d):
        return pfa_force_norm(d, self.geom)


@_register
@dataclass(frozen=True)
class Expansion(CapacitanceModel):
    kind: ClassVar[str] = "expansion"
    geom: SphereGeometry = MTO_SPHERE
    theta: float = DEFAULT_THETA
    parasitic: ParasiticParams | None = None
    table_compat: bool = False

    def _core(self, d):
        return expansion_capacitance(d, self.geom, self.theta, table_compat=self.table_compat)

    def force_norm(self, d):
        return expansion_force_norm(d, self.geom)


@_register
@dataclass(frozen=True)
class ModifiedLens(CapacitanceModel):
    kind: ClassVar[str] = "modified"
    geom: ModifiedLensGeometry = REFERENCE_LENS
    c_tilde: float = 0.0
    parasitic: ParasiticParams | None = None

    def _core(self, d):
        return modified_capacitance(d, self.geom, self.c_tilde)

    def force_norm(self, d):
        return modified_force_norm(d, self.geom)


@_register
@dataclass(frozen=True)
class PowerLaw(CapacitanceModel):
    """``A1 + A3 * d**0.3`` with ``d`` in metres, so ``A3`` is in F m^-0.3."""

    kind: ClassVar[str] = "powerlaw"
    allows_zero: ClassVar[bool] = True
    a1: float = 222.96 * PF
    a3: float = -346.2 * PF
    parasitic: ParasiticParams | None = None

    def _core(self, d):
        arr = np.asarray(d, dtype=float)
        if np.any(~(arr >= 0)):
            raise DomainError(f"power-law model needs d >= 0, got {arr.min()}")
        return self.a1 + self.a3 * arr**0.3

    def force_norm(self, d):
        arr = _positive(d)
        return _out(-0.5 * 0.3 * self.a3 * arr**-0.7)


@_register
@dataclass(frozen=True)
class IdealLog(CapacitanceModel):
    kind: ClassVar[str] = "ideallog"
    a1: float = 0.0
    a3: float = 0.0
    geom: SphereGeometry = field(default_factory=lambda: SphereGeometry(REFERENCE_LENS.r))
    parasitic: ParasiticParams | None = None

    def _core(self, d):
        arr = _positive(d)
        return self.a1 + self.a3 * np.log(self.geom.radius / arr)

    def force_norm(self, d):
        arr = _positive(d)
        return _out(0.5 * self.a3 / arr)


def evaluate_model(spec: CapacitanceModel, d):
    """Capacitance of ``spec`` at separation(s) ``d``, parasitic term included."""
    return spec.capacitance(d)


def model_kinds() -> list[str]:
    return list(_REGISTRY)


def effective_exponent(
    force_norm: Callable[[float], float],
    d_lo: float,
    d_hi: float,
    n_points: int = 50,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Effective power ``p`` in ``|dF/dd| ~ d**-p`` over ``[d_lo, d_hi]``.

    Returns ``(p, separations, gradients)``; gradients are central
    differences of ``force_norm``. The PFA gives exactly 2.
    """
    if not 0 < d_lo < d_hi:
        raise DomainError(f"need 0 < d_lo < d_hi, got [{d_lo}, {d_hi}]")
    if n_points < 3:
        raise DomainError(f"need n_points >= 3, got {n_points}")
    ds = np.geomspace(d_lo, d_hi, n_points)
    grads = np.array([abs(central_derivative(lambda x: float(force_norm(x)), float(x))) for x in ds])
    return -loglog_slope(ds, grads), ds, grads
