"""Chi-squared fitting of capacitance-versus-separation data.

Every supported model family is linear in its free parameters once the
separations are fixed, so :func:`fit_linear` is a single weighted
least-squares solve. When separations come from piezo voltages with an
unknown zero point, :func:`fit_with_contact_voltage` profiles chi-squared
over that zero point and solves the linear problem at each candidate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from ..constants import NM
from ..errors import DomainError, EmptyObjectiveError, ObjectiveError, SingularMatrixError
from ..models import (
    MTO_SPHERE,
    REFERENCE_LENS,
    CapacitanceModel,
    ExactSphere,
    IdealLog,
    ModifiedLens,
    ModifiedLensGeometry,
    ParasiticParams,
    PfaLeading,
    PowerLaw,
    SphereGeometry,
    modified_capacitance,
)
from ..numerics import chi2_p_value, minimize_scalar, weighted_linear_least_squares
from .data import AbscissaKind, Dataset


@dataclass(frozen=True)
class PiezoCalibration:
    beta: float  # m/V
    v0_pzt: float  # V

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError(f"piezo beta must be > 0, got {self.beta}")


def piezo_to_separation(v_pzt, calib: PiezoCalibration):
    """``beta * (V0 - V)``. Negative results are returned as-is."""
    d = calib.beta * (calib.v0_pzt - np.asarray(v_pzt, dtype=float))
    return float(d) if np.ndim(d) == 0 else d


def separations(ds: Dataset, calib: PiezoCalibration | None = None) -> np.ndarray:
    if ds.kind is AbscissaKind.PIEZO_VOLTAGE:
        if calib is None:
            raise DomainError("piezo-voltage dataset needs a PiezoCalibration")
        return piezo_to_separation(ds.x, calib)
    return ds.x


class Chi2Result(NamedTuple):
    chi2: float
    excluded: int
    used: int


def chi_squared(ds: Dataset, spec: CapacitanceModel, calib: PiezoCalibration | None = None) -> Chi2Result:
    """Sum of squared weighted residuals over points inside the model domain.

    Points whose separation falls outside the model's domain (``d <= 0``
    for logarithmic models) are skipped and counted in ``excluded``.
    """
    d = separations(ds, calib)
    mask = spec.in_domain(d)
    if not mask.any():
        raise EmptyObjectiveError(f"all {len(ds)} points fall outside the domain of model {spec.kind!r}")
    r = (ds.capacitance[mask] - np.atleast_1d(spec.capacitance(d[mask]))) / ds.sigma[mask]
    return Chi2Result(math.fsum(r * r), int((~mask).sum()), int(mask.sum()))


# -- linear families ------------------------------------------------------------


@dataclass(frozen=True)
class LinearFamily:
    """A model whose free parameters enter linearly.

    ``model(d) = offset(d) + columns(d) @ params``.
    """

    name: str
    param_names: tuple[str, ...]
    param_units: tuple[str, ...]
    _offset: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    _columns: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    _build: Callable[..., CapacitanceModel] = field(repr=False)
    template: CapacitanceModel = field(repr=False)

    def offset(self, d) -> np.ndarray:
        return np.asarray(self._offset(np.asarray(d, dtype=float)), dtype=float)

    def columns(self, d) -> np.ndarray:
        return np.column_stack(self._columns(np.asarray(d, dtype=float)))

    def build(self, params) -> CapacitanceModel:
        return self._build(*params)

    def in_domain(self, d) -> np.ndarray:
        return self.template.in_domain(d)


FAMILY_NAMES = ("exact-parasitic", "pfa-parasitic", "modified", "ideallog", "powerlaw")


def make_family(
    name: str,
    sphere: SphereGeometry = MTO_SPHERE,
    lens: ModifiedLensGeometry = REFERENCE_LENS,
) -> LinearFamily:
    """Build a fit family. ``sphere`` also supplies ``R`` for ``ideallog``."""
    ones = np.ones_like
    if name == "exact-parasitic":
        tmpl = ExactSphere(sphere)
        return LinearFamily(
            name, ("a1", "a2"), ("F", "F/m"),
            tmpl.capacitance, lambda d: (ones(d), -d),
            lambda a1, a2: ExactSphere(sphere, ParasiticParams(a1, a2)), tmpl,
        )
    if name == "pfa-parasitic":
        tmpl = PfaLeading(sphere)
        return LinearFamily(
            name, ("a1", "a2"), ("F", "F/m"),
            tmpl.capacitance, lambda d: (ones(d), -d),
            lambda a1, a2: PfaLeading(sphere, ParasiticParams(a1, a2)), tmpl,
        )
    if name == "modified":
        tmpl = ModifiedLens(lens)
        return LinearFamily(
            name, ("c_tilde",), ("F",),
            lambda d: modified_capacitance(d, lens, 0.0), lambda d: (ones(d),),
            lambda c: ModifiedLens(lens, c), tmpl,
        )
    if name == "ideallog":
        tmpl = IdealLog(0.0, 0.0, sphere)
        return LinearFamily(
            name, ("a1", "a3"), ("F", "F"),
            np.zeros_like, lambda d: (ones(d), np.log(sphere.radius / d)),
            lambda a1, a3: IdealLog(a1, a3, sphere), tmpl,
        )
    if name == "powerlaw":
        tmpl = PowerLaw(0.0, 0.0)
        return LinearFamily(
            name, ("a1", "a3"), ("F", "F m^-0.3"),
            np.zeros_like, lambda d: (ones(d), d**0.3),
            lambda a1, a3: PowerLaw(a1, a3), tmpl,
        )
    raise DomainError(f"unknown fit family {name!r}; choose from {', '.join(FAMILY_NAMES)}")


@dataclass
class FitResult:
    model: CapacitanceModel
    family: str
    params: dict[str, float]
    sigmas: dict[str, float]
    units: dict[str, str]
    chi2: float
    dof: int
    reduced_chi2: float
    p_value: float
    excluded_points: int = 0
    converged: bool = True
    inputs: dict = field(default_factory=dict)
    profile: list[tuple[float, float]] | None = None


def _solve(family: LinearFamily, d, c, s):
    mask = family.in_domain(d)
    if not mask.any():
        raise EmptyObjectiveError(f"all {len(d)} points fall outside the domain of family {family.name!r}")
    dm = d[mask]
    sol = weighted_linear_least_squares(family.columns(dm), c[mask] - family.offset(dm), s[mask])
    return sol, mask


def _dof(n_used: int, n_params: int) -> int:
    dof = n_used - n_params
    if dof < 1:
        raise DomainError(f"{n_used} usable points cannot constrain {n_params} parameters")
    return dof


def fit_linear(ds: Dataset, family: LinearFamily, calib: PiezoCalibration | None = None) -> FitResult:
    """Exact weighted least-squares fit of the family's linear parameters."""
    d = separations(ds, calib)
    sol, mask = _solve(family, d, ds.capacitance, ds.sigma)
    p = len(family.param_names)
    dof = _dof(int(mask.sum()), p)
    sig = np.sqrt(np.diag(sol.covariance))
    inputs = {}
    if calib is not None:
        inputs = {"beta": calib.beta, "v0_pzt": calib.v0_pzt}
    return FitResult(
        model=family.build(sol.params),
        family=family.name,
        params=dict(zip(family.param_names, map(float, sol.params))),
        sigmas=dict(zip(family.param_names, map(float, sig))),
        units=dict(zip(family.param_names, family.param_units)),
        chi2=sol.residual_chi2,
        dof=dof,
        reduced_chi2=sol.residual_chi2 / dof,
        p_value=chi2_p_value(sol.residual_chi2, dof),
        excluded_points=int((~mask).sum()),
        inputs=inputs,
    )


def profile_chi2(ds: Dataset, family: LinearFamily, beta: float) -> Callable[[float], float]:
    """Chi-squared minimised over the linear parameters, as a function of V0."""
    v = ds.x
    c = ds.capacitance
    s = ds.sigma
    p = len(family.param_names)

    def objective(v0: float) -> float:
        d = beta * (v0 - v)
        try:
            sol, mask = _solve(family, d, c, s)
        except (EmptyObjectiveError, SingularMatrixError, DomainError):
            return math.inf
        if mask.sum() <= p:
            return math.inf
        return sol.residual_chi2

    return objective


def fit_with_contact_voltage(
    ds: Dataset,
    family: LinearFamily,
    beta: float,
    v0_bounds: tuple[float, float] | None = None,
    tol: float = 1e-10,
    scan_points: int = 201,
    curvature_step: float = 1e-3,
) -> FitResult:
    """Fit the linear parameters together with the piezo zero point ``V0``.

    A coarse scan of the profile locates the basin, Brent's method refines
    it. The ``V0`` uncertainty is ``sqrt(2 / chi2'')`` from the profile
    curvature; the linear parameters take their uncertainties from the full
    two-block covariance at the optimum.
    """
    if ds.kind is not AbscissaKind.PIEZO_VOLTAGE:
        raise DomainError("contact-voltage fit needs a piezo-voltage dataset")
    if not beta > 0:
        raise DomainError(f"beta must be > 0, got {beta}")
    v = ds.x
    if v0_bounds is None:
        v0_bounds = (float(v.max()) - 5.0, float(v.max()) + 10.0)
    lo, hi = map(float, v0_bounds)
    if not lo < hi:
        raise DomainError(f"need v0 bounds lo < hi, got [{lo}, {hi}]")

    objective = profile_chi2(ds, family, beta)
    grid = np.linspace(lo, hi, scan_points)
    trace = [(float(g), objective(float(g))) for g in grid]
    vals = np.array([t[1] for t in trace])
    inputs = {"beta": beta, "v0_bounds": [lo, hi], "tolerances": {"v0": tol}}

    converged = bool(np.isfinite(vals).any())
    if converged:
        i = int(np.argmin(vals))
        a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        try:
            res = minimize_scalar(objective, a, b, tol=tol)
            v0, converged = res.x, res.converged
        except ObjectiveError:
            v0, converged = float(grid[i]), False
        if v0 - lo <= 2 * tol or hi - v0 <= 2 * tol:
            converged = False
    else:
        v0 = float(grid[0])

    calib = PiezoCalibration(beta, v0)
    try:
        lin = fit_linear(ds, family, calib)
    except (EmptyObjectiveError, SingularMatrixError, DomainError):
        raise ObjectiveError(f"no admissible fit anywhere in V0 range [{lo}, {hi}]", x=v0) from None

    p = len(family.param_names)
    dof = _dof(lin.dof + p, p + 1)
    h = curvature_step
    f0, fp, fm = objective(v0), objective(v0 + h), objective(v0 - h)
    curv = (fp - 2.0 * f0 + fm) / (h * h)
    if math.isfinite(curv) and curv > 0:
        sigma_v0 = math.sqrt(2.0 / curv)
    else:
        sigma_v0 = math.nan
        converged = False

    sigmas = dict(lin.sigmas)
    d = separations(ds, calib)
    mask = family.in_domain(d)
    try:
        sigmas.update(_joint_sigmas(ds, family, lin.model, calib, mask))
    except SingularMatrixError:
        pass
    sigmas["v0_pzt"] = sigma_v0

    params = dict(lin.params)
    params["v0_pzt"] = v0
    units = dict(lin.units)
    units["v0_pzt"] = "V"
    chi2 = lin.chi2
    return FitResult(
        model=lin.model,
        family=family.name,
        params=params,
        sigmas=sigmas,
        units=units,
        chi2=chi2,
        dof=dof,
        reduced_chi2=chi2 / dof,
        p_value=chi2_p_value(chi2, dof),
        excluded_points=lin.excluded_points,
        converged=converged,
        inputs=inputs,
        profile=trace,
    )


def _joint_sigmas(ds, family, model, calib, mask) -> dict[str, float]:
    # Jacobian in (linear params, V0); V0 column by central difference of the model
    v = ds.x[mask]
    h = 1e-6 * max(1.0, abs(calib.v0_pzt))
    d = calib.beta * (calib.v0_pzt - v)
    up = np.atleast_1d(model.capacitance(calib.beta * (calib.v0_pzt + h - v)))
    dn = np.atleast_1d(model.capacitance(calib.beta * (calib.v0_pzt - h - v)))
    jac = np.column_stack([family.columns(d), (up - dn) / (2 * h)])
    cov = weighted_linear_least_squares(jac, np.zeros(len(v)), ds.sigma[mask]).covariance
    sig = np.sqrt(np.diag(cov))
    return dict(zip(family.param_names, map(float, sig[:-1])))


def refit_power_law_constants(
    geom: ModifiedLensGeometry = REFERENCE_LENS,
    d_lo: float = 30 * NM,
    d_hi: float = 100 * NM,
    n_points: int = 200,
) -> tuple[float, float]:
    """Least-squares ``(A1, A3)`` of ``A1 + A3 (d/R)**0.3`` to the lens capacitance.

    The fit is unweighted on a uniform grid with the integration constant
    set to zero.
    """
    if not 0 < d_lo < d_hi:
        raise DomainError(f"need 0 < d_lo < d_hi, got [{d_lo}, {d_hi}]")
    d = np.linspace(d_lo, d_hi, n_points)
    design = np.column_stack([np.ones_like(d), (d / geom.r) ** 0.3])
    sol = weighted_linear_least_squares(design, modified_capacitance(d, geom, 0.0), np.ones_like(d))
    return float(sol.params[0]), float(sol.params[1])
