"""Fit reports: JSON document and human-readable summary."""

from __future__ import annotations

import json
import math
import platform

import numpy as np

from .. import __version__
from ..models import CapacitanceModel
from .fitting import FitResult

# internal unit -> (display unit, factor)
_DISPLAY = {
    "F": ("pF", 1e12),
    "F/m": ("pF/um", 1e6),
    "F m^-0.3": ("pF m^-0.3", 1e12),
    "V": ("V", 1.0),
}


def versions() -> dict:
    return {"capcal": __version__, "numpy": np.__version__, "python": platform.python_version()}


def fit_to_dict(fit: FitResult) -> dict:
    """Machine-readable report. Values are SI; ``unit`` names the unit."""
    return {
        "model": fit.model.to_dict(),
        "family": fit.family,
        "params": [
            {"name": k, "value": v, "sigma": fit.sigmas.get(k, math.nan), "unit": fit.units.get(k, "")}
            for k, v in fit.params.items()
        ],
        "chi2": fit.chi2,
        "dof": fit.dof,
        "reduced_chi2": fit.reduced_chi2,
        "p_value": fit.p_value,
        "excluded_points": fit.excluded_points,
        "converged": fit.converged,
        "inputs": fit.inputs,
        "profile": fit.profile,
        "versions": versions(),
    }


def fit_from_dict(data: dict) -> FitResult:
    params = data["params"]
    profile = data.get("profile")
    return FitResult(
        model=CapacitanceModel.from_dict(data["model"]),
        family=data["family"],
        params={p["name"]: p["value"] for p in params},
        sigmas={p["name"]: p["sigma"] for p in params},
        units={p["name"]: p["unit"] for p in params},
        chi2=data["chi2"],
        dof=data["dof"],
        reduced_chi2=data["reduced_chi2"],
        p_value=data["p_value"],
        excluded_points=data["excluded_points"],
        converged=data.get("converged", True),
        inputs=data.get("inputs", {}),
        profile=None if profile is None else [tuple(t) for t in profile],
    )


def _finite_or_none(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite_or_none(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite_or_none(v) for v in obj]
    return obj


def dumps_report(fit: FitResult) -> str:
    return json.dumps(_finite_or_none(fit_to_dict(fit)), indent=2, sort_keys=False) + "\n"


def loads_report(text: str) -> FitResult:
    data = json.loads(text)
    for p in data["params"]:
        if p["sigma"] is None:
            p["sigma"] = math.nan
    if data.get("profile"):
        data["profile"] = [(x, math.inf if y is None else y) for x, y in data["profile"]]
    return fit_from_dict(data)


def _fmt_pm(value: float, sigma: float) -> str:
    if not (math.isfinite(sigma) and sigma > 0):
        return f"{value:.10g}"
    decimals = max(0, 1 - int(math.floor(math.log10(sigma))))
    return f"{value:.{decimals}f} +/- {sigma:.{decimals}f}"


def format_report(fit: FitResult) -> str:
    lines = [f"family: {fit.family}  (model {fit.model.kind})"]
    for name, value in fit.params.items():
        unit, factor = _DISPLAY.get(fit.units.get(name, ""), (fit.units.get(name, ""), 1.0))
        lines.append(f"  {name:8s} = {_fmt_pm(value * factor, fit.sigmas.get(name, math.nan) * factor)} {unit}")
    lines += [
        f"chi2            = {fit.chi2:.6g}",
        f"dof             = {fit.dof}",
        f"reduced chi2    = {fit.reduced_chi2:.12g}",
        f"p-value         = {fit.p_value:.6g}",
        f"excluded points = {fit.excluded_points}",
    ]
    if not fit.converged:
        lines.append("WARNING: fit did not converge (see profile trace in JSON report)")
    return "\n".join(lines) + "\n"


def uncertainty_report(fit: FitResult) -> tuple[str, dict]:
    """Human-readable text and the machine-readable report document."""
    return format_report(fit), fit_to_dict(fit)
