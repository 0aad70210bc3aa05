"""Comparison table and lens curves in display units (pF, pF/m, nm, um)."""

from __future__ import annotations

import warnings

import numpy as np

from .constants import NM, PF, UM
from .errors import ValidityWarning
from .models import (
    DEFAULT_THETA,
    REFERENCE_LENS,
    ModifiedLensGeometry,
    SphereGeometry,
    exact_capacitance,
    exact_force_norm,
    expansion_capacitance,
    expansion_force_norm,
    modified_capacitance,
    modified_capacitance_large,
    modified_capacitance_small,
    pfa_capacitance,
    pfa_force_norm,
)

TABLE_SEPARATIONS_UM = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0)
TABLE_COLUMNS = ("d_um", "C_exact_pF", "C_pfa_pF", "C_expansion_pF", "F_exact_pF_per_m", "F_pfa_pF_per_m", "F_expansion_pF_per_m")
CURVE_COLUMNS = ("d_nm", "C_mod_pF", "C_small_pF", "C_large_pF")


def comparison_table(
    radius: float = 151.3 * UM,
    separations_um=TABLE_SEPARATIONS_UM,
    theta: float = DEFAULT_THETA,
    table_compat: bool = False,
) -> list[tuple[float, ...]]:
    """Rows of (d, C exact/PFA/expansion, normalized force exact/PFA/expansion)."""
    geom = SphereGeometry(radius)
    rows = []
    for d_um in separations_um:
        d = d_um * UM
        rows.append((
            float(d_um),
            exact_capacitance(d, geom) / PF,
            pfa_capacitance(d, geom) / PF,
            expansion_capacitance(d, geom, theta, table_compat=table_compat) / PF,
            exact_force_norm(d, geom) / PF,
            pfa_force_norm(d, geom) / PF,
            expansion_force_norm(d, geom) / PF,
        ))
    return rows


def format_table_row(row) -> list[str]:
    """Fixed decimals: 1 for d, 5 for capacitance (pF), 2 for force (pF/m)."""
    d, *caps_forces = row
    caps, forces = caps_forces[:3], caps_forces[3:]
    return [f"{d:.1f}"] + [f"{c:.5f}" for c in caps] + [f"{f:.2f}" for f in forces]


def lens_curves(
    geom: ModifiedLensGeometry = REFERENCE_LENS,
    d_lo: float = 30 * NM,
    d_hi: float = 10 * UM,
    samples: int = 400,
    c_tilde: float = 0.0,
) -> np.ndarray:
    """Lens capacitance and its two approximations on a log grid.

    Columns follow :data:`CURVE_COLUMNS`. Each approximation is evaluated
    across the whole range, including where it is not meant to be accurate.
    """
    d = np.geomspace(d_lo, d_hi, samples)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        small = modified_capacitance_small(d, geom) + c_tilde
        large = modified_capacitance_large(d, geom, c_tilde)
    full = modified_capacitance(d, geom, c_tilde)
    return np.column_stack([d / NM, full / PF, small / PF, large / PF])
