"""2x2 spin-density matrix fields R = [[rho_up, sigma], [conj(sigma), rho_dn]]."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .fields import ComplexField, Grid3, ScalarField, integrate
from .tolerances import DEFAULT, ToleranceConfig

WEIGHT_SUM_TOL = 1e-12  # convex weights must sum to 1 within this


@dataclass(frozen=True)
class SpinDensityField:
    """Hermitian 2x2 matrix field with its intended electron count.

    The container itself only enforces structure (matching grids, a positive
    integer electron count); whether the data is actually an admissible
    spin density is the job of :func:`spinrep.check.check`.
    """

    rho_up: ScalarField
    rho_dn: ScalarField
    sigma: ComplexField
    n_electrons: int

    def __post_init__(self) -> None:
        if not (self.rho_up.grid == self.rho_dn.grid == self.sigma.grid):
            raise ValueError("rho_up, rho_dn and sigma must share one grid")
        n = self.n_electrons
        if not (isinstance(n, (int, np.integer)) and int(n) >= 1):
            raise ValueError(f"n_electrons must be a positive integer, got {n!r}")
        object.__setattr__(self, "n_electrons", int(n))

    @property
    def grid(self) -> Grid3:
        return self.rho_up.grid

    @cached_property
    def rho_total(self) -> ScalarField:
        return ScalarField(self.grid, self.rho_up.values + self.rho_dn.values)

    @cached_property
    def scale(self) -> float:
        """max of the total density; the reference scale for tolerances."""
        return float(np.max(self.rho_total.values))


def det_field(r: SpinDensityField, tol: ToleranceConfig = DEFAULT) -> ScalarField:
    """Pointwise determinant rho_up*rho_dn - |sigma|^2.

    Negative values within round-off of zero (magnitude up to
    ``tol.det_clamp_rel * max(rho)^2``) are clamped to 0 so that downstream
    square roots stay real; larger negatives are genuine PSD violations and
    are preserved for the checker to flag.
    """
    s = r.sigma.values
    raw = r.rho_up.values * r.rho_dn.values - (s.real * s.real + s.imag * s.imag)
    clamp = tol.det_clamp(r.scale)
    out = np.where((raw < 0.0) & (raw >= -clamp), 0.0, raw)
    return ScalarField(r.grid, out)


def trace_integral(r: SpinDensityField) -> float:
    """integral of rho_up + rho_dn (should equal n_electrons)."""
    return integrate(r.rho_up) + integrate(r.rho_dn)


def spin_swap(r: SpinDensityField) -> SpinDensityField:
    """Exchange the spin channels: (rho_up, rho_dn, sigma) -> (rho_dn, rho_up, conj sigma).

    Involutive, leaves the determinant and total density unchanged.
    """
    return SpinDensityField(
        rho_up=r.rho_dn,
        rho_dn=r.rho_up,
        sigma=ComplexField(r.grid, np.conj(r.sigma.values)),
        n_electrons=r.n_electrons,
    )


def convex_combine(pairs: Sequence[tuple[float, SpinDensityField]]) -> SpinDensityField:
    """Weighted sum sum_i w_i R_i with convex weights.

    Weights must be nonnegative and sum to 1 within ``WEIGHT_SUM_TOL``; all
    fields must share one grid and one electron count (a convex mixture of
    states with different particle numbers is not a state of either).
    """
    if len(pairs) == 0:
        raise ValueError("convex_combine needs at least one (weight, field) pair")
    weights = np.array([w for w, _ in pairs], dtype=np.float64)
    if np.any(weights < 0.0) or not np.all(np.isfinite(weights)):
        raise ValueError(f"weights must be finite and nonnegative, got {weights}")
    if abs(float(np.sum(weights)) - 1.0) > WEIGHT_SUM_TOL:
        raise ValueError(f"weights must sum to 1 within {WEIGHT_SUM_TOL}, got {np.sum(weights)}")
    first = pairs[0][1]
    for _, r in pairs[1:]:
        if r.grid != first.grid:
            raise ValueError("all fields in a convex combination must share one grid")
        if r.n_electrons != first.n_electrons:
            raise ValueError("all fields in a convex combination must share n_electrons")
    up = sum(w * r.rho_up.values for w, r in pairs)
    dn = sum(w * r.rho_dn.values for w, r in pairs)
    sg = sum(w * r.sigma.values for w, r in pairs)
    return SpinDensityField(
        rho_up=ScalarField(first.grid, up),
        rho_dn=ScalarField(first.grid, dn),
        sigma=ComplexField(first.grid, sg),
        n_electrons=first.n_electrons,
    )


