"""Closed-form pointwise square root of the 2x2 spin-density matrix field.

For a PSD 2x2 matrix R with trace rho and determinant d,

    sqrt(R) = (R + sqrt(d) I) / sqrt(rho + 2 sqrt(d)),

which gives the entries used below:

    r_up = (rho_up + sqrt(d)) / sqrt(rho + 2 sqrt(d))
    r_dn = (rho_dn + sqrt(d)) / sqrt(rho + 2 sqrt(d))
    s    = sigma / sqrt(rho + 2 sqrt(d))

with det(sqrt R) = sqrt(d).  Where rho + 2 sqrt(d) falls below a floor the
matrix is numerically zero and sqrt(R) is set to 0.

The eigen densities of R are recovered from the sqrt entries rather than by
a direct eigensolve: with Delta = (r_up - r_dn)^2 + 4 |s|^2 the eigenvalues
of sqrt(R) are (r_up + r_dn +- sqrt(Delta)) / 2, and squaring them gives
rho_plus / rho_minus.  This route keeps sqrt(rho_plus), sqrt(rho_minus)
directly available for the regularity checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .check import seminorm_condition
from .fields import ComplexField, Grid3, ScalarField
from .spin_density import SpinDensityField, det_field
from .tolerances import DEFAULT, ToleranceConfig


class NotPositiveSemidefiniteError(ValueError):
    """Input field violates rho >= 0 or det >= 0 beyond tolerance."""


@dataclass(frozen=True)
class SqrtField:
    """Entries of the pointwise matrix square root (itself Hermitian PSD)."""

    r_up: ScalarField
    r_dn: ScalarField
    s: ComplexField
    n_electrons: int

    @property
    def grid(self) -> Grid3:
        return self.r_up.grid


@dataclass(frozen=True)
class EigenDensities:
    """Pointwise eigenvalue fields of R, ordered rho_plus >= rho_minus."""

    rho_plus: ScalarField
    rho_minus: ScalarField

    @property
    def grid(self) -> Grid3:
        return self.rho_plus.grid


def _validate_psd(r: SpinDensityField, tol: ToleranceConfig) -> None:
    scale = r.scale
    neg = tol.neg_tol(scale)
    for name, f in (("rho_up", r.rho_up), ("rho_dn", r.rho_dn)):
        mn = float(np.min(f.values))
        if mn < -neg:
            loc = np.unravel_index(np.argmin(f.values), f.values.shape)
            raise NotPositiveSemidefiniteError(
                f"{name} = {mn:.3e} at {tuple(int(i) for i in loc)} (tolerance -{neg:.3e})"
            )
    dt = det_field(r, tol).values
    mn = float(np.min(dt))
    if mn < -tol.det_tol(scale):
        loc = np.unravel_index(np.argmin(dt), dt.shape)
        raise NotPositiveSemidefiniteError(
            f"det = {mn:.3e} at {tuple(int(i) for i in loc)} (tolerance -{tol.det_tol(scale):.3e})"
        )


def sqrt_field(r: SpinDensityField, tol: ToleranceConfig = DEFAULT) -> SqrtField:
    """Pointwise matrix square root; rejects inputs that are not PSD within tolerance."""
    _validate_psd(r, tol)
    up = np.clip(r.rho_up.values, 0.0, None)
    dn = np.clip(r.rho_dn.values, 0.0, None)
    sq_det = np.sqrt(np.clip(det_field(r, tol).values, 0.0, None))
    denom = up + dn + 2.0 * sq_det
    floor = tol.sqrt_floor(r.scale)
    mask = denom >= floor
    inv = np.zeros(r.grid.dims)
    np.divide(1.0, np.sqrt(denom), out=inv, where=mask)
    return SqrtField(
        r_up=ScalarField(r.grid, (up + sq_det) * inv),
        r_dn=ScalarField(r.grid, (dn + sq_det) * inv),
        s=ComplexField(r.grid, r.sigma.values * inv),
        n_electrons=r.n_electrons,
    )


def reconstruct(sq: SqrtField) -> SpinDensityField:
    """Square the sqrt field back into a spin density: sqrt(R) @ sqrt(R)."""
    ru, rd, s = sq.r_up.values, sq.r_dn.values, sq.s.values
    s2 = s.real * s.real + s.imag * s.imag
    return SpinDensityField(
        rho_up=ScalarField(sq.grid, ru * ru + s2),
        rho_dn=ScalarField(sq.grid, rd * rd + s2),
        sigma=ComplexField(sq.grid, s * (ru + rd)),
        n_electrons=sq.n_electrons,
    )


def _sqrt_eigen_arrays(sq: SqrtField) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of sqrt(R), i.e. sqrt(rho_plus) and sqrt(rho_minus)."""
    ru, rd, s = sq.r_up.values, sq.r_dn.values, sq.s.values
    delta = (ru - rd) ** 2 + 4.0 * (s.real * s.real + s.imag * s.imag)
    root = np.sqrt(delta)
    sp = 0.5 * (ru + rd + root)
    # analytically >= 0; clamp the round-off negatives
    sm = np.clip(0.5 * (ru + rd - root), 0.0, None)
    return sp, sm


def eigen_densities(r: SpinDensityField, tol: ToleranceConfig = DEFAULT) -> EigenDensities:
    """Ordered eigenvalue fields rho_plus >= rho_minus of R, via the sqrt entries."""
    sp, sm = _sqrt_eigen_arrays(sqrt_field(r, tol))
    return EigenDensities(
        rho_plus=ScalarField(r.grid, sp * sp),
        rho_minus=ScalarField(r.grid, sm * sm),
    )


def eigen_regularity_check(
    r: SpinDensityField,
    tol: ToleranceConfig = DEFAULT,
    refined: SpinDensityField | None = None,
):
    """H^1 condition on the square roots of the eigen densities.

    An admissible R has sqrt(rho_plus), sqrt(rho_minus) in H^1; this evaluates
    the two gradient seminorms exactly like the sqrt(rho) condition of the
    main checker (finite -> pass, unstable under refinement -> fail) and
    returns the two ConditionResult entries.
    """
    sp, sm = _sqrt_eigen_arrays(sqrt_field(r, tol))
    fine = None
    if refined is not None:
        fine = _sqrt_eigen_arrays(sqrt_field(refined, tol))
    results = []
    for idx, name in ((0, "sqrt_rho_plus_h1"), (1, "sqrt_rho_minus_h1")):
        arr = (sp, sm)[idx]
        refined_pair = None
        if fine is not None:
            refined_pair = (refined.grid, fine[idx])
        results.append(
            seminorm_condition(name, r.grid, arr, tol, refined=refined_pair)
        )
    return tuple(results)
