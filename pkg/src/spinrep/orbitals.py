"""Explicit orbitals for a rank-1 spin density with constrained spin ratio.

Given R with det R = 0 pointwise and rho_up <= 2 rho_dn, the N spinor
orbitals

    Phi_k = (1/sqrt(N)) * (sigma / sqrt(rho_dn), sqrt(rho_dn)) * exp(2 i pi k f(x))

reproduce R exactly: sum_k Phi_k^a conj(Phi_k^b) = R^{ab} because the phases
cancel in every product.  Here f is the cumulative of the 1-D marginal of
the total density along one axis, rescaled so f runs from 0 to N; the phase
factors make the orbitals orthonormal in the continuum (the overlap integral
of exp(2 i pi (l-k) f) against f' is a full period of a unit circle),
and nearly so on the grid.

Two hypotheses are enforced up to tolerance: the determinant must vanish
(otherwise sigma / sqrt(rho_dn) does not carry the full up density) and the
ratio bound rho_up <= 2 rho_dn (otherwise the kinetic energy of the up
component is not controlled).  On the nodal set of rho_dn the quotient is
replaced by sqrt(rho_up) with phase 0 — sigma vanishes there by the
determinant hypothesis, so reconstruction is unaffected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .fields import (
    ComplexField,
    Grid3,
    ScalarField,
    grad_magnitude_sq,
    integrate_values,
    weighted_gradient_l1,
)
from .check import h1_seminorm
from .spin_density import SpinDensityField, det_field
from .tolerances import DEFAULT, ToleranceConfig

AXIS_NAMES = {"x": 0, "y": 1, "z": 2}


class NullDeterminantError(ValueError):
    """det R is not numerically zero where the construction requires it."""


class RatioHypothesisError(ValueError):
    """rho_up <= 2 rho_dn fails somewhere beyond tolerance."""


class PhaseNormalizationError(ValueError):
    """Cumulative phase missed n_electrons by more than the allowed adjustment."""


@dataclass(frozen=True)
class PhaseFunction:
    """Cumulative phase profile along one axis.

    ``marginal`` is the (renormalized) transverse integral of the density at
    the axis nodes, ``values`` its antiderivative with values[0] = 0 and
    values[-1] = n_electrons.  ``adjustment`` records how far the raw
    cumulative missed n_electrons before renormalization.
    """

    axis: int
    nodes: np.ndarray = field(repr=False)
    marginal: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    n_electrons: int
    adjustment: float
    max_dip: float = 0.0
    quadrature_gap: float = 0.0

    def __post_init__(self) -> None:
        for name in ("nodes", "marginal", "values"):
            arr = np.array(getattr(self, name), dtype=np.float64, copy=True)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class Spinor:
    up: ComplexField
    dn: ComplexField

    @property
    def grid(self) -> Grid3:
        return self.up.grid


@dataclass(frozen=True)
class OrbitalSet:
    grid: Grid3
    n_electrons: int
    orbitals: tuple[Spinor, ...]
    axis: int | None = None
    phase: PhaseFunction | None = None
    diagnostics: Mapping[str, object] = field(default_factory=dict)


# -- phase ------------------------------------------------------------------


def _transverse_marginal(rho: ScalarField, axis: int) -> np.ndarray:
    """Trapezoid integral of rho over the two axes other than ``axis``."""
    v = np.moveaxis(rho.values, axis, 0)
    w = [rho.grid.axis_weights[ax] for ax in range(3) if ax != axis]
    return (v @ w[1]) @ w[0]


def _spectral_antiderivative(fp: np.ndarray, h: float) -> np.ndarray:
    """Antiderivative of samples fp on a uniform grid, zero at the first node.

    The linear trend through the endpoints integrates in closed form; the
    residual is periodic (zero at both ends) and integrates in Fourier space.
    For densities that decay at the box boundary this is spectrally accurate,
    which the oscillatory orbital overlaps require — a cumulative trapezoid
    here would leak its O(h^2) phase error coherently into every overlap.
    """
    n = fp.size
    xi = np.arange(n) * h
    slope = (fp[-1] - fp[0]) / ((n - 1) * h)
    resid = fp - (fp[0] + slope * xi)
    mean = resid.mean()
    ck = np.fft.rfft(resid - mean)
    freq = np.fft.rfftfreq(n, d=h)
    ik = np.zeros_like(ck)
    ik[1:] = ck[1:] / (2j * np.pi * freq[1:])
    osc = np.fft.irfft(ik, n)
    return fp[0] * xi + 0.5 * slope * xi * xi + mean * xi + (osc - osc[0])


def resolve_axis(axis, rho: ScalarField | None = None) -> int:
    """Accept 0/1/2, 'x'/'y'/'z' or 'auto' (needs the density for the spread)."""
    if isinstance(axis, str):
        name = axis.lower()
        if name == "auto":
            if rho is None:
                raise ValueError("axis='auto' requires a density")
            return choose_phase_axis(rho)
        if name in AXIS_NAMES:
            return AXIS_NAMES[name]
        raise ValueError(f"unknown axis {axis!r}")
    ax = int(axis)
    if ax not in (0, 1, 2):
        raise ValueError(f"axis must be 0, 1 or 2, got {axis!r}")
    return ax


def choose_phase_axis(rho: ScalarField) -> int:
    """Axis along which the density marginal has the largest spread (std)."""
    spreads = []
    for ax in range(3):
        m = np.clip(_transverse_marginal(rho, ax), 0.0, None)
        w = rho.grid.axis_weights[ax]
        x = rho.grid.axes[ax]
        mass = float(np.sum(w * m))
        if mass <= 0.0:
            spreads.append(0.0)
            continue
        mean = float(np.sum(w * m * x)) / mass
        var = float(np.sum(w * m * (x - mean) ** 2)) / mass
        spreads.append(math.sqrt(max(var, 0.0)))
    return int(np.argmax(spreads))


def build_phase(
    rho: ScalarField,
    n_electrons: int,
    axis: int = 0,
    tol: ToleranceConfig = DEFAULT,
) -> PhaseFunction:
    """Cumulative phase f with f' = transverse marginal of rho, f(end) = N.

    The raw cumulative ends at integral(rho); it is rescaled to end at N
    exactly and the correction is recorded.  A correction larger than
    ``tol.phase_renorm_factor`` times the normalization tolerance means the
    input was not normalized to start with and is rejected.
    """
    ax = resolve_axis(axis, rho)
    marginal = np.clip(_transverse_marginal(rho, ax), 0.0, None)
    h = rho.grid.spacing[ax]
    # normalization is judged against the canonical (trapezoid) quadrature
    trap_total = float(np.sum(rho.grid.axis_weights[ax] * marginal))
    adjustment = n_electrons - trap_total
    if abs(adjustment) > tol.phase_renorm_factor * tol.norm_tol(n_electrons):
        raise PhaseNormalizationError(
            f"density mass {trap_total!r} is too far from n_electrons={n_electrons} "
            f"to renormalize (|adjustment| {abs(adjustment):.3e} > "
            f"{tol.phase_renorm_factor * tol.norm_tol(n_electrons):.3e})"
        )
    raw = _spectral_antiderivative(marginal, h)
    raw_end = float(raw[-1])
    if raw_end <= 0.0:
        raise PhaseNormalizationError("density has no mass along the phase axis")
    # spectral vs trapezoid gap is integrator truncation, nonzero only for
    # piecewise-smooth marginals; bounded like the monotonicity ringing below
    quadrature_gap = raw_end - trap_total
    if abs(quadrature_gap) > 1e-3 * n_electrons:
        raise PhaseNormalizationError(
            f"spectral and trapezoid cumulatives disagree by {quadrature_gap:.3e}; "
            "the marginal is too rough to integrate spectrally"
        )
    scale = n_electrons / raw_end
    values = raw * scale
    values[-1] = float(n_electrons)
    # The clipped marginal is >= 0, so the true cumulative is non-decreasing;
    # any dip is spectral ringing (noticeable only for marginals that are
    # merely piecewise smooth, e.g. cutoff-windowed pieces).  Flatten it,
    # record it — the orbital Gram check downstream judges the damage — and
    # reject only outright pathological amplitudes.
    dips = np.diff(values)
    max_dip = max(0.0, -float(np.min(dips))) if dips.size else 0.0
    if max_dip > 1e-3 * n_electrons:
        raise PhaseNormalizationError(
            f"cumulative phase decreases by {max_dip:.3e}; "
            "the marginal is too rough to integrate spectrally"
        )
    values = np.maximum.accumulate(values)
    # ringing overshoot ahead of the endpoint would otherwise propagate past N
    np.minimum(values, float(n_electrons), out=values)
    values[-1] = float(n_electrons)
    return PhaseFunction(
        axis=ax,
        nodes=rho.grid.axes[ax],
        marginal=marginal * scale,
        values=values,
        n_electrons=int(n_electrons),
        adjustment=adjustment,
        max_dip=max_dip,
        quadrature_gap=quadrature_gap,
    )


# -- base spinor --------------------------------------------------------------


def require_null_determinant(r: SpinDensityField, tol: ToleranceConfig = DEFAULT) -> int:
    """Check |det R| <= tol pointwise, allowing a tiny violating fraction.

    Returns the violating-point count; raises NullDeterminantError when more
    than ``tol.null_det_fraction`` of the grid violates.
    """
    dt = det_field(r, tol).values
    thr = tol.null_det_tol(r.scale)
    bad = int(np.count_nonzero(np.abs(dt) > thr))
    if bad > tol.null_det_fraction * r.grid.npoints:
        worst = np.unravel_index(np.argmax(np.abs(dt)), dt.shape)
        raise NullDeterminantError(
            f"|det| > {thr:.3e} at {bad} of {r.grid.npoints} points; "
            f"worst {dt[worst]:.3e} at {tuple(int(i) for i in worst)}"
        )
    return bad


def _base_spinor(
    r: SpinDensityField,
    tol: ToleranceConfig,
    floor: float | None,
) -> tuple[np.ndarray, np.ndarray, dict[str, float]]:
    stats: dict[str, float] = {"null_det_violations": float(require_null_determinant(r, tol))}
    ratio_excess = r.rho_up.values - 2.0 * r.rho_dn.values
    worst = float(np.max(ratio_excess))
    if worst > tol.ratio_tol(r.scale):
        loc = np.unravel_index(np.argmax(ratio_excess), ratio_excess.shape)
        raise RatioHypothesisError(
            f"rho_up - 2 rho_dn = {worst:.3e} at {tuple(int(i) for i in loc)} "
            f"(tolerance {tol.ratio_tol(r.scale):.3e})"
        )
    if floor is None:
        floor = tol.sqrt_floor(r.scale)
    up = np.clip(r.rho_up.values, 0.0, None)
    dn = np.clip(r.rho_dn.values, 0.0, None)
    sqrt_dn = np.sqrt(dn)
    live = dn >= floor
    phi_up = np.zeros(r.grid.dims, dtype=np.complex128)
    np.divide(r.sigma.values, sqrt_dn, out=phi_up, where=live)
    # nodal set of rho_dn: sigma vanishes there (null det), any phase works
    nodal = ~live
    phi_up[nodal] = np.sqrt(up[nodal])
    stats["nodal_points"] = float(np.count_nonzero(nodal))
    stats["nodal_fallback_points"] = float(np.count_nonzero(nodal & (up >= floor)))
    return phi_up, sqrt_dn, stats


def base_spinor(
    r: SpinDensityField,
    tol: ToleranceConfig = DEFAULT,
    floor: float | None = None,
) -> tuple[ComplexField, ComplexField]:
    """The unnormalized spinor (sigma / sqrt(rho_dn), sqrt(rho_dn)).

    Requires det R = 0 and rho_up <= 2 rho_dn within tolerance; on the nodal
    set of rho_dn the up component falls back to sqrt(rho_up).
    """
    up, dn, _ = _base_spinor(r, tol, floor)
    return ComplexField(r.grid, up), ComplexField(r.grid, dn.astype(np.complex128))


# -- orbital set ---------------------------------------------------------------


def gram_matrix(orbitals: Sequence[Spinor]) -> np.ndarray:
    """Overlap matrix G_kl = <Phi_k | Phi_l> under the trapezoid inner product."""
    n = len(orbitals)
    if n == 0:
        raise ValueError("no orbitals")
    grid = orbitals[0].grid
    g = np.empty((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(i, n):
            val = integrate_values(
                grid,
                np.conj(orbitals[i].up.values) * orbitals[j].up.values
                + np.conj(orbitals[i].dn.values) * orbitals[j].dn.values,
            )
            if i == j:
                # diagonal overlaps are real; drop the round-off imaginary part
                val = complex(val.real, 0.0)
            g[i, j] = val
            g[j, i] = np.conj(val)
    return g


def gram_deviation(orbitals: Sequence[Spinor]) -> float:
    """max |G - I| entrywise."""
    g = gram_matrix(orbitals)
    return float(np.max(np.abs(g - np.eye(len(orbitals)))))


def orbital_kinetic(orb: Spinor, order: int = 4) -> float:
    """integral |grad up|^2 + |grad dn|^2."""
    grid = orb.grid
    total = grad_magnitude_sq(grid, orb.up.values, order)
    total += grad_magnitude_sq(grid, orb.dn.values, order)
    return float(integrate_values(grid, total))


def reconstruction_error(orbitals: Sequence[Spinor], r: SpinDensityField) -> float:
    """max pointwise deviation of sum_k Phi_k^a conj(Phi_k^b) from R (absolute)."""
    up = np.zeros(r.grid.dims)
    dn = np.zeros(r.grid.dims)
    sg = np.zeros(r.grid.dims, dtype=np.complex128)
    for orb in orbitals:
        u, d = orb.up.values, orb.dn.values
        up += u.real * u.real + u.imag * u.imag
        dn += d.real * d.real + d.imag * d.imag
        sg += u * np.conj(d)
    return max(
        float(np.max(np.abs(up - r.rho_up.values))),
        float(np.max(np.abs(dn - r.rho_dn.values))),
        float(np.max(np.abs(sg - r.sigma.values))),
    )


def build_orbitals(
    r: SpinDensityField,
    axis="auto",
    tol: ToleranceConfig = DEFAULT,
    floor: float | None = None,
) -> OrbitalSet:
    """Construct the N phase-modulated orbitals reproducing a rank-1 R.

    Diagnostics carry the Gram deviation, the absolute and relative
    reconstruction errors, the nodal-set fallback counts and the phase
    renormalization adjustment.
    """
    ax = resolve_axis(axis, r.rho_total)
    n = r.n_electrons
    phi_up, sqrt_dn, stats = _base_spinor(r, tol, floor)
    phase = build_phase(r.rho_total, n, ax, tol)
    shape = [1, 1, 1]
    shape[ax] = r.grid.dims[ax]
    f = phase.values.reshape(shape)
    inv_sqrt_n = 1.0 / math.sqrt(n)
    orbitals = []
    for k in range(1, n + 1):
        factor = np.exp(2j * np.pi * k * f) * inv_sqrt_n
        orbitals.append(Spinor(
            up=ComplexField(r.grid, phi_up * factor),
            dn=ComplexField(r.grid, sqrt_dn * factor),
        ))
    orbitals = tuple(orbitals)
    recon = reconstruction_error(orbitals, r)
    scale = max(r.scale, float(np.finfo(np.float64).tiny))
    diagnostics = {
        "gram_deviation": gram_deviation(orbitals),
        "reconstruction_abs": recon,
        "reconstruction_rel": recon / scale,
        "phase_adjustment": phase.adjustment,
        "phase_dip": phase.max_dip,
        **stats,
    }
    return OrbitalSet(
        grid=r.grid,
        n_electrons=n,
        orbitals=orbitals,
        axis=ax,
        phase=phase,
        diagnostics=diagnostics,
    )


def exchange_components(orbs: OrbitalSet) -> OrbitalSet:
    """Swap the up/dn components of every orbital (no conjugation).

    Orbitals built for the spin-swapped field turn into orbitals for the
    original field under this exchange.
    """
    swapped = tuple(Spinor(up=o.dn, dn=o.up) for o in orbs.orbitals)
    return OrbitalSet(
        grid=orbs.grid,
        n_electrons=orbs.n_electrons,
        orbitals=swapped,
        axis=orbs.axis,
        phase=orbs.phase,
        diagnostics=dict(orbs.diagnostics),
    )


# -- kinetic bound -------------------------------------------------------------


def kinetic_bound_rhs(
    r: SpinDensityField,
    phase: PhaseFunction,
    k: int,
    tol: ToleranceConfig = DEFAULT,
) -> float:
    """Integrated upper bound on N |grad Phi_k_up|^2 for the k-th orbital:

        integral( 6 |grad sigma|^2 / rho + 4 |grad sqrt(rho_dn)|^2 )
        + 4 pi^2 k^2 integral( f'^3 ) dx_axis,

    the last term being integral(rho f'^2) after the transverse integration.
    """
    order = tol.fd_order
    floor = tol.floor(r.scale)
    sig_term = weighted_gradient_l1(r.sigma, r.rho_total, floor, order, tol.sig_rel).value
    dn_term = h1_seminorm(r.grid, np.sqrt(np.clip(r.rho_dn.values, 0.0, None)), order)
    wax = r.grid.axis_weights[phase.axis]
    moment = float(np.sum(wax * phase.marginal ** 3))
    return 6.0 * sig_term + 4.0 * dn_term + 4.0 * np.pi ** 2 * k * k * moment


def kinetic_bound_lhs(orbs: OrbitalSet, k: int, tol: ToleranceConfig = DEFAULT) -> float:
    """N * integral |grad Phi_k_up|^2 (the quantity the bound controls)."""
    orb = orbs.orbitals[k - 1]
    g = grad_magnitude_sq(orb.grid, orb.up.values, tol.fd_order)
    return orbs.n_electrons * float(integrate_values(orb.grid, g))
