"""Witness states (convex combinations of Slater branches) and their verification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .check import FAIL, PASS, ConditionResult, h1_seminorm
from .fields import (
    ComplexField,
    Grid3,
    ScalarField,
    grad_magnitude_sq,
    integrate_values,
    weighted_gradient_l1,
)
from .orbitals import OrbitalSet, gram_deviation
from .spin_density import SpinDensityField, det_field, trace_integral
from .tolerances import DEFAULT, ToleranceConfig

WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class WitnessBranch:
    """One Slater determinant of N orbitals entering with a convex weight."""

    weight: float
    orbitals: OrbitalSet
    swapped: bool = False


@dataclass(frozen=True)
class Witness:
    """Mixed state sum_n p_n |Slater_n><Slater_n| given through its orbitals.

    Structural container: branch weights and Gram properties are *verified*,
    not enforced, so that corrupted witnesses can be loaded and reported on.
    """

    grid: Grid3
    n_electrons: int
    branches: tuple[WitnessBranch, ...]

    def __post_init__(self) -> None:
        if len(self.branches) == 0:
            raise ValueError("a witness needs at least one branch")
        for b in self.branches:
            if b.orbitals.grid != self.grid:
                raise ValueError("branch orbitals live on a different grid")
            if len(b.orbitals.orbitals) != self.n_electrons:
                raise ValueError(
                    f"each branch must carry {self.n_electrons} orbitals, "
                    f"got {len(b.orbitals.orbitals)}"
                )

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(b.weight for b in self.branches)


def density_of(w: Witness) -> SpinDensityField:
    """The 2x2 density matrix field sum_n p_n sum_k Phi_nk^a conj(Phi_nk^b)."""
    up = np.zeros(w.grid.dims)
    dn = np.zeros(w.grid.dims)
    sg = np.zeros(w.grid.dims, dtype=np.complex128)
    for branch in w.branches:
        p = branch.weight
        for orb in branch.orbitals.orbitals:
            u, d = orb.up.values, orb.dn.values
            up += p * (u.real * u.real + u.imag * u.imag)
            dn += p * (d.real * d.real + d.imag * d.imag)
            sg += p * (u * np.conj(d))
    return SpinDensityField(
        rho_up=ScalarField(w.grid, up),
        rho_dn=ScalarField(w.grid, dn),
        sigma=ComplexField(w.grid, sg),
        n_electrons=w.n_electrons,
    )


def kinetic_by_spin(w: Witness, tol: ToleranceConfig = DEFAULT) -> tuple[float, float]:
    """(T_up, T_dn): weighted sums of integral |grad Phi^a|^2 per spin component.

    This is Tr(-Laplacian gamma^aa) for the one-body operator of the witness
    (no 1/2 factor).
    """
    t_up = 0.0
    t_dn = 0.0
    order = tol.fd_order
    for branch in w.branches:
        p = branch.weight
        for orb in branch.orbitals.orbitals:
            t_up += p * float(integrate_values(
                w.grid, grad_magnitude_sq(w.grid, orb.up.values, order)))
            t_dn += p * float(integrate_values(
                w.grid, grad_magnitude_sq(w.grid, orb.dn.values, order)))
    return t_up, t_dn


def kinetic_energy(w: Witness, tol: ToleranceConfig = DEFAULT) -> float:
    """Tr(-Laplacian gamma) of the witness (no 1/2 factor)."""
    t_up, t_dn = kinetic_by_spin(w, tol)
    return t_up + t_dn


def occupation_spectrum(w: Witness) -> np.ndarray:
    """Eigenvalues (descending) of the one-body operator gamma of the witness.

    gamma = sum_n p_n sum_k |Phi_nk><Phi_nk| acts on a space of dimension
    (number of orbitals); its nonzero spectrum equals that of the small
    matrix K_ij = sqrt(p_i p_j) <Phi_i | Phi_j> over all branch orbitals.
    For an admissible mixed state every eigenvalue lies in [0, 1].
    """
    entries = [
        (b.weight, orb) for b in w.branches for orb in b.orbitals.orbitals
    ]
    m = len(entries)
    k = np.empty((m, m), dtype=np.complex128)
    roots = np.sqrt([max(p, 0.0) for p, _ in entries])
    for i in range(m):
        for j in range(i, m):
            oi, oj = entries[i][1], entries[j][1]
            ov = integrate_values(
                w.grid,
                np.conj(oi.up.values) * oj.up.values
                + np.conj(oi.dn.values) * oj.dn.values,
            )
            k[i, j] = roots[i] * roots[j] * ov
            k[j, i] = np.conj(k[i, j])
    return np.sort(np.linalg.eigvalsh(k))[::-1]


@dataclass(frozen=True)
class VerifyReport:
    """Outcome of verifying a witness against a target density."""

    checks: tuple[ConditionResult, ...]
    mismatch: float
    weight_sum: float
    gram_deviations: tuple[float, ...]
    kinetic_up: float
    kinetic_dn: float

    @property
    def kinetic_total(self) -> float:
        return self.kinetic_up + self.kinetic_dn

    @property
    def verdict(self) -> str:
        return FAIL if any(c.verdict == FAIL for c in self.checks) else PASS

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def __getitem__(self, name: str) -> ConditionResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_text(self) -> str:
        lines = [
            "report: verify",
            f"overall: {self.verdict}",
            f"mismatch: {self.mismatch:.12g}",
            f"weight_sum: {self.weight_sum:.17g}",
            f"kinetic_up: {self.kinetic_up:.12g}",
            f"kinetic_dn: {self.kinetic_dn:.12g}",
            f"kinetic_total: {self.kinetic_total:.12g}",
        ]
        for c in self.checks:
            lines.append("")
            lines.append(f"check: {c.name}")
            lines.append(f"verdict: {c.verdict}")
            lines.append(f"value: {c.value:.12g}")
            for key in sorted(c.details):
                val = c.details[key]
                lines.append(f"{key}: {val:.12g}" if isinstance(val, float) else f"{key}: {val}")
        return "\n".join(lines) + "\n"


def verify(
    w: Witness,
    target: SpinDensityField,
    tol: ToleranceConfig = DEFAULT,
) -> VerifyReport:
    """Verify that a witness actually represents the target density.

    Five checks: (i) the reconstructed density matches the target in
    relative L^1; (ii) every branch's orbitals are orthonormal within the
    Gram tolerance; (iii) the branch weights are convex; (iv) the witness
    kinetic energy is finite; (v) the three integrated regularity bounds
    tying the reconstructed density to the kinetic energy hold with slack:

        integral |grad sqrt(rho_a)|^2        <= T_aa
        integral |grad sigma|^2 / rho        <= T
        integral |grad sqrt(det R)|^2 / rho  <= 4 T
    """
    if w.grid != target.grid:
        raise ValueError("witness and target live on different grids")
    if w.n_electrons != target.n_electrons:
        raise ValueError("witness and target disagree on n_electrons")
    checks: list[ConditionResult] = []

    rec = density_of(w)

    # (i) density match, relative L1
    denom = max(trace_integral(target), float(np.finfo(np.float64).tiny))
    l1 = (
        float(integrate_values(w.grid, np.abs(rec.rho_up.values - target.rho_up.values)))
        + float(integrate_values(w.grid, np.abs(rec.rho_dn.values - target.rho_dn.values)))
        + 2.0 * float(integrate_values(w.grid, np.abs(rec.sigma.values - target.sigma.values)))
    )
    mismatch = l1 / denom
    checks.append(ConditionResult(
        "density_match",
        PASS if mismatch <= tol.mismatch_tol else FAIL,
        mismatch,
        {"threshold": tol.mismatch_tol, "l1_absolute": l1},
    ))

    # (ii) per-branch orthonormality
    gram_devs = tuple(gram_deviation(b.orbitals.orbitals) for b in w.branches)
    worst_gram = max(gram_devs)
    checks.append(ConditionResult(
        "orbital_gram",
        PASS if worst_gram <= tol.gram_tol else FAIL,
        worst_gram,
        {"threshold": tol.gram_tol, "per_branch": tuple(float(g) for g in gram_devs)},
    ))

    # (iii) convex weights
    weight_sum = float(np.sum(w.weights))
    min_weight = min(w.weights)
    weights_ok = abs(weight_sum - 1.0) <= WEIGHT_SUM_TOL and min_weight >= -WEIGHT_SUM_TOL
    checks.append(ConditionResult(
        "weight_sum",
        PASS if weights_ok else FAIL,
        weight_sum,
        {"threshold": WEIGHT_SUM_TOL, "min_weight": min_weight},
    ))

    # (iv) finite kinetic energy
    t_up, t_dn = kinetic_by_spin(w, tol)
    total = t_up + t_dn
    checks.append(ConditionResult(
        "kinetic_finite",
        PASS if np.isfinite(total) else FAIL,
        total,
        {"kinetic_up": t_up, "kinetic_dn": t_dn},
    ))

    # (v) integrated regularity bounds on the reconstructed density
    order = tol.fd_order
    floor = tol.floor(rec.scale)
    rho = rec.rho_total
    sqrt_det = np.sqrt(np.clip(det_field(rec, tol).values, 0.0, None))
    bounds = (
        ("sqrt_rho_up_h1", h1_seminorm(
            w.grid, np.sqrt(np.clip(rec.rho_up.values, 0.0, None)), order), t_up),
        ("sqrt_rho_dn_h1", h1_seminorm(
            w.grid, np.sqrt(np.clip(rec.rho_dn.values, 0.0, None)), order), t_dn),
        ("sigma_grad_over_rho", weighted_gradient_l1(
            rec.sigma, rho, floor, order, tol.sig_rel).value, total),
        ("sqrtdet_grad_over_rho", weighted_gradient_l1(
            ScalarField(w.grid, sqrt_det), rho, floor, order, tol.sig_rel).value, 4.0 * total),
    )
    details: dict[str, object] = {"slack": tol.slack}
    worst_margin = 0.0
    ok = True
    for name, lhs, rhs in bounds:
        details[f"{name}_lhs"] = float(lhs)
        details[f"{name}_rhs"] = float(rhs)
        margin = lhs / rhs if rhs > 0.0 else (0.0 if lhs == 0.0 else np.inf)
        worst_margin = max(worst_margin, margin)
        if lhs > rhs * (1.0 + tol.slack):
            ok = False
    checks.append(ConditionResult(
        "kinetic_bounds",
        PASS if ok else FAIL,
        worst_margin,
        details,
    ))

    return VerifyReport(
        checks=tuple(checks),
        mismatch=mismatch,
        weight_sum=weight_sum,
        gram_deviations=gram_devs,
        kinetic_up=t_up,
        kinetic_dn=t_dn,
    )
