"""Necessary-and-sufficient admissibility check for spin-density fields.

A matrix field R = [[rho_up, sigma], [conj sigma, rho_dn]] on the box comes
from an N-electron mixed state with finite kinetic energy iff

  (a) rho_up >= 0 and rho_dn >= 0 pointwise,
  (b) det R = rho_up*rho_dn - |sigma|^2 >= 0 pointwise,
  (c) integral(rho_up + rho_dn) = N,
  (d) sqrt(rho_up), sqrt(rho_dn) have finite H^1 gradient seminorm,
  (e) sigma and sqrt(det R) have finite W^{1,3/2} norm,
  (f) integral |grad sigma|^2 / rho is finite,
  (g) integral |grad sqrt(det R)|^2 / rho is finite,

with rho = rho_up + rho_dn.  (a)-(c) are sharp pointwise/integral tests
against tolerances.  (d)-(g) are finiteness statements, which a single grid
can only probe: the verdict is "pass" when the discrete value is finite (and,
if a refined field is supplied, stable under refinement), "fail" when it is
non-finite or grows beyond the refinement threshold, and "indeterminate"
when too many points were masked by the division floor for the number to
mean anything.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .fields import (
    ComplexField,
    Grid3,
    ScalarField,
    boundary_max,
    grad_magnitude_sq,
    integrate_values,
    lp_norm,
    weighted_gradient_l1,
)
from .spin_density import SpinDensityField, det_field, trace_integral
from .tolerances import DEFAULT, ToleranceConfig

PASS = "pass"
FAIL = "fail"
INDETERMINATE = "indeterminate"

_CONDITION_ORDER = (
    "rho_nonneg",
    "det_nonneg",
    "normalization",
    "sqrt_rho_h1",
    "sigma_sqrtdet_w32",
    "sigma_grad_over_rho",
    "sqrtdet_grad_over_rho",
)


@dataclass(frozen=True)
class ConditionResult:
    name: str
    verdict: str
    value: float
    details: Mapping[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS


@dataclass(frozen=True)
class CheckReport:
    conditions: tuple[ConditionResult, ...]
    n_electrons: int
    boundary_warning: bool
    boundary_value: float

    @property
    def verdict(self) -> str:
        verdicts = [c.verdict for c in self.conditions]
        if FAIL in verdicts:
            return FAIL
        if INDETERMINATE in verdicts:
            return INDETERMINATE
        return PASS

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def __getitem__(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_text(self) -> str:
        lines = [
            "report: check",
            f"overall: {self.verdict}",
            f"n_electrons: {self.n_electrons}",
            f"boundary_warning: {'yes' if self.boundary_warning else 'no'}",
            f"boundary_value: {self.boundary_value:.12g}",
        ]
        for c in self.conditions:
            lines.append("")
            lines.append(f"condition: {c.name}")
            lines.append(f"verdict: {c.verdict}")
            lines.append(f"value: {c.value:.12g}")
            for key in sorted(c.details):
                lines.append(f"{key}: {_fmt(c.details[key])}")
        return "\n".join(lines) + "\n"


def _fmt(v: object) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, tuple):
        return " ".join(str(x) for x in v)
    return str(v)


# -- seminorm helpers (shared with the eigen-regularity check) --------------


def h1_seminorm(grid: Grid3, values: np.ndarray, order: int = 4) -> float:
    """integral |grad f|^2 over the box."""
    return float(integrate_values(grid, grad_magnitude_sq(grid, values, order)))


def w32_norms(grid: Grid3, values: np.ndarray, order: int = 4) -> tuple[float, float]:
    """(L^{3/2} norm of f, L^{3/2} norm of |grad f|)."""
    if np.iscomplexobj(values):
        fnorm = lp_norm(ComplexField(grid, values), 1.5)
    else:
        fnorm = lp_norm(ScalarField(grid, values), 1.5)
    gmag = np.sqrt(grad_magnitude_sq(grid, values, order))
    gnorm = lp_norm(ScalarField(grid, gmag), 1.5)
    return fnorm, gnorm


def _rel_change(coarse: float, fine: float) -> float:
    denom = max(abs(coarse), abs(fine))
    if denom == 0.0:
        return 0.0
    return abs(fine - coarse) / denom


def _norm_verdict(
    value: float,
    tol: ToleranceConfig,
    sig_fraction: float = 0.0,
    change: float | None = None,
) -> tuple[str, str]:
    """Shared verdict policy for the finiteness conditions (d)-(g)."""
    if not math.isfinite(value):
        return FAIL, "non-finite value"
    if sig_fraction > tol.masked_fraction:
        return INDETERMINATE, "masked points dominate"
    if change is None:
        return PASS, "finite at this resolution"
    if change > tol.refine_threshold:
        return FAIL, f"unstable under refinement (change {change:.3g})"
    return PASS, f"stable under refinement (change {change:.3g})"


def seminorm_condition(
    name: str,
    grid: Grid3,
    values: np.ndarray,
    tol: ToleranceConfig = DEFAULT,
    refined: tuple[Grid3, np.ndarray] | None = None,
) -> ConditionResult:
    """H^1-type condition on one array: finite (and refinement-stable) gradient seminorm."""
    value = h1_seminorm(grid, values, tol.fd_order)
    change = None
    details: dict[str, object] = {}
    if refined is not None:
        fine = h1_seminorm(refined[0], refined[1], tol.fd_order)
        change = _rel_change(value, fine)
        details["refined_value"] = fine
        details["change"] = change
    verdict, status = _norm_verdict(value, tol, change=change)
    details["status"] = status
    return ConditionResult(name, verdict, value, details)


# -- the seven conditions ----------------------------------------------------


def _sqrt_clipped(values: np.ndarray) -> np.ndarray:
    return np.sqrt(np.clip(values, 0.0, None))


def _eq_norms(r: SpinDensityField, tol: ToleranceConfig) -> dict[str, object]:
    """All resolution-dependent norms of conditions (d)-(g) in one pass."""
    grid = r.grid
    order = tol.fd_order
    # non-finite data must surface as failing norms, not as a floor error
    scale = r.scale if math.isfinite(r.scale) else 0.0
    floor = tol.floor(scale)
    rho = r.rho_total
    sqrt_det = _sqrt_clipped(det_field(r, tol).values)
    h1_up = h1_seminorm(grid, _sqrt_clipped(r.rho_up.values), order)
    h1_dn = h1_seminorm(grid, _sqrt_clipped(r.rho_dn.values), order)
    sig_f, sig_g = w32_norms(grid, r.sigma.values, order)
    det_f, det_g = w32_norms(grid, sqrt_det, order)
    sig_ratio = weighted_gradient_l1(r.sigma, rho, floor, order, tol.sig_rel)
    det_ratio = weighted_gradient_l1(
        ScalarField(grid, sqrt_det), rho, floor, order, tol.sig_rel
    )
    return {
        "h1_up": h1_up,
        "h1_dn": h1_dn,
        "sigma_l32": sig_f,
        "sigma_grad_l32": sig_g,
        "sqrtdet_l32": det_f,
        "sqrtdet_grad_l32": det_g,
        "sigma_ratio": sig_ratio,
        "det_ratio": det_ratio,
    }


def _argmin_loc(values: np.ndarray) -> tuple[int, ...]:
    return tuple(int(i) for i in np.unravel_index(np.argmin(values), values.shape))


def check(
    r: SpinDensityField,
    tol: ToleranceConfig = DEFAULT,
    refined: SpinDensityField | None = None,
) -> CheckReport:
    """Evaluate all seven admissibility conditions on R.

    ``refined`` optionally supplies the same density sampled on a finer grid;
    when present, the finiteness conditions additionally require the discrete
    norms to move by less than ``tol.refine_threshold`` relative, which is
    what actually distinguishes a finite seminorm from a divergent one.
    """
    if refined is not None:
        if refined.grid.box != r.grid.box:
            raise ValueError("refined field must cover the same box")
        if refined.n_electrons != r.n_electrons:
            raise ValueError("refined field must have the same n_electrons")
        if any(refined.grid.dims[ax] <= r.grid.dims[ax] for ax in range(3)):
            raise ValueError("refined field must be strictly finer on every axis")

    scale = r.scale
    n = r.n_electrons
    conditions: list[ConditionResult] = []

    # (a) pointwise nonnegativity of the diagonal
    neg_tol = tol.neg_tol(scale)
    min_up = float(np.min(r.rho_up.values))
    min_dn = float(np.min(r.rho_dn.values))
    worst = min(min_up, min_dn)
    conditions.append(ConditionResult(
        "rho_nonneg",
        PASS if worst >= -neg_tol else FAIL,
        worst,
        {
            "min_rho_up": min_up,
            "min_rho_dn": min_dn,
            "worst_location": _argmin_loc(
                r.rho_up.values if min_up <= min_dn else r.rho_dn.values
            ),
            "threshold": -neg_tol,
        },
    ))

    # (b) pointwise nonnegativity of the determinant
    det_tol = tol.det_tol(scale)
    dt = det_field(r, tol).values
    min_det = float(np.min(dt))
    conditions.append(ConditionResult(
        "det_nonneg",
        PASS if min_det >= -det_tol else FAIL,
        min_det,
        {"worst_location": _argmin_loc(dt), "threshold": -det_tol},
    ))

    # (c) normalization of the trace
    norm_tol = tol.norm_tol(n)
    total = trace_integral(r)
    conditions.append(ConditionResult(
        "normalization",
        PASS if abs(total - n) <= norm_tol else FAIL,
        total,
        {"target": float(n), "deviation": abs(total - n), "threshold": norm_tol},
    ))

    # (d)-(g) finiteness of the gradient norms
    norms = _eq_norms(r, tol)
    fine_norms = _eq_norms(refined, tol) if refined is not None else None

    def change_of(key: str) -> float | None:
        if fine_norms is None:
            return None
        coarse, fine = norms[key], fine_norms[key]
        if hasattr(coarse, "value"):
            coarse, fine = coarse.value, fine.value
        return _rel_change(coarse, fine)

    # (d) H^1 of sqrt(rho_up), sqrt(rho_dn); one condition, worst change counts
    h1_value = norms["h1_up"] + norms["h1_dn"]
    changes = [c for c in (change_of("h1_up"), change_of("h1_dn")) if c is not None]
    verdict, status = _norm_verdict(
        h1_value, tol, change=max(changes) if changes else None
    )
    details = {
        "h1_up": norms["h1_up"],
        "h1_dn": norms["h1_dn"],
        "status": status,
    }
    if fine_norms is not None:
        details["refined_h1_up"] = fine_norms["h1_up"]
        details["refined_h1_dn"] = fine_norms["h1_dn"]
        details["change"] = max(changes)
    conditions.append(ConditionResult("sqrt_rho_h1", verdict, h1_value, details))

    # (e) W^{1,3/2} of sigma and sqrt(det)
    w32_keys = ("sigma_l32", "sigma_grad_l32", "sqrtdet_l32", "sqrtdet_grad_l32")
    w32_value = float(sum(norms[k] for k in w32_keys))
    changes = [c for c in map(change_of, w32_keys) if c is not None]
    verdict, status = _norm_verdict(
        w32_value, tol, change=max(changes) if changes else None
    )
    details = {k: norms[k] for k in w32_keys}
    details["status"] = status
    if fine_norms is not None:
        details.update({f"refined_{k}": fine_norms[k] for k in w32_keys})
        details["change"] = max(changes)
    conditions.append(ConditionResult("sigma_sqrtdet_w32", verdict, w32_value, details))

    # (f), (g) floored |grad .|^2 / rho integrals
    for name, key in (
        ("sigma_grad_over_rho", "sigma_ratio"),
        ("sqrtdet_grad_over_rho", "det_ratio"),
    ):
        res = norms[key]
        change = change_of(key)
        verdict, status = _norm_verdict(
            res.value, tol, sig_fraction=res.significant_fraction, change=change
        )
        details = {
            "masked_points": res.masked_points,
            "masked_fraction": res.masked_fraction,
            "significant_masked_points": res.significant_masked_points,
            "status": status,
        }
        if fine_norms is not None:
            details["refined_value"] = fine_norms[key].value
            details["change"] = change
        conditions.append(ConditionResult(name, verdict, res.value, details))

    bmax = boundary_max(r.rho_total)
    warning = bmax > tol.boundary_rel * max(scale, np.finfo(np.float64).tiny)
    return CheckReport(
        conditions=tuple(conditions),
        n_electrons=n,
        boundary_warning=bool(warning),
        boundary_value=bmax,
    )


def check_spinless(
    rho: ScalarField,
    n_electrons: int,
    tol: ToleranceConfig = DEFAULT,
    refined: ScalarField | None = None,
) -> CheckReport:
    """Check a spin-unresolved density by embedding it as R = diag(rho/2, rho/2)."""
    def embed(f: ScalarField) -> SpinDensityField:
        half = ScalarField(f.grid, 0.5 * f.values)
        return SpinDensityField(
            rho_up=half,
            rho_dn=half,
            sigma=ComplexField(f.grid, np.zeros(f.grid.dims, dtype=np.complex128)),
            n_electrons=n_electrons,
        )

    return check(embed(rho), tol, refined=embed(refined) if refined is not None else None)
