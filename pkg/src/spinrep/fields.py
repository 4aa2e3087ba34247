"""Uniform 3-D grids, scalar/complex fields and the discrete operators on them.

Conventions used throughout the package:

* grids are uniform tensor products of ``linspace(lo, hi, n)`` nodes,
  at least 4 per axis, stored C-order with the z index fastest;
* integrals are trapezoidal sums; the reduction is ``np.sum`` (pairwise),
  which fixes a canonical summation order so results are reproducible
  bit-for-bit for a given grid;
* derivatives are central finite differences (order 2 by default, order 4
  available for the norm integrals) with one-sided second-order stencils on
  the boundary planes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

_TINY = float(np.finfo(np.float64).tiny)


@dataclass(frozen=True)
class Grid3:
    """Uniform grid on a rectangular box.

    ``dims = (nx, ny, nz)`` node counts, each at least 4 so every stencil
    has room; ``box = (x0, y0, z0, x1, y1, z1)`` with ``x1 > x0`` etc.
    Node spacing along each axis is ``(hi - lo) / (n - 1)`` (endpoints are
    grid nodes).
    """

    dims: tuple[int, int, int]
    box: tuple[float, float, float, float, float, float]

    def __post_init__(self) -> None:
        dims = tuple(int(n) for n in self.dims)
        box = tuple(float(v) for v in self.box)
        if len(dims) != 3:
            raise ValueError(f"dims must have 3 entries, got {self.dims!r}")
        if len(box) != 6:
            raise ValueError(f"box must have 6 entries, got {self.box!r}")
        if any(n < 4 for n in dims):
            raise ValueError(f"each grid dimension must be >= 4, got {dims}")
        if not all(np.isfinite(v) for v in box):
            raise ValueError(f"box entries must be finite, got {box}")
        for ax in range(3):
            if not box[3 + ax] > box[ax]:
                raise ValueError(
                    f"box upper bound must exceed lower bound on axis {ax}: "
                    f"{box[ax]} .. {box[3 + ax]}"
                )
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "box", box)

    @property
    def npoints(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @cached_property
    def spacing(self) -> tuple[float, float, float]:
        return tuple(
            (self.box[3 + ax] - self.box[ax]) / (self.dims[ax] - 1) for ax in range(3)
        )

    @cached_property
    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        out = []
        for ax in range(3):
            a = np.linspace(self.box[ax], self.box[3 + ax], self.dims[ax])
            a.flags.writeable = False
            out.append(a)
        return tuple(out)

    @cached_property
    def axis_weights(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """1-D trapezoid weights per axis (h at interior nodes, h/2 at ends)."""
        out = []
        for ax in range(3):
            w = np.full(self.dims[ax], self.spacing[ax])
            w[0] *= 0.5
            w[-1] *= 0.5
            w.flags.writeable = False
            out.append(w)
        return tuple(out)

    @cached_property
    def weights(self) -> np.ndarray:
        """3-D trapezoid weight array (outer product of the axis weights)."""
        wx, wy, wz = self.axis_weights
        w = wx[:, None, None] * wy[None, :, None] * wz[None, None, :]
        w.flags.writeable = False
        return w

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.meshgrid(*self.axes, indexing="ij")


def _prepare(grid: Grid3, values, dtype) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim == 1 and arr.size == grid.npoints:
        arr = arr.reshape(grid.dims)
    if arr.shape != grid.dims:
        raise ValueError(f"values shape {arr.shape} does not match grid dims {grid.dims}")
    arr = np.array(arr, dtype=dtype, order="C", copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ScalarField:
    """Real field sampled on a :class:`Grid3`.  Values are stored read-only."""

    grid: Grid3
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _prepare(self.grid, self.values, np.float64))


@dataclass(frozen=True)
class ComplexField:
    """Complex field sampled on a :class:`Grid3`.  Values are stored read-only."""

    grid: Grid3
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _prepare(self.grid, self.values, np.complex128))


Field = ScalarField | ComplexField


def zeros(grid: Grid3) -> ScalarField:
    return ScalarField(grid, np.zeros(grid.dims))


def zeros_complex(grid: Grid3) -> ComplexField:
    return ComplexField(grid, np.zeros(grid.dims, dtype=np.complex128))


# -- derivatives -----------------------------------------------------------


def _axis_gradient(v: np.ndarray, h: float, axis: int, order: int) -> np.ndarray:
    vm = np.moveaxis(v, axis, 0)
    g = np.empty_like(vm)
    if order == 2:
        g[1:-1] = (vm[2:] - vm[:-2]) / (2.0 * h)
    elif order == 4:
        # fourth-order interior, second-order central one node from the edge
        g[2:-2] = (vm[:-4] - 8.0 * vm[1:-3] + 8.0 * vm[3:-1] - vm[4:]) / (12.0 * h)
        g[1] = (vm[2] - vm[0]) / (2.0 * h)
        g[-2] = (vm[-1] - vm[-3]) / (2.0 * h)
    else:
        raise ValueError(f"unsupported stencil order {order} (use 2 or 4)")
    g[0] = (-3.0 * vm[0] + 4.0 * vm[1] - vm[2]) / (2.0 * h)
    g[-1] = (3.0 * vm[-1] - 4.0 * vm[-2] + vm[-3]) / (2.0 * h)
    return np.moveaxis(g, 0, axis)


def gradient_arrays(grid: Grid3, values: np.ndarray, order: int = 2) -> tuple[np.ndarray, ...]:
    h = grid.spacing
    return tuple(_axis_gradient(values, h[ax], ax, order) for ax in range(3))


def gradient(f: Field, order: int = 2):
    """Componentwise gradient, returned as three fields of the input type."""
    cls = type(f)
    return tuple(cls(f.grid, g) for g in gradient_arrays(f.grid, f.values, order))


def grad_magnitude_sq(grid: Grid3, values: np.ndarray, order: int = 2) -> np.ndarray:
    """|grad f|^2 pointwise; for complex f the moduli of the components add."""
    out = np.zeros(grid.dims)
    for g in gradient_arrays(grid, values, order):
        if np.iscomplexobj(g):
            out += g.real * g.real + g.imag * g.imag
        else:
            out += g * g
    return out


# -- integrals -------------------------------------------------------------


def integrate_values(grid: Grid3, values: np.ndarray):
    return np.sum(grid.weights * values)


def integrate(f: Field):
    """Trapezoidal integral over the box (complex for complex fields)."""
    val = integrate_values(f.grid, f.values)
    if isinstance(f, ScalarField):
        return float(val)
    return complex(val)


def lp_norm(f: Field, p: float) -> float:
    """(integral of |f|^p)^(1/p); p >= 1."""
    if not p >= 1.0:
        raise ValueError(f"lp_norm requires p >= 1, got {p}")
    mag = np.abs(f.values)
    return float(integrate_values(f.grid, mag ** p)) ** (1.0 / p)


@dataclass(frozen=True)
class WeightedGradientL1:
    """Result of :func:`weighted_gradient_l1`.

    ``value`` is the integral of |grad f|^2 / w over the points with
    w >= floor.  ``masked_points`` counts every node excluded by the floor;
    ``significant_masked_points`` counts only those whose floor-bounded
    contribution |grad f|^2 / floor * dV would have moved the result by more
    than ``sig_rel`` relative — tail points of a decaying density are masked
    but not significant, genuine kinks over a vanishing density are.
    """

    value: float
    masked_points: int
    significant_masked_points: int
    total_points: int

    @property
    def masked_fraction(self) -> float:
        return self.masked_points / self.total_points

    @property
    def significant_fraction(self) -> float:
        return self.significant_masked_points / self.total_points


def weighted_gradient_l1(
    f: Field,
    w: ScalarField,
    floor: float,
    order: int = 2,
    sig_rel: float = 1e-9,
) -> WeightedGradientL1:
    """Integral of |grad f|^2 / w with a positive division floor on w."""
    if not (np.isfinite(floor) and floor > 0.0):
        raise ValueError(f"floor must be positive and finite, got {floor}")
    if f.grid != w.grid:
        raise ValueError("field and weight live on different grids")
    gsq = grad_magnitude_sq(f.grid, f.values, order)
    mask = w.values >= floor
    cell = f.grid.weights
    contrib = np.zeros(f.grid.dims)
    np.divide(gsq, w.values, out=contrib, where=mask)
    value = float(np.sum(cell * contrib * mask))
    masked = int(f.grid.npoints - np.count_nonzero(mask))
    # lower bound on what each masked point could have contributed
    lost = cell * gsq / floor
    threshold = sig_rel * max(abs(value), _TINY)
    significant = int(np.count_nonzero(~mask & (lost > threshold)))
    return WeightedGradientL1(value, masked, significant, f.grid.npoints)


def boundary_max(f: ScalarField) -> float:
    """Largest |f| over the six boundary faces of the box."""
    v = f.values
    faces = (v[0], v[-1], v[:, 0], v[:, -1], v[:, :, 0], v[:, :, -1])
    return max(float(np.max(np.abs(face))) for face in faces)
