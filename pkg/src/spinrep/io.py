"""On-disk formats: the SPDF density container and the witness directory.

SPDF (spin-polarized density field), version 1: a short ASCII header

    spdf 1
    grid <nx> <ny> <nz>
    box <x0> <y0> <z0> <x1> <y1> <z1>
    electrons <N>
    data

followed immediately by four little-endian float64 blocks of nx*ny*nz
values each — rho_up, rho_dn, Re sigma, Im sigma — flattened C-order with
the z index fastest.  Values are written bit-exactly, so a read-back
reproduces the field to the last ulp.

A witness directory holds ``witness.txt``:

    witness 1
    grid <nx> <ny> <nz>
    box <x0> ... <z1>
    electrons <N>
    branches <B>
    branch <weight> <swapped 0|1> <file_1> ... <file_N>

with one orbital file per electron and branch; each orbital file is four
raw little-endian float64 blocks (Re up, Im up, Re dn, Im dn).  Weights are
printed with 17 significant digits, which round-trips float64 exactly.
"""

from __future__ import annotations

import io as _io
import os

import numpy as np

from .fields import ComplexField, Grid3, ScalarField
from .orbitals import OrbitalSet, Spinor
from .spin_density import SpinDensityField
from .witness import Witness, WitnessBranch

_F8 = np.dtype("<f8")


class SpdfFormatError(ValueError):
    """Malformed SPDF header or payload."""


class UnsupportedVersionError(SpdfFormatError):
    """The file declares a format version this reader does not speak."""


class WitnessFormatError(ValueError):
    """Malformed witness directory."""


# -- SPDF --------------------------------------------------------------------


def _header_lines(handle: _io.BufferedIOBase, count: int, err) -> list[str]:
    lines = []
    for i in range(count):
        raw = handle.readline(4096)
        if not raw.endswith(b"\n"):
            raise err(f"truncated header at line {i + 1}")
        try:
            lines.append(raw[:-1].decode("ascii"))
        except UnicodeDecodeError as exc:
            raise err(f"header line {i + 1} is not ascii") from exc
    return lines


def _parse_grid_box(lines: list[str], offset: int, err) -> Grid3:
    """Parse consecutive 'grid ...' and 'box ...' lines; offset = line number of 'grid'."""
    tok = lines[0].split()
    if len(tok) != 4 or tok[0] != "grid":
        raise err(f"line {offset}: expected 'grid nx ny nz', got {lines[0]!r}")
    try:
        dims = tuple(int(t) for t in tok[1:])
    except ValueError as exc:
        raise err(f"line {offset}: grid dimensions must be integers") from exc
    tok = lines[1].split()
    if len(tok) != 7 or tok[0] != "box":
        raise err(f"line {offset + 1}: expected 'box x0 y0 z0 x1 y1 z1', got {lines[1]!r}")
    try:
        box = tuple(float(t) for t in tok[1:])
    except ValueError as exc:
        raise err(f"line {offset + 1}: box bounds must be numbers") from exc
    try:
        return Grid3(dims, box)
    except ValueError as exc:
        raise err(f"line {offset}-{offset + 1}: {exc}") from exc


def _parse_electrons(line: str, offset: int, err) -> int:
    tok = line.split()
    if len(tok) != 2 or tok[0] != "electrons":
        raise err(f"line {offset}: expected 'electrons N', got {line!r}")
    try:
        n = int(tok[1])
    except ValueError as exc:
        raise err(f"line {offset}: electron count must be an integer") from exc
    if n < 1:
        raise err(f"line {offset}: electron count must be positive, got {n}")
    return n


def write_spdf(path: str | os.PathLike, field: SpinDensityField) -> None:
    grid = field.grid
    header = (
        "spdf 1\n"
        f"grid {grid.dims[0]} {grid.dims[1]} {grid.dims[2]}\n"
        "box " + " ".join(f"{v:.17g}" for v in grid.box) + "\n"
        f"electrons {field.n_electrons}\n"
        "data\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(field.rho_up.values, dtype=_F8).tobytes())
        fh.write(np.ascontiguousarray(field.rho_dn.values, dtype=_F8).tobytes())
        fh.write(np.ascontiguousarray(field.sigma.values.real, dtype=_F8).tobytes())
        fh.write(np.ascontiguousarray(field.sigma.values.imag, dtype=_F8).tobytes())


def read_spdf(path: str | os.PathLike) -> SpinDensityField:
    with open(path, "rb") as fh:
        lines = _header_lines(fh, 1, SpdfFormatError)
        tok = lines[0].split()
        if len(tok) != 2 or tok[0] != "spdf":
            raise SpdfFormatError(f"line 1: not an spdf file (got {lines[0]!r})")
        if tok[1] != "1":
            raise UnsupportedVersionError(
                f"line 1: unsupported spdf version {tok[1]!r} (this reader speaks version 1)"
            )
        body = _header_lines(fh, 4, SpdfFormatError)
        grid = _parse_grid_box(body[:2], 2, SpdfFormatError)
        n = _parse_electrons(body[2], 4, SpdfFormatError)
        if body[3] != "data":
            raise SpdfFormatError(f"line 5: expected 'data', got {body[3]!r}")
        payload = fh.read()
    expected = 4 * grid.npoints * 8
    if len(payload) != expected:
        raise SpdfFormatError(
            f"payload holds {len(payload)} bytes, expected {expected} "
            f"(4 blocks of {grid.npoints} float64)"
        )
    blocks = np.frombuffer(payload, dtype=_F8).reshape(4, *grid.dims)
    return SpinDensityField(
        rho_up=ScalarField(grid, blocks[0]),
        rho_dn=ScalarField(grid, blocks[1]),
        sigma=ComplexField(grid, blocks[2] + 1j * blocks[3]),
        n_electrons=n,
    )


# -- witness directory ---------------------------------------------------------

MANIFEST = "witness.txt"


def write_witness(dirpath: str | os.PathLike, witness: Witness) -> None:
    os.makedirs(dirpath, exist_ok=True)
    grid = witness.grid
    lines = [
        "witness 1",
        f"grid {grid.dims[0]} {grid.dims[1]} {grid.dims[2]}",
        "box " + " ".join(f"{v:.17g}" for v in grid.box),
        f"electrons {witness.n_electrons}",
        f"branches {len(witness.branches)}",
    ]
    for bi, branch in enumerate(witness.branches):
        names = []
        for oi, orb in enumerate(branch.orbitals.orbitals):
            name = f"branch{bi}_orb{oi + 1}.bin"
            names.append(name)
            with open(os.path.join(dirpath, name), "wb") as fh:
                u, d = orb.up.values, orb.dn.values
                for block in (u.real, u.imag, d.real, d.imag):
                    fh.write(np.ascontiguousarray(block, dtype=_F8).tobytes())
        lines.append(
            f"branch {branch.weight:.17g} {int(branch.swapped)} " + " ".join(names)
        )
    with open(os.path.join(dirpath, MANIFEST), "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_witness(dirpath: str | os.PathLike) -> Witness:
    manifest = os.path.join(dirpath, MANIFEST)
    try:
        with open(manifest, "r", encoding="ascii") as fh:
            lines = [ln.rstrip("\n") for ln in fh]
    except FileNotFoundError as exc:
        raise WitnessFormatError(f"no {MANIFEST} in {dirpath}") from exc
    if len(lines) < 5:
        raise WitnessFormatError("manifest too short")
    tok = lines[0].split()
    if len(tok) != 2 or tok[0] != "witness":
        raise WitnessFormatError(f"line 1: not a witness manifest (got {lines[0]!r})")
    if tok[1] != "1":
        raise UnsupportedVersionError(
            f"line 1: unsupported witness version {tok[1]!r} (this reader speaks version 1)"
        )
    grid = _parse_grid_box(lines[1:3], 2, WitnessFormatError)
    n = _parse_electrons(lines[3], 4, WitnessFormatError)
    tok = lines[4].split()
    if len(tok) != 2 or tok[0] != "branches":
        raise WitnessFormatError(f"line 5: expected 'branches B', got {lines[4]!r}")
    try:
        nbranches = int(tok[1])
    except ValueError as exc:
        raise WitnessFormatError("line 5: branch count must be an integer") from exc
    if nbranches < 1:
        raise WitnessFormatError(f"line 5: branch count must be positive, got {nbranches}")
    branch_lines = [ln for ln in lines[5:] if ln.strip()]
    if len(branch_lines) != nbranches:
        raise WitnessFormatError(
            f"manifest declares {nbranches} branches but lists {len(branch_lines)}"
        )
    per_orbital = 4 * grid.npoints * 8
    branches = []
    for idx, line in enumerate(branch_lines):
        tok = line.split()
        if len(tok) != 3 + n or tok[0] != "branch":
            raise WitnessFormatError(
                f"branch line {idx + 1}: expected 'branch weight swapped' "
                f"plus {n} file names, got {line!r}"
            )
        try:
            weight = float(tok[1])
        except ValueError as exc:
            raise WitnessFormatError(f"branch line {idx + 1}: bad weight {tok[1]!r}") from exc
        if tok[2] not in ("0", "1"):
            raise WitnessFormatError(
                f"branch line {idx + 1}: swapped flag must be 0 or 1, got {tok[2]!r}"
            )
        orbitals = []
        for name in tok[3:]:
            fpath = os.path.join(dirpath, name)
            try:
                with open(fpath, "rb") as fh:
                    payload = fh.read()
            except FileNotFoundError as exc:
                raise WitnessFormatError(f"orbital file {name} is missing") from exc
            if len(payload) != per_orbital:
                raise WitnessFormatError(
                    f"orbital file {name} holds {len(payload)} bytes, expected {per_orbital}"
                )
            blocks = np.frombuffer(payload, dtype=_F8).reshape(4, *grid.dims)
            orbitals.append(Spinor(
                up=ComplexField(grid, blocks[0] + 1j * blocks[1]),
                dn=ComplexField(grid, blocks[2] + 1j * blocks[3]),
            ))
        branches.append(WitnessBranch(
            weight=weight,
            orbitals=OrbitalSet(
                grid=grid,
                n_electrons=n,
                orbitals=tuple(orbitals),
                diagnostics={"source": "file"},
            ),
            swapped=tok[2] == "1",
        ))
    return Witness(grid=grid, n_electrons=n, branches=tuple(branches))
