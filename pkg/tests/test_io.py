"""Round trips and format validation for the SPDF file and witness directory."""

import numpy as np
import pytest

import spinrep as sr

from _helpers import cube, field_from_arrays, gaussian_values

HEADER = ["spdf 1", "grid 4 4 4", "box -1 -1 -1 1 1 1", "electrons 1", "data"]


def spdf_file(tmp_path, lines, npoints=64, nblocks=4):
    payload = np.zeros(nblocks * npoints, dtype="<f8").tobytes()
    path = tmp_path / "field.spdf"
    path.write_bytes(("\n".join(lines) + "\n").encode("ascii") + payload)
    return path


def swap(lines, i, text):
    out = list(lines)
    out[i] = text
    return out


# -- SPDF ----------------------------------------------------------------------


def test_spdf_round_trip_bit_exact(tmp_path):
    grid = cube(6, 3.0)
    rng = np.random.default_rng(11)
    up = rng.random(grid.dims)
    dn = rng.random(grid.dims)
    sig = rng.standard_normal(grid.dims) + 1j * rng.standard_normal(grid.dims)
    # the container stores whatever it is given, including junk the checker
    # would reject — writers must not silently sanitize
    up[0, 0, 0] = -0.25
    dn[1, 2, 3] = np.nan
    field = field_from_arrays(grid, up, dn, sig, n_electrons=3)

    path = tmp_path / "f.spdf"
    sr.write_spdf(path, field)
    back = sr.read_spdf(path)

    assert back.grid.dims == grid.dims
    assert back.grid.box == grid.box
    assert back.n_electrons == 3
    assert back.rho_up.values.tobytes() == up.tobytes()
    assert back.rho_dn.values.tobytes() == dn.tobytes()
    assert back.sigma.values.real.tobytes() == sig.real.copy().tobytes()
    assert back.sigma.values.imag.tobytes() == sig.imag.copy().tobytes()


def test_spdf_round_trip_non_round_box(tmp_path):
    # 17 significant digits must reproduce awkward box bounds exactly
    grid = sr.Grid3((4, 5, 6), (-7.3, -1.0 / 3.0, -2.0, 7.3, 1.0 / 3.0, 2.0))
    g = gaussian_values(grid, width=1.0)
    field = field_from_arrays(grid, g, g, 0.5 * g, n_electrons=2)
    path = tmp_path / "f.spdf"
    sr.write_spdf(path, field)
    back = sr.read_spdf(path)
    assert back.grid.box == grid.box
    assert back.grid.dims == (4, 5, 6)


def test_spdf_rejects_bad_magic(tmp_path):
    path = spdf_file(tmp_path, swap(HEADER, 0, "dens 1"))
    with pytest.raises(sr.SpdfFormatError, match="not an spdf file"):
        sr.read_spdf(path)


def test_spdf_rejects_future_version(tmp_path):
    path = spdf_file(tmp_path, swap(HEADER, 0, "spdf 2"))
    with pytest.raises(sr.UnsupportedVersionError, match="version"):
        sr.read_spdf(path)
    assert issubclass(sr.UnsupportedVersionError, sr.SpdfFormatError)


def test_spdf_rejects_zero_grid_dim(tmp_path):
    path = spdf_file(tmp_path, swap(HEADER, 1, "grid 4 0 4"))
    with pytest.raises(sr.SpdfFormatError):
        sr.read_spdf(path)


def test_spdf_rejects_non_integer_dims(tmp_path):
    path = spdf_file(tmp_path, swap(HEADER, 1, "grid 4 4 two"))
    with pytest.raises(sr.SpdfFormatError, match="integer"):
        sr.read_spdf(path)


def test_spdf_rejects_inverted_box(tmp_path):
    path = spdf_file(tmp_path, swap(HEADER, 2, "box -1 -1 -1 1 -2 1"))
    with pytest.raises(sr.SpdfFormatError):
        sr.read_spdf(path)


def test_spdf_rejects_bad_electrons(tmp_path):
    with pytest.raises(sr.SpdfFormatError, match="positive"):
        sr.read_spdf(spdf_file(tmp_path, swap(HEADER, 3, "electrons 0")))
    with pytest.raises(sr.SpdfFormatError, match="integer"):
        sr.read_spdf(spdf_file(tmp_path, swap(HEADER, 3, "electrons x")))


def test_spdf_rejects_missing_data_line(tmp_path):
    path = spdf_file(tmp_path, swap(HEADER, 4, "payload"))
    with pytest.raises(sr.SpdfFormatError, match="data"):
        sr.read_spdf(path)


def test_spdf_rejects_truncated_header(tmp_path):
    path = tmp_path / "f.spdf"
    path.write_bytes(b"spdf 1\ngrid 4 4 4")
    with pytest.raises(sr.SpdfFormatError, match="truncated"):
        sr.read_spdf(path)


def test_spdf_rejects_truncated_payload(tmp_path):
    path = spdf_file(tmp_path, HEADER)
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(sr.SpdfFormatError, match="expected 2048"):
        sr.read_spdf(path)


def test_spdf_rejects_extra_payload(tmp_path):
    path = spdf_file(tmp_path, HEADER)
    path.write_bytes(path.read_bytes() + b"\x00" * 8)
    with pytest.raises(sr.SpdfFormatError, match="payload"):
        sr.read_spdf(path)


# -- witness directory -----------------------------------------------------------


@pytest.fixture(scope="module")
def witness_pair(mixture32, tmp_path_factory):
    witness = sr.construct_witness(mixture32)
    d = tmp_path_factory.mktemp("witness")
    sr.write_witness(d, witness)
    return witness, d


def test_witness_files_on_disk(witness_pair):
    witness, d = witness_pair
    assert (d / "witness.txt").is_file()
    n_files = sum(1 for p in d.iterdir() if p.suffix == ".bin")
    assert n_files == len(witness.branches) * witness.n_electrons


def test_witness_round_trip(witness_pair):
    witness, d = witness_pair
    back = sr.read_witness(d)
    assert back.grid.dims == witness.grid.dims
    assert back.grid.box == witness.grid.box
    assert back.n_electrons == witness.n_electrons
    assert len(back.branches) == len(witness.branches)
    for ours, theirs in zip(witness.branches, back.branches):
        assert theirs.weight == ours.weight
        assert theirs.swapped == ours.swapped
        for a, b in zip(ours.orbitals.orbitals, theirs.orbitals.orbitals):
            assert np.array_equal(a.up.values, b.up.values)
            assert np.array_equal(a.dn.values, b.dn.values)

    dens = sr.density_of(witness)
    dens_back = sr.density_of(back)
    assert np.array_equal(dens.rho_up.values, dens_back.rho_up.values)
    assert np.array_equal(dens.sigma.values, dens_back.sigma.values)


def tiny_witness(weights):
    grid = cube(4, 2.0)
    rng = np.random.default_rng(5)
    branches = []
    for w in weights:
        orb = sr.Spinor(
            up=sr.ComplexField(grid, rng.standard_normal(grid.dims) + 0j),
            dn=sr.ComplexField(grid, 1j * rng.standard_normal(grid.dims)),
        )
        branches.append(sr.WitnessBranch(
            weight=w,
            orbitals=sr.OrbitalSet(grid=grid, n_electrons=1, orbitals=(orb,)),
            swapped=False,
        ))
    return sr.Witness(grid=grid, n_electrons=1, branches=tuple(branches))


def test_witness_weights_survive_text_round_trip(tmp_path):
    # 1/3 has no short decimal form; %.17g must still reproduce the bits
    witness = tiny_witness([1.0 / 3.0, 2.0 / 3.0])
    sr.write_witness(tmp_path / "w", witness)
    back = sr.read_witness(tmp_path / "w")
    assert [b.weight for b in back.branches] == [1.0 / 3.0, 2.0 / 3.0]


def edit_manifest(d, fn):
    m = d / "witness.txt"
    lines = m.read_text().splitlines()
    m.write_text("\n".join(fn(lines)) + "\n")


@pytest.fixture()
def broken_dir(tmp_path):
    sr.write_witness(tmp_path / "w", tiny_witness([0.5, 0.5]))
    return tmp_path / "w"


def test_witness_missing_manifest(tmp_path):
    (tmp_path / "empty").mkdir()
    with pytest.raises(sr.WitnessFormatError, match="witness.txt"):
        sr.read_witness(tmp_path / "empty")


def test_witness_missing_orbital_file(broken_dir):
    (broken_dir / "branch1_orb1.bin").unlink()
    with pytest.raises(sr.WitnessFormatError, match="missing"):
        sr.read_witness(broken_dir)


def test_witness_truncated_orbital_file(broken_dir):
    f = broken_dir / "branch0_orb1.bin"
    f.write_bytes(f.read_bytes()[:-16])
    with pytest.raises(sr.WitnessFormatError, match="bytes"):
        sr.read_witness(broken_dir)


def test_witness_wrong_branch_count(broken_dir):
    edit_manifest(broken_dir, lambda L: swap(L, 4, "branches 3"))
    with pytest.raises(sr.WitnessFormatError, match="declares 3"):
        sr.read_witness(broken_dir)


def test_witness_garbage_weight(broken_dir):
    edit_manifest(
        broken_dir,
        lambda L: swap(L, 5, "branch nought 0 branch0_orb1.bin"),
    )
    with pytest.raises(sr.WitnessFormatError, match="weight"):
        sr.read_witness(broken_dir)


def test_witness_bad_swapped_flag(broken_dir):
    edit_manifest(
        broken_dir,
        lambda L: swap(L, 5, "branch 0.5 2 branch0_orb1.bin"),
    )
    with pytest.raises(sr.WitnessFormatError, match="swapped"):
        sr.read_witness(broken_dir)


def test_witness_wrong_orbital_arity(broken_dir):
    edit_manifest(
        broken_dir,
        lambda L: swap(L, 5, "branch 0.5 0 branch0_orb1.bin branch1_orb1.bin"),
    )
    with pytest.raises(sr.WitnessFormatError, match="file names"):
        sr.read_witness(broken_dir)


def test_witness_future_version(broken_dir):
    edit_manifest(broken_dir, lambda L: swap(L, 0, "witness 9"))
    with pytest.raises(sr.UnsupportedVersionError):
        sr.read_witness(broken_dir)


def test_witness_manifest_too_short(broken_dir):
    edit_manifest(broken_dir, lambda L: L[:3])
    with pytest.raises(sr.WitnessFormatError, match="short"):
        sr.read_witness(broken_dir)
