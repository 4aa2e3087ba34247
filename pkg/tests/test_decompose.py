import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import spinrep as sr

from _helpers import (
    cube,
    field_from_arrays,
    gaussian_values,
    max_abs_diff,
    mixture,
    symmetric_rank1,
)


# -- cutoff --------------------------------------------------------------------


def test_cutoff_plateaus():
    chi = sr.CutoffFunction()
    assert chi(0.5) == 0.0
    assert chi(0.1) == 0.0
    assert chi(2.0) == 1.0
    assert chi(100.0) == 1.0
    assert chi(np.inf) == 1.0


def test_cutoff_midpoint():
    # quintic smoothstep hits 1/2 at the middle of the transition window
    chi = sr.CutoffFunction()
    np.testing.assert_allclose(chi(1.25), 0.5, rtol=1e-14)


def test_cutoff_vectorized():
    chi = sr.CutoffFunction()
    u = np.array([0.0, 0.5, 1.25, 2.0, np.inf])
    np.testing.assert_allclose(chi(u), [0.0, 0.0, 0.5, 1.0, 1.0], atol=1e-14)


@settings(max_examples=50, deadline=None)
@given(a=st.floats(0.0, 3.0), b=st.floats(0.0, 3.0))
def test_cutoff_monotone(a, b):
    chi = sr.CutoffFunction()
    lo, hi = min(a, b), max(a, b)
    assert chi(lo) <= chi(hi) + 1e-15
    assert 0.0 <= chi(a) <= 1.0


# -- rank-1 split ----------------------------------------------------------------


def test_rank1_split_recombines(mixture32):
    split = sr.rank1_split(mixture32)
    pairs = list(split.pairs())
    assert len(pairs) == 2
    back = sr.convex_combine(pairs)
    assert max_abs_diff(back, mixture32) <= 1e-12 * mixture32.scale


def test_rank1_split_pieces_are_null_det(mixture32):
    split = sr.rank1_split(mixture32)
    for _, piece in split.pairs():
        det = sr.det_field(piece).values
        assert np.max(np.abs(det)) <= 1e-13 * piece.scale**2


def test_rank1_split_pieces_are_admissible(mixture32):
    for _, piece in sr.rank1_split(mixture32).pairs():
        assert sr.check(piece).passed


def test_rank1_split_weight_is_up_fraction(mixture32):
    split = sr.rank1_split(mixture32)
    expect = sr.integrate(mixture32.rho_up) / 2.0
    np.testing.assert_allclose(split.weight, expect, rtol=1e-10)


def test_rank1_split_pieces_renormalized(mixture32):
    for _, piece in sr.rank1_split(mixture32).pairs():
        np.testing.assert_allclose(sr.trace_integral(piece), 2.0, rtol=1e-9)


def test_rank1_split_degenerates_on_polarized(grid32):
    # fully up-polarized: the down piece carries no weight
    g = 2.0 * gaussian_values(grid32)
    r = field_from_arrays(grid32, g, np.zeros_like(g),
                          np.zeros_like(g, dtype=complex))
    split = sr.rank1_split(r)
    assert split.weight == 1.0
    assert split.piece_two is None
    assert max_abs_diff(split.piece_one, r) <= 1e-12 * r.scale


def test_rank1_split_rejects_non_psd(grid32):
    g = gaussian_values(grid32)
    r = field_from_arrays(grid32, g, g.copy(), (1.01 * g).astype(complex))
    with pytest.raises(sr.NotPositiveSemidefiniteError):
        sr.rank1_split(r)


# -- ratio split -----------------------------------------------------------------


def test_ratio_split_uniform_ratio_weight(rank1_32):
    # symmetric field: ratio = 1 everywhere, weight = chi(1)^2 = (17/81)^2
    split = sr.ratio_split(rank1_32)
    np.testing.assert_allclose(split.weight, (17.0 / 81.0) ** 2, rtol=1e-10)


def test_ratio_split_recombines(rank1_32):
    split = sr.ratio_split(rank1_32)
    back = sr.convex_combine(list(split.pairs()))
    assert max_abs_diff(back, rank1_32) <= 1e-12 * rank1_32.scale


def test_ratio_split_pieces_satisfy_hypotheses(rank1_32):
    split = sr.ratio_split(rank1_32)
    floor = 1e-12 * rank1_32.scale
    # piece_one is the swap slot: it must satisfy rho_dn <= 2 rho_up
    p1 = split.piece_one
    live = p1.rho_total.values >= floor
    assert np.max((p1.rho_dn.values - 2.0 * p1.rho_up.values)[live]) <= floor
    # piece_two can be built directly: rho_up <= 2 rho_dn
    p2 = split.piece_two
    live = p2.rho_total.values >= floor
    assert np.max((p2.rho_up.values - 2.0 * p2.rho_dn.values)[live]) <= floor


def test_ratio_split_pieces_are_admissible(rank1_32):
    for _, piece in sr.ratio_split(rank1_32).pairs():
        assert sr.check(piece).passed


def test_ratio_split_degenerate_down_only(grid32):
    g = 2.0 * gaussian_values(grid32)
    r = field_from_arrays(grid32, np.zeros_like(g), g,
                          np.zeros_like(g, dtype=complex))
    split = sr.ratio_split(r)
    assert split.weight == 0.0
    assert split.piece_one is None
    assert max_abs_diff(split.piece_two, r) <= 1e-12 * r.scale


def test_ratio_split_degenerate_up_only(grid32):
    g = 2.0 * gaussian_values(grid32)
    r = field_from_arrays(grid32, g, np.zeros_like(g),
                          np.zeros_like(g, dtype=complex))
    split = sr.ratio_split(r)
    assert split.weight == 1.0
    assert split.piece_two is None
    assert max_abs_diff(split.piece_one, r) <= 1e-12 * r.scale


def test_ratio_split_requires_null_det(mixture32):
    with pytest.raises(sr.NullDeterminantError):
        sr.ratio_split(mixture32)


# -- full pipeline -----------------------------------------------------------------


def test_witness_polarized_rank1_single_branch(grid32):
    # fully up-polarized pure state: one branch of weight 1, built via swap
    g = gaussian_values(grid32)
    psi = sr.ComplexField(grid32, np.sqrt(g).astype(complex))
    zero = sr.zeros_complex(grid32)
    r = sr.rank1_from_orbital(psi, zero, 1)
    w = sr.construct_witness(r)
    assert len(w.branches) == 1
    assert w.branches[0].weight == 1.0
    assert w.branches[0].swapped
    assert max_abs_diff(sr.density_of(w), r) <= 1e-12 * r.scale


def test_witness_symmetric_mixture_two_branches(mixture48):
    w = sr.construct_witness(mixture48)
    assert len(w.branches) == 2
    np.testing.assert_allclose(sorted(b.weight for b in w.branches), [0.5, 0.5],
                               atol=1e-10)
    assert sorted(b.swapped for b in w.branches) == [False, True]
    assert sum(b.weight for b in w.branches) == 1.0
    assert max_abs_diff(sr.density_of(w), mixture48) <= 1e-10 * mixture48.scale


def test_witness_asymmetric_mixture_four_branches():
    r = mixture(48, half=10.0, coupling=0.9, width_up=1.3, width_dn=2.2)
    w = sr.construct_witness(r)
    assert len(w.branches) == 4
    assert abs(sum(b.weight for b in w.branches) - 1.0) <= 1e-12
    assert all(b.weight > 0 for b in w.branches)
    rep = sr.verify(w, r)
    assert rep.mismatch <= 1e-8


def test_witness_branch_pieces_are_rank1(mixture48):
    w = sr.construct_witness(mixture48)
    for branch in w.branches:
        single = sr.Witness(grid=w.grid, n_electrons=w.n_electrons,
                            branches=(sr.WitnessBranch(1.0, branch.orbitals),))
        piece = sr.density_of(single)
        det = sr.det_field(piece).values
        assert np.max(np.abs(det)) <= 1e-10 * piece.scale**2


def test_witness_rejects_inadmissible(grid32):
    g = gaussian_values(grid32)
    r = field_from_arrays(grid32, g, g.copy(), (1.01 * g).astype(complex))
    with pytest.raises(sr.PipelineError) as err:
        sr.construct_witness(r)
    assert err.value.stage == "admissibility"


def test_pipeline_error_carries_stage():
    err = sr.PipelineError("ratio_split", "boom")
    assert err.stage == "ratio_split"
    assert "ratio_split" in str(err)
