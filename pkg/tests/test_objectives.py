import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cond_oracle, h_oracle, joints
from gkdecomp.components import gk_labelings
from gkdecomp.dist import binary_entropy, entropy
from gkdecomp.instances import (
    block_example,
    block_labeling,
    epsilon_example,
    epsilon_labeling,
    independent_uniform,
    perturbed_block_example,
    random_labeling,
)
from gkdecomp.labeling import LabelingPair
from gkdecomp.objectives import (
    conductance_ratio,
    cut_sets,
    decomposition_report,
    disagreement_probability,
    helper_rate_binary,
    helper_rate_general,
    label_entropies,
    label_joint,
    lagrangian_objective,
    matrix_objective_binary,
    rate_region_binary,
    rate_region_general,
    residual_entropy,
)

H_0125 = 0.0969446061  # h(1/80), mpmath
H_01 = 0.4689955936  # h(0.1), mpmath


@st.composite
def joint_and_labeling(draw, L=2, max_dim=5):
    J = draw(joints(max_dim=max_dim))
    seed = draw(st.integers(0, 2**32 - 1))
    lab = random_labeling(np.random.default_rng(seed), J.n_x, J.n_y, L)
    return J, lab


def perr_oracle(J, lab):
    total = 0.0
    for i in range(J.n_x):
        for j in range(J.n_y):
            if lab.phi_x[i] != lab.phi_y[j]:
                total += J.p[i, j]
    return total


def test_block_gk_labeling_quantities():
    J = block_example()
    L = gk_labelings(J)
    assert disagreement_probability(J, L) == 0.0
    assert helper_rate_binary(J, L) == 0.0
    assert helper_rate_general(J, L) == 0.0
    assert label_entropies(J, L) == pytest.approx((1.0, 1.0), abs=1e-12)
    assert lagrangian_objective(J, L, 5.0) == pytest.approx(1.0, abs=1e-12)


def test_perturbed_block_rates():
    J = perturbed_block_example(0.1)
    L = block_labeling()
    assert disagreement_probability(J, L) == pytest.approx(0.0125, abs=1e-15)
    assert helper_rate_binary(J, L) == pytest.approx(H_0125, abs=1e-9)
    assert helper_rate_general(J, L) < helper_rate_binary(J, L)


def test_perturbed_cut_sets():
    J = perturbed_block_example(0.1)
    sx, sy, hx, hy = cut_sets(J, block_labeling())
    # 0-based: the second x-symbol and the third y-symbol
    assert sx == (1,) and sy == (2,)
    assert hx == pytest.approx(h_oracle([0.25, 0.75]), abs=1e-12)
    assert hy == pytest.approx(h_oracle([J.p_y[2], 1 - J.p_y[2]]), abs=1e-12)
    assert hx < entropy(J.p_x)


def test_gk_labelings_have_empty_cut_sets():
    J = block_example()
    sx, sy, hx, hy = cut_sets(J, gk_labelings(J))
    assert sx == () and sy == () and hx == 0.0 and hy == 0.0


def test_epsilon_example_helper_rate_and_slope():
    J = epsilon_example(0.2)
    L = epsilon_labeling()
    assert helper_rate_binary(J, L) == pytest.approx(H_01, abs=1e-9)
    region = rate_region_binary(J, L)
    slope = region.face_slope()
    hfx, hfy = label_entropies(J, L)
    assert slope == pytest.approx(-hfy / hfx, abs=1e-12)
    assert abs(slope + 1.0) > 1e-3


def test_rate_region_endpoints_match_corners():
    J = perturbed_block_example(0.1)
    L = block_labeling()
    region = rate_region_binary(J, L, [0.0, 0.5, 1.0])
    a0, a1 = region.dominant_face[0], region.dominant_face[-1]
    hx_fx = residual_entropy(J.p_x, L.phi_x)
    hy_fy = residual_entropy(J.p_y, L.phi_y)
    assert a0[1:3] == pytest.approx((hx_fx, entropy(J.p_y)), abs=1e-12)
    assert a1[1:3] == pytest.approx((entropy(J.p_x), hy_fy), abs=1e-12)
    assert all(r[3] == pytest.approx(H_0125, abs=1e-9) for r in region.dominant_face)


def test_rate_region_csv_format():
    region = rate_region_binary(block_example(), block_labeling(), [0.0, 1.0])
    lines = region.to_csv().splitlines()
    assert lines[0] == "alpha,R_X,R_Y,R_H"
    assert lines[1] == "0.000000,1.000000,2.000000,0.000000"


def test_general_region_corners():
    J = epsilon_example(0.2)
    L = epsilon_labeling()
    (rx, ry, rh), (rx2, ry2, rh2) = rate_region_general(J, L).corner_points
    m = label_joint(J, L)
    assert rh == pytest.approx(cond_oracle(m), abs=1e-12)
    assert rh2 == pytest.approx(cond_oracle(m.T), abs=1e-12)
    assert ry == pytest.approx(entropy(J.p_y), abs=1e-12)
    assert rx2 == pytest.approx(entropy(J.p_x), abs=1e-12)


def test_conductance_cases():
    J = block_example()
    assert conductance_ratio(J, block_labeling()) == math.inf
    Jp = perturbed_block_example(0.1)
    assert conductance_ratio(Jp, block_labeling()) == pytest.approx(0.5 / 0.0125)
    # +1 side carries three quarters of the mass
    assert conductance_ratio(J, LabelingPair([0, 0, 0, 1], [0, 0, 1, 1], 2)) is None


def test_independent_uniform_has_positive_helper_rate():
    J = independent_uniform(2, 2)
    L = LabelingPair([0, 1], [0, 1], 2)
    assert disagreement_probability(J, L) == pytest.approx(0.5)
    assert helper_rate_binary(J, L) == pytest.approx(1.0)


def test_size_mismatch_rejected():
    with pytest.raises(ValueError):
        disagreement_probability(block_example(), LabelingPair([0, 1], [0, 1], 2))


def test_report_fields():
    J = perturbed_block_example(0.1)
    rep = decomposition_report(J, block_labeling(), lambdas=(1.0,))
    d = rep.as_dict()
    assert d["S_X"] == [1] and d["S_Y"] == [2]
    assert d["P_err"] == pytest.approx(0.0125)
    assert d["lagrangian_at"]["1.0"] == pytest.approx(1.0 - helper_rate_general(J, block_labeling()))


@settings(max_examples=300, deadline=None)
@given(joint_and_labeling())
def test_disagreement_matches_loop(args):
    J, lab = args
    assert disagreement_probability(J, lab) == pytest.approx(perr_oracle(J, lab), abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(joint_and_labeling())
def test_sign_flip_complements_disagreement(args):
    J, lab = args
    assert disagreement_probability(J, lab.negate_y()) == pytest.approx(1.0 - disagreement_probability(J, lab), abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(joint_and_labeling())
def test_matrix_objective_equals_entropy_form(args):
    J, lab = args
    sx, sy = lab.signs()
    perr = disagreement_probability(J, lab)
    hfx = label_entropies(J, lab)[0]
    expected = hfx - 2.0 * binary_entropy(perr)
    assert matrix_objective_binary(J, sx, sy, 2.0) == pytest.approx(expected, abs=1e-9)


@settings(max_examples=300, deadline=None)
@given(joint_and_labeling(L=3))
def test_helper_rates_ordering(args):
    J, lab = args
    m = label_joint(J, lab)
    hg = helper_rate_general(J, lab)
    assert hg == pytest.approx(cond_oracle(m), abs=1e-9)
    assert -1e-12 <= hg <= label_entropies(J, lab)[0] + 1e-9


@settings(max_examples=300, deadline=None)
@given(joint_and_labeling())
def test_binary_helper_dominates_general(args):
    # Fano-type bound: H(phi_x | phi_y) <= h(P_err) for binary labels
    J, lab = args
    assert helper_rate_general(J, lab) <= helper_rate_binary(J, lab) + 1e-9


@settings(max_examples=300, deadline=None)
@given(joint_and_labeling(L=3))
def test_chain_rule(args):
    J, lab = args
    hfx, hfy = label_entropies(J, lab)
    assert entropy(J.p_x) == pytest.approx(hfx + residual_entropy(J.p_x, lab.phi_x), abs=1e-9)
    assert entropy(J.p_y) == pytest.approx(hfy + residual_entropy(J.p_y, lab.phi_y), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(joint_and_labeling(L=3))
def test_cut_entropies_bounded(args):
    J, lab = args
    sx, sy, hx, hy = cut_sets(J, lab)
    assert hx <= entropy(J.p_x) + 1e-12 and hy <= entropy(J.p_y) + 1e-12
    if disagreement_probability(J, lab) == 0.0:
        assert sx == () and sy == ()


@settings(max_examples=200, deadline=None)
@given(joint_and_labeling())
def test_face_slope_formula(args):
    J, lab = args
    hfx, hfy = label_entropies(J, lab)
    slope = rate_region_binary(J, lab, [0.0, 1.0]).face_slope()
    if hfx <= 1e-12:
        assert slope is None
    else:
        assert slope == pytest.approx(-hfy / hfx, abs=1e-9)
