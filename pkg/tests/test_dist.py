import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cond_oracle, h_oracle, joint_matrices
from gkdecomp.dist import (
    DistributionError,
    JointDistribution,
    binary_entropy,
    conditional_entropy,
    entropy,
    joint_entropy,
    load_distribution,
    save_distribution,
)
from gkdecomp.instances import block_example


def test_uniform_entropy():
    assert entropy([0.25] * 4) == pytest.approx(2.0, abs=1e-12)


def test_point_mass_entropy_is_positive_zero():
    h = entropy([1.0, 0.0])
    assert h == 0.0 and math.copysign(1.0, h) == 1.0


@pytest.mark.parametrize("p, expected", [(0.5, 1.0), (0.0, 0.0), (1.0, 0.0), (0.0125, 0.0969446061), (0.1, 0.4689955936)])
def test_binary_entropy_values(p, expected):
    assert binary_entropy(p) == pytest.approx(expected, abs=1e-8)


def test_binary_entropy_domain():
    with pytest.raises(ValueError):
        binary_entropy(1.5)


def test_block_marginals_and_entropies():
    J = block_example()
    np.testing.assert_allclose(J.p_x, [0.25] * 4)
    np.testing.assert_allclose(J.p_y, [0.25] * 4)
    assert joint_entropy(J) == pytest.approx(3.0, abs=1e-12)
    assert conditional_entropy(J, "X|Y") == pytest.approx(1.0, abs=1e-12)
    assert conditional_entropy(J, "Y|X") == pytest.approx(1.0, abs=1e-12)


def test_negative_entry_is_reported_with_position():
    with pytest.raises(DistributionError, match=r"\(2, 1\)"):
        JointDistribution.from_matrix([[0.6, 0.5], [-0.1, 0.0]])


def test_sum_far_from_one_rejected():
    with pytest.raises(DistributionError, match="sum"):
        JointDistribution.from_matrix([[0.5, 0.4], [0.0, 0.0001]])


def test_small_deviation_renormalized():
    J = JointDistribution.from_matrix([[0.5, 0.5 + 5e-7]])
    assert J.p.sum() == pytest.approx(1.0, abs=1e-15)


def test_zero_rows_stripped_with_warning():
    with pytest.warns(UserWarning):
        J = JointDistribution.from_matrix([[0.5, 0.0], [0.0, 0.0], [0.0, 0.5]], x_labels=["a", "b", "c"])
    assert J.shape == (2, 2)
    assert "b" not in J.x_labels


def test_matrix_is_read_only():
    J = block_example()
    with pytest.raises(ValueError):
        J.p[0, 0] = 1.0


def test_default_labels_are_one_based():
    J = JointDistribution.from_matrix([[0.5, 0.0], [0.0, 0.5]])
    assert J.x_labels == ("1", "2") and J.y_labels == ("1", "2")


def test_csv_parse_error_names_line():
    with pytest.raises(DistributionError, match=":2:"):
        load_distribution("0.5,0.25\n0.25,abc\n", format="csv")


def test_json_parse_error_names_line(data_dir):
    with pytest.raises(DistributionError, match="malformed.json:2"):
        load_distribution(data_dir / "malformed.json")


def test_ragged_rows_rejected():
    with pytest.raises(DistributionError, match="row 2"):
        load_distribution('{"p": [[0.5, 0.25], [0.25]]}')


def test_save_load_round_trip_is_bit_identical(tmp_path):
    J = JointDistribution.from_matrix(np.array([[0.1, 0.2, 0.0], [0.3, 0.0, 0.4]]))
    path = tmp_path / "j.json"
    save_distribution(J, path)
    K = load_distribution(path)
    assert np.array_equal(J.p, K.p)
    assert J.x_labels == K.x_labels and J.y_labels == K.y_labels
    assert json.loads(path.read_text())["p"][1][2] == 0.4


@settings(max_examples=200, deadline=None)
@given(joint_matrices())
def test_entropies_match_loop_oracle(p):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        J = JointDistribution.from_matrix(p)
    assert entropy(J.p_x) == pytest.approx(h_oracle(J.p.sum(axis=1)), abs=1e-9)
    assert joint_entropy(J) == pytest.approx(h_oracle(J.p.ravel()), abs=1e-9)
    assert conditional_entropy(J, "X|Y") == pytest.approx(cond_oracle(J.p), abs=1e-9)
    assert conditional_entropy(J, "Y|X") == pytest.approx(cond_oracle(J.p.T), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(joint_matrices())
def test_entropy_bounds(p):
    J = JointDistribution.from_matrix(p)
    hx, hxy = entropy(J.p_x), joint_entropy(J)
    assert 0.0 <= hx <= math.log2(J.n_x) + 1e-12
    assert hx <= hxy + 1e-12
    assert conditional_entropy(J) >= 0.0


@given(st.floats(0.0, 1.0))
def test_binary_entropy_symmetric(p):
    assert binary_entropy(p) == pytest.approx(binary_entropy(1.0 - p), abs=1e-12)
