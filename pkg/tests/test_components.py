import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import h_oracle, joints
from gkdecomp.dist import JointDistribution
from gkdecomp.components import connected_components, gk_common_information, gk_labelings
from gkdecomp.instances import (
    block_example,
    epsilon_example,
    identity_coupling,
    independent_uniform,
    perturbed_block_example,
    planted_components,
    point_mass,
)
from gkdecomp.objectives import disagreement_probability, label_entropies


def nx_components(J):
    """Component masses from networkx on the bipartite support graph."""
    g = nx.Graph()
    g.add_nodes_from(("x", i) for i in range(J.n_x))
    g.add_nodes_from(("y", j) for j in range(J.n_y))
    for i, j in zip(*np.nonzero(J.p > 0)):
        g.add_edge(("x", int(i)), ("y", int(j)))
    masses = []
    for comp in nx.connected_components(g):
        xs = [i for side, i in comp if side == "x"]
        masses.append(float(J.p_x[xs].sum()))
    return sorted(masses)


@pytest.mark.parametrize(
    "J, hk, count",
    [
        (block_example(), 1.0, 2),
        (perturbed_block_example(0.1), 0.0, 1),
        (epsilon_example(0.2), 0.0, 1),
        (independent_uniform(3, 4), 0.0, 1),
        (identity_coupling(4), 2.0, 4),
        (point_mass(), 0.0, 1),
    ],
)
def test_known_instances(J, hk, count):
    h, dec = gk_common_information(J)
    assert h == pytest.approx(hk, abs=1e-12)
    assert dec.count == count


def test_component_ids_canonical():
    # row 0 now sits in the second block; ids still start from x-index 0
    J = block_example()
    perm = [2, 0, 3, 1]
    K = JointDistribution.from_matrix(J.p[perm])
    dec = connected_components(K)
    assert dec.component_of_x.tolist() == [0, 1, 0, 1]
    assert dec.component_of_x[0] == 0


def test_gk_labelings_block():
    J = block_example()
    L = gk_labelings(J)
    assert L.L == 2
    assert L.phi_x.tolist() == [0, 0, 1, 1]
    assert L.phi_y.tolist() == [0, 0, 1, 1]
    assert disagreement_probability(J, L) == 0.0
    assert label_entropies(J, L)[0] == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=150, deadline=None)
@given(joints(max_dim=6))
def test_matches_networkx(J):
    h, dec = gk_common_information(J)
    masses = nx_components(J)
    assert dec.count == len(masses)
    np.testing.assert_allclose(sorted(dec.weights), masses, atol=1e-12)
    assert h == pytest.approx(h_oracle(masses), abs=1e-9)


@settings(max_examples=150, deadline=None)
@given(joints(max_dim=6))
def test_gk_labelings_agree_and_bound(J):
    h, dec = gk_common_information(J)
    L = gk_labelings(J)
    assert disagreement_probability(J, L) == 0.0
    assert label_entropies(J, L)[0] == pytest.approx(h, abs=1e-9)
    assert h <= math.log2(dec.count) + 1e-12
    assert h <= min(h_oracle(J.p_x), h_oracle(J.p_y)) + 1e-9


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 3), st.integers(1, 3)), min_size=1, max_size=4), st.integers(0, 10**6))
def test_planted_components_recovered(sizes, seed):
    J = planted_components(np.random.default_rng(seed), sizes, shuffle=True)
    _, dec = gk_common_information(J)
    assert dec.count == len(sizes)


def test_members_partition_alphabets():
    J = identity_coupling(3)
    dec = connected_components(J)
    xs = sorted(i for c in range(dec.count) for i in dec.members(c)[0])
    assert xs == [0, 1, 2]
