import numpy as np
import pytest

from liesync.cost import (Configuration, NetworkConfig, check_invariance,
                          cost, cost_se3, cost_so3, dispersion, left_translate)
from liesync.experiment import initial_configuration
from liesync.groups import (AlgebraVector, GroupElement, GroupTag, exp_so3,
                            random_element)

SO3 = GroupTag.SO3
SE3 = GroupTag.SE3
K3 = NetworkConfig.complete(SO3, 3)


def random_configuration(tag, m, rng):
    return Configuration(tuple(random_element(tag, rng) for _ in range(m)))


# --- network validation --------------------------------------------------------

def test_network_rejects_self_loop():
    with pytest.raises(ValueError, match="self-loop"):
        NetworkConfig(SO3, 3, ((0, 0), (0, 1), (1, 2)))


def test_network_rejects_duplicate_edges():
    with pytest.raises(ValueError, match="duplicate"):
        NetworkConfig(SO3, 3, ((0, 1), (1, 0), (1, 2)))


def test_network_rejects_disconnected_graph():
    with pytest.raises(ValueError, match="connected"):
        NetworkConfig(SO3, 4, ((0, 1), (2, 3)))


def test_network_rejects_out_of_range_edge():
    with pytest.raises(ValueError, match="out of range"):
        NetworkConfig(SO3, 3, ((0, 3), (0, 1), (1, 2)))


def test_complete_graph_edge_count():
    assert len(NetworkConfig.complete(SO3, 5).edges) == 10


def test_configuration_requires_single_tag(rng):
    with pytest.raises(ValueError, match="tag"):
        Configuration((random_element(SO3, rng), random_element(SE3, rng)))


# --- SO(3) cost -----------------------------------------------------------------

def test_cost_so3_zero_on_synchronized(rng):
    g = random_element(SO3, rng)
    cfg = Configuration((g, g, g))
    assert abs(cost_so3(K3, cfg)) < 1e-13


def test_cost_so3_half_turn_example():
    # two mixed edges with tr(g1^T g3) = -1 contribute 4 each
    identity = GroupElement.identity(SO3)
    flipped = GroupElement(SO3, np.diag([-1.0, -1.0, 1.0]))
    cfg = Configuration((identity, identity, flipped))
    assert abs(cost_so3(K3, cfg) - 8.0) < 1e-12


def test_cost_so3_benchmark_regression(so3_benchmark_config):
    # value pinned from an independent scalar evaluation of the fixture states
    cfg = initial_configuration(so3_benchmark_config)
    assert abs(cost_so3(K3, cfg) - 7.820491564449488) < 1e-9


def test_cost_so3_equals_half_frobenius_form(rng):
    for _ in range(20):
        cfg = random_configuration(SO3, 3, rng)
        states = cfg.as_array()
        literal = 0.5 * sum(
            np.trace((states[i] - states[j]).T @ (states[i] - states[j]))
            for i, j in K3.edges)
        assert abs(cost_so3(K3, cfg) - literal) < 1e-12


def test_cost_so3_nonnegative(rng):
    for _ in range(50):
        assert cost_so3(K3, random_configuration(SO3, 3, rng)) >= 0.0


def test_cost_tag_mismatch(rng):
    with pytest.raises(ValueError):
        cost_so3(K3, random_configuration(SE3, 3, rng))
    with pytest.raises(ValueError):
        cost_se3(NetworkConfig.complete(SE3, 3), random_configuration(SO3, 3, rng))


# --- SE(3) cost -----------------------------------------------------------------

def test_cost_se3_zero_on_synchronized(rng):
    g = random_element(SE3, rng)
    cfg = Configuration((g, g, g))
    assert abs(cost_se3(NetworkConfig.complete(SE3, 3), cfg)) < 1e-13


def test_cost_se3_single_translation_edge():
    net = NetworkConfig(SE3, 2, ((0, 1),))
    a = np.eye(4)
    b = np.eye(4)
    b[:3, 3] = [1.0, 0.0, 0.0]
    cfg = Configuration((GroupElement(SE3, a), GroupElement(SE3, b)))
    assert abs(cost_se3(net, cfg) - 0.5) < 1e-15


def test_cost_se3_benchmark_regression(se3_benchmark_config):
    cfg = initial_configuration(se3_benchmark_config)
    net = NetworkConfig.complete(SE3, 3)
    assert abs(cost_se3(net, cfg) - 3.15885676535977) < 1e-9


def test_cost_se3_splits_into_rotation_and_translation(rng):
    net = NetworkConfig.complete(SE3, 3)
    cfg = random_configuration(SE3, 3, rng)
    states = cfg.as_array()
    rot_cfg = Configuration.from_array(SO3, states[:, :3, :3].copy())
    rot_part = cost_so3(K3, rot_cfg)
    trans_part = 0.5 * sum(
        float(np.sum((states[i, :3, 3] - states[j, :3, 3]) ** 2))
        for i, j in net.edges)
    assert abs(cost_se3(net, cfg) - (rot_part + trans_part)) < 1e-12


# --- invariance -----------------------------------------------------------------

def test_invariance_identity_factor(rng):
    cfg = random_configuration(SO3, 3, rng)
    assert check_invariance(K3, cfg, GroupElement.identity(SO3)) == 0.0


def test_invariance_random_factors_both_groups(rng):
    for tag, net in ((SO3, K3), (SE3, NetworkConfig.complete(SE3, 3))):
        for _ in range(25):
            cfg = random_configuration(tag, 3, rng)
            deviation = check_invariance(net, cfg, trials=4, rng=rng)
            assert deviation <= 1e-12


def test_left_translate_moves_every_agent(rng):
    cfg = random_configuration(SO3, 3, rng)
    g_c = random_element(SO3, rng)
    moved = left_translate(cfg, g_c)
    for before, after in zip(cfg.states, moved.states):
        assert np.max(np.abs(after.mat - g_c.mat @ before.mat)) < 1e-15


# --- dispersion & the zero-cost equivalence ---------------------------------------

def test_dispersion_zero_iff_synchronized(rng):
    g = random_element(SO3, rng)
    assert dispersion(Configuration((g, g, g))) == 0.0
    cfg = random_configuration(SO3, 3, rng)
    assert dispersion(cfg) > 0.0
    assert cost_so3(K3, cfg) > 0.0


def test_dispersion_two_agents_is_their_distance(rng):
    a, b = random_element(SO3, rng), random_element(SO3, rng)
    cfg = Configuration((a, b))
    assert dispersion(cfg) == float(np.linalg.norm(a.mat - b.mat))


def test_dispersion_three_agents_max_of_pairs(rng):
    cfg = random_configuration(SO3, 3, rng)
    states = cfg.as_array()
    pairwise = [float(np.linalg.norm(states[i] - states[j]))
                for i in range(3) for j in range(i + 1, 3)]
    assert dispersion(cfg) == max(pairwise)


def test_zero_cost_equivalence_on_connected_graph(rng):
    # J = 0 <=> dispersion = 0 <=> edgewise equality, for a connected graph
    g = random_element(SO3, rng)
    sync = Configuration((g, g, g))
    assert abs(cost_so3(K3, sync)) < 1e-13 and dispersion(sync) == 0.0
    from liesync.groups import multiply
    nudged = multiply(g, exp_so3(AlgebraVector(SO3, [1e-3, 0, 0])))
    near = Configuration((g, g, nudged))
    assert cost_so3(K3, near) > 1e-8 and dispersion(near) > 1e-4
