"""Synchronization cost over a network of agents, and related diagnostics.

The SO(3) cost is sum over edges of (3 - tr(g_i^T g_j)), which equals half the
summed squared Frobenius distances.  The SE(3) cost adds half the squared
translation distance per edge.  Both are zero exactly on configurations where
the agents coincide along every edge, and are invariant under left translation
of all agents by a common group element.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .groups import GroupElement, GroupTag, group_distance, random_element


@dataclass(frozen=True)
class NetworkConfig:
    """Undirected synchronization graph over m agents (0-based, connected)."""

    tag: GroupTag
    m: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("need at least two agents")
        seen = set()
        normalized = []
        for e in self.edges:
            i, j = int(e[0]), int(e[1])
            if i == j:
                raise ValueError(f"self-loop ({i}, {j}) not allowed")
            if not (0 <= i < self.m and 0 <= j < self.m):
                raise ValueError(f"edge ({i}, {j}) out of range for m={self.m}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            normalized.append(key)
        normalized.sort()
        object.__setattr__(self, "edges", tuple(normalized))
        if not self._connected():
            raise ValueError("synchronization graph must be connected")

    def _connected(self) -> bool:
        adj = {i: [] for i in range(self.m)}
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        stack, seen = [0], {0}
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == self.m

    @classmethod
    def complete(cls, tag: GroupTag, m: int) -> NetworkConfig:
        return cls(tag, m, tuple((i, j) for i in range(m) for j in range(i + 1, m)))

    def edge_array(self) -> np.ndarray:
        return np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)


@dataclass(frozen=True, eq=False)
class Configuration:
    """An ordered tuple of agent states, all on the same group."""

    states: tuple[GroupElement, ...]

    def __post_init__(self):
        states = tuple(self.states)
        if not states:
            raise ValueError("configuration must contain at least one state")
        tag = states[0].tag
        if any(g.tag is not tag for g in states):
            raise ValueError("all states must share one group tag")
        object.__setattr__(self, "states", states)

    @property
    def tag(self) -> GroupTag:
        return self.states[0].tag

    @property
    def m(self) -> int:
        return len(self.states)

    def as_array(self) -> np.ndarray:
        return np.array([g.mat for g in self.states])

    @classmethod
    def from_array(cls, tag: GroupTag, arr: np.ndarray) -> Configuration:
        return cls(tuple(GroupElement(tag, a) for a in arr))


# array-level cost kernels (hot paths work on stacked (m, d, d) states)

def cost_so3_states(states: np.ndarray, edges: np.ndarray) -> float:
    J = 0.0
    for i, j in edges:
        J += 3.0 - float(np.sum(states[i] * states[j]))  # tr(a^T b)
    return J


def cost_se3_states(states: np.ndarray, edges: np.ndarray) -> float:
    J = 0.0
    for i, j in edges:
        J += 3.0 - float(np.sum(states[i, :3, :3] * states[j, :3, :3]))
        dt_ = states[i, :3, 3] - states[j, :3, 3]
        J += 0.5 * float(dt_ @ dt_)
    return J


def cost_states(states: np.ndarray, edges: np.ndarray, tag: GroupTag) -> float:
    if tag is GroupTag.SO3:
        return cost_so3_states(states, edges)
    return cost_se3_states(states, edges)


def _check_net(net: NetworkConfig, cfg: Configuration, expect: GroupTag) -> None:
    if net.tag is not expect or cfg.tag is not expect:
        raise ValueError(f"expected {expect.value} network and configuration")
    if cfg.m != net.m:
        raise ValueError(f"configuration has {cfg.m} states, network expects {net.m}")


def cost_so3(net: NetworkConfig, cfg: Configuration) -> float:
    """Sum over edges of (3 - tr(g_i^T g_j)); zero iff synchronized edgewise."""
    _check_net(net, cfg, GroupTag.SO3)
    return cost_so3_states(cfg.as_array(), net.edge_array())


def cost_se3(net: NetworkConfig, cfg: Configuration) -> float:
    """Rotation cost of the blocks plus 0.5 ||t_i - t_j||^2 per edge."""
    _check_net(net, cfg, GroupTag.SE3)
    return cost_se3_states(cfg.as_array(), net.edge_array())


def cost(net: NetworkConfig, cfg: Configuration) -> float:
    if net.tag is GroupTag.SO3:
        return cost_so3(net, cfg)
    return cost_se3(net, cfg)


def left_translate(cfg: Configuration, g_c: GroupElement) -> Configuration:
    """Apply the same left factor to every agent."""
    return Configuration(tuple(
        GroupElement(cfg.tag, g_c.mat @ g.mat) for g in cfg.states))


def check_invariance(net: NetworkConfig, cfg: Configuration,
                     g_c: GroupElement | None = None, trials: int = 1,
                     rng: np.random.Generator | None = None) -> float:
    """Max relative cost deviation |J(g_c * cfg) - J(cfg)| / (1 + J) over trials.

    A fixed g_c gives a single deviation; otherwise `trials` group elements
    are sampled from rng (default seeded generator).
    """
    if g_c is not None and g_c.tag is not cfg.tag:
        raise ValueError("g_c must share the configuration's group tag")
    J = cost(net, cfg)
    factors = [g_c] if g_c is not None else [
        random_element(cfg.tag, rng if rng is not None else np.random.default_rng(0))
        for _ in range(trials)]
    worst = 0.0
    for f in factors:
        deviation = abs(cost(net, left_translate(cfg, f)) - J) / (1.0 + J)
        worst = max(worst, deviation)
    return worst


def dispersion(cfg: Configuration) -> float:
    """Max pairwise Frobenius distance; zero iff all agents coincide."""
    worst = 0.0
    for i in range(cfg.m):
        for j in range(i + 1, cfg.m):
            worst = max(worst, group_distance(cfg.states[i], cfg.states[j]))
    return worst


def dispersion_states(states: np.ndarray) -> float:
    m = states.shape[0]
    worst = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            worst = max(worst, float(np.linalg.norm(states[i] - states[j])))
    return worst
