"""Ideal discrete Hopfield network used as a reference for the hardware model.

States are 0/1 and the threshold rule keeps a neuron's state when its input
equals the threshold exactly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np


@dataclass(frozen=True)
class OracleNet:
    weights: np.ndarray  # (n, n) symmetric, zero diagonal
    states: np.ndarray  # (n,) of 0/1
    threshold: float = 0.0

    @property
    def n(self) -> int:
        return len(self.states)


class OracleResult(NamedTuple):
    states: np.ndarray
    sweeps: int
    converged: bool


def hebbian_integer_weights(patterns: Sequence[Sequence[int]]) -> np.ndarray:
    """Sum of (2s_i - 1)(2s_j - 1) over stored patterns, diagonal zeroed."""
    s = 2 * np.atleast_2d(np.asarray(patterns, dtype=np.int64)) - 1
    w = s.T @ s
    np.fill_diagonal(w, 0)
    return w


def neuron_input(weights: np.ndarray, states: np.ndarray, i: int):
    # sum_j O_ji with O_ji = S_j * W_ji
    return weights[:, i] @ states


def threshold_rule(total, current_state: int, threshold: float) -> int:
    if total > threshold:
        return 1
    if total == threshold:
        return int(current_state)
    return 0


def oracle_update(net: OracleNet, order=None) -> OracleNet:
    """One asynchronous sweep in ``order`` (a permutation, or a seed for a random one)."""
    if order is None or np.isscalar(order):
        order = np.random.default_rng(order).permutation(net.n)
    s = np.array(net.states, dtype=np.int64)
    for i in order:
        s[i] = threshold_rule(neuron_input(net.weights, s, i), s[i], net.threshold)
    return replace(net, states=s)


def oracle_converge(net: OracleNet, max_sweeps: int = 100, seed=None) -> OracleResult:
    """Repeat randomly ordered sweeps until a full sweep changes nothing."""
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be >= 1")
    rng = np.random.default_rng(seed)
    current = net
    for sweep in range(1, max_sweeps + 1):
        nxt = oracle_update(current, rng.permutation(net.n))
        if np.array_equal(nxt.states, current.states):
            return OracleResult(nxt.states, sweep, True)
        current = nxt
    return OracleResult(current.states, max_sweeps, False)


def hopfield_energy(states, weights, threshold: float = 0.0) -> float:
    s = np.asarray(states, dtype=float)
    w = np.array(weights, dtype=float)
    np.fill_diagonal(w, 0.0)
    return float(-0.5 * s @ w @ s + threshold * s.sum())


def is_fixed_point(states, weights, threshold: float = 0.0) -> bool:
    s = np.asarray(states)
    return all(
        threshold_rule(neuron_input(weights, s, i), s[i], threshold) == s[i] for i in range(len(s))
    )


def all_states(n: int) -> np.ndarray:
    """Every n-bit vector, row r holding the bits of r (most significant first)."""
    idx = np.arange(2**n)[:, None]
    return ((idx >> np.arange(n - 1, -1, -1)) & 1).astype(np.int64)


def reachable_attractors(weights: np.ndarray, threshold: float = 0.0) -> list[frozenset[int]]:
    """For every start state, the fixed points reachable under some update order.

    Brute force over the asynchronous transition graph on all 2^n states;
    states are encoded as integers with neuron 0 as the most significant bit.
    """
    n = weights.shape[0]
    states = all_states(n)
    succ = []
    for code, s in enumerate(states):
        nxt = set()
        for i in range(n):
            new = threshold_rule(neuron_input(weights, s, i), s[i], threshold)
            if new != s[i]:
                nxt.add(code ^ (1 << (n - 1 - i)))
        succ.append(nxt)
    fixed = {c for c in range(2**n) if not succ[c]}
    out = []
    for start in range(2**n):
        seen = {start}
        queue = deque([start])
        while queue:
            c = queue.popleft()
            for d in succ[c]:
                if d not in seen:
                    seen.add(d)
                    queue.append(d)
        out.append(frozenset(seen & fixed))
    return out


def bits_to_code(bits) -> int:
    code = 0
    for b in bits:
        code = (code << 1) | int(b)
    return code
