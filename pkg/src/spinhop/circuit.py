"""The two resistive sub-circuits of a neuron and supply power bookkeeping.

Dendrite: every pre-synaptic branch is a weight-voltage source in series with
that axon's MTJ.  All branches meet at one node, which returns to ground
through the soma's heavy-metal track (``r_metal``).  The current through the
track is what moves the soma's wall.  During charge-up the node is held at
``+/-V_C`` by an ideal source.

Drive: ``V_DW`` feeds the soma MTJ in series with the ``B`` axon tracks in
parallel, so each axon receives an equal share of the current.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .device import DeviceParams, ParameterError, mobility_k


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class SynapseBranch:
    source_voltage: float  # V, the trained weight W_ij
    branch_resistance: float  # ohm, the pre-synaptic axon's MTJ


@dataclass(frozen=True)
class DendriteSolution:
    node_voltage: float
    track_current: float  # A into the soma track; positive drives toward ON
    branch_currents: tuple[float, ...] = field(default_factory=tuple)
    clamp_current: float = 0.0

    @property
    def kcl_residual(self) -> float:
        return sum(self.branch_currents) + self.clamp_current - self.track_current


def dendrite_solve(
    branches: Sequence[SynapseBranch], r_metal: float, clamp: float | None = None
) -> DendriteSolution:
    """Solve the star node of one dendrite, optionally clamped to ``clamp`` volts."""
    if not branches and clamp is None:
        raise TopologyError("a dendrite needs at least one branch or a clamp")
    if r_metal <= 0 or any(b.branch_resistance <= 0 for b in branches):
        raise ParameterError("resistances must be positive")
    v = np.array([b.source_voltage for b in branches], dtype=float)
    g = 1.0 / np.array([b.branch_resistance for b in branches], dtype=float)
    if clamp is None:
        node = float(np.dot(g, v) / (g.sum() + 1.0 / r_metal))
    else:
        node = float(clamp)
    branch_i = (v - node) * g
    track = node / r_metal
    clamp_i = 0.0 if clamp is None else track - float(branch_i.sum())
    return DendriteSolution(node, track, tuple(branch_i.tolist()), clamp_i)


def dendrite_node_voltage(v: np.ndarray, g: np.ndarray, g_metal: float) -> np.ndarray:
    """Unclamped node voltage for many dendrites at once.

    ``v`` and ``g`` have shape (n_dendrites, n_branches); entries with zero
    conductance simply drop out, which is how the diagonal is excluded.
    """
    return (v * g).sum(axis=-1) / (g.sum(axis=-1) + g_metal)


def axon_drive_current(v_dw, soma_mtj_resistance, r_metal: float, branch_count: int):
    """Per-branch drive current of the soma-to-axon divider."""
    if branch_count < 1:
        raise ParameterError("branch_count must be >= 1")
    b = branch_count
    return v_dw / (b * (soma_mtj_resistance + r_metal / b))


class CalibrationMode(str, enum.Enum):
    BALANCED = "balanced"
    N_PLUS_ONE = "n_plus_one"
    NO_METAL = "no_metal"
    NO_METAL_TMR = "no_metal_tmr"


def calibrate_vdw(
    params: DeviceParams, n_neurons: int, mode: CalibrationMode | str | float = "balanced"
) -> float:
    """Soma-to-axon supply voltage that places the axon zero-velocity point mid-way.

    ``balanced`` uses the physical branch count ``N - 1`` and keeps the
    metal-track term.  ``n_plus_one`` keeps that term but counts ``N + 1``
    branches.  ``no_metal`` drops the track term and uses the mean MTJ
    resistance; ``no_metal_tmr`` is the same quantity written through R_P and
    the TMR ratio.  A positive float is returned unchanged.
    """
    if n_neurons < 2:
        raise ParameterError("n_neurons must be >= 2")
    if not isinstance(mode, (str, CalibrationMode)):
        value = float(mode)
        if value <= 0:
            raise ParameterError("an explicit V_DW must be positive")
        return value
    mode = CalibrationMode(mode)
    k = mobility_k(params)
    leak = abs(params.leak_axon)
    r_bar = params.r_mean
    if mode is CalibrationMode.BALANCED:
        b = n_neurons - 1
        return leak / k * b * (r_bar + params.r_metal / b)
    if mode is CalibrationMode.N_PLUS_ONE:
        b = n_neurons + 1
        return leak / k * b * (r_bar + params.r_metal / b)
    if mode is CalibrationMode.NO_METAL:
        return leak / k * (n_neurons - 1) * r_bar
    return leak * params.r_parallel / k * (n_neurons - 1) * (1.0 + params.tmr / 2.0)


def instantaneous_power(source_voltages: Sequence[float], source_currents: Sequence[float]) -> float:
    """Total power delivered by a set of sources (passive sign convention)."""
    v = np.asarray(source_voltages, dtype=float)
    i = np.asarray(source_currents, dtype=float)
    if v.shape != i.shape:
        raise ParameterError("voltage and current lists differ in length")
    return float(np.dot(v, i))


def dendrite_power(
    sol: DendriteSolution, branches: Sequence[SynapseBranch], r_metal: float, clamp: float | None = None
) -> tuple[float, float]:
    """Return (delivered, dissipated) power of one dendrite solution."""
    volts = [b.source_voltage for b in branches]
    currents = list(sol.branch_currents)
    if clamp is not None:
        volts.append(clamp)
        currents.append(sol.clamp_current)
    delivered = instantaneous_power(volts, currents)
    dissipated = sum(i * i * b.branch_resistance for i, b in zip(sol.branch_currents, branches))
    return delivered, dissipated + sol.node_voltage**2 / r_metal
