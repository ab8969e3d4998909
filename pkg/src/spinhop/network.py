"""All-to-all spintronic Hopfield network: weights, charge-up and free running.

A network of ``n`` neurons holds ``n`` somata and ``n*(n-1)`` axons.  Axon
``[i, j]`` is neuron ``i``'s branch toward neuron ``j``; it carries the weight
voltage ``W[i, j]`` into neuron ``j``'s dendrite.  Positions are stored in an
``(n, n)`` array whose diagonal is unused.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import TYPE_CHECKING, Sequence

import numpy as np

from . import _kernel
from .circuit import (
    SynapseBranch,
    axon_drive_current,
    calibrate_vdw,
    dendrite_solve,
)
from .device import DeviceParams, ParameterError, conductance_at, mobility_k

if TYPE_CHECKING:
    from .tasks import Graph

log = logging.getLogger(__name__)

ENERGY_CLASSES = ("weight_sources", "vdw_sources", "vc_sources")


class NumericFault(RuntimeError):
    pass


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    """Voltages, integration settings and modelling switches for one run."""

    dt: float = 1e-12
    t_max: float = 2e-6
    hold_window: float = 5e-9
    pin_tolerance: float = 0.1e-9
    v_c: float = 0.25
    w_mag: float = 0.1
    calibration: str | float = "balanced"
    # "physical" divides the drive among the n-1 real axons, "literal" among n+1
    drive_branches: str = "physical"
    zero_weights_during_chargeup: bool = False
    chargeup_t_cap: float = 100e-9
    # "somata": clamps removed once somata reach their targets; "all_devices": axons too
    chargeup_until: str = "all_devices"
    normalize_patterns: bool = False
    maxcut_penalty: float = 1.05
    trace_every: int = 0
    # "somata": every soma pinned for hold_window; "all_devices": axons too
    convergence: str = "all_devices"

    def __post_init__(self):
        if self.dt <= 0:
            raise ParameterError("dt must be positive")
        if self.t_max <= self.dt:
            raise ParameterError("t_max must exceed dt")
        if self.hold_window < 0 or self.chargeup_t_cap <= 0:
            raise ParameterError("hold_window must be >= 0 and chargeup_t_cap > 0")
        if self.chargeup_until not in ("somata", "all_devices"):
            raise ParameterError("chargeup_until must be 'somata' or 'all_devices'")
        if self.convergence not in ("somata", "all_devices"):
            raise ParameterError("convergence must be 'somata' or 'all_devices'")
        if self.drive_branches not in ("physical", "literal"):
            raise ParameterError("drive_branches must be 'physical' or 'literal'")

    def branch_count(self, n: int) -> int:
        return n - 1 if self.drive_branches == "physical" else n + 1

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class WeightMatrix:
    w: np.ndarray  # volts, zero diagonal

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ParameterError("weight matrix must be square")
        if np.any(np.diag(w) != 0):
            raise ParameterError("weight matrix diagonal must be zero")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.w.shape[0]

    def __eq__(self, other):
        return isinstance(other, WeightMatrix) and np.array_equal(self.w, other.w)

    __hash__ = None


def as_bits(pattern) -> np.ndarray:
    """0/1 vector from a sequence or a string such as ``"110"``."""
    if isinstance(pattern, str):
        pattern = [int(c) for c in pattern.strip()]
    bits = np.asarray(pattern, dtype=np.int64)
    if bits.ndim != 1 or not np.all((bits == 0) | (bits == 1)):
        raise ParameterError("a pattern must be a flat vector of 0/1")
    return bits


def train_hebbian(patterns: Sequence[Sequence[int]], w_mag: float = 0.1, normalize: bool = False) -> WeightMatrix:
    """Sum of w_mag*(2s_i-1)(2s_j-1) over the stored 0/1 patterns."""
    pats = [as_bits(p) for p in patterns]
    if not pats:
        raise ParameterError("at least one pattern is required")
    if len({len(p) for p in pats}) != 1:
        raise ParameterError("all patterns must have the same length")
    s = 2.0 * np.stack(pats) - 1.0
    w = w_mag * (s.T @ s)
    if normalize:
        w /= len(pats)
    np.fill_diagonal(w, 0.0)
    return WeightMatrix(w)


def set_weights_maxcut(graph: "Graph", w_mag: float = 0.1, penalty: float = 1.05) -> WeightMatrix:
    """``+w_mag`` between unconnected nodes, ``-penalty*w_mag`` across every edge."""
    n = graph.n_nodes
    w = np.full((n, n), w_mag)
    for i, j, _ in graph.edges:
        if i == j:
            raise InputError(f"self-loop on node {i}")
        w[i, j] = w[j, i] = -penalty * w_mag
    np.fill_diagonal(w, 0.0)
    return WeightMatrix(w)


@dataclass
class NetworkState:
    params: DeviceParams
    soma: np.ndarray  # (n,) wall positions, m
    axon: np.ndarray  # (n, n) wall positions, m; diagonal unused
    weights: WeightMatrix
    v_dw: float
    phase: str = "free_run"
    t: float = 0.0
    energy: dict = field(default_factory=lambda: dict.fromkeys(ENERGY_CLASSES, 0.0))
    energy_dissipated: float = 0.0
    chargeup_duration: float = 0.0
    chargeup_energy: float = 0.0
    chargeup_complete: bool = True

    @property
    def n(self) -> int:
        return len(self.soma)

    @property
    def device_count(self) -> int:
        return self.n + self.n * (self.n - 1)

    def copy(self) -> "NetworkState":
        return replace(self, soma=self.soma.copy(), axon=self.axon.copy(), energy=dict(self.energy))

    def axon_positions(self) -> np.ndarray:
        """Flat array of the n*(n-1) real axon positions (row-major, diagonal skipped)."""
        return self.axon[~np.eye(self.n, dtype=bool)]


@dataclass
class TrialReport:
    converged: bool
    t_converge: float
    final_bits: np.ndarray
    energy_total: float
    energy_by_class: dict
    avg_power: float
    chargeup_duration: float = 0.0
    chargeup_energy: float = 0.0
    chargeup_complete: bool = True
    energy_dissipated: float = 0.0
    numeric_fault: bool = False
    steps: int = 0
    trace_t: np.ndarray | None = None
    trace: np.ndarray | None = None

    @property
    def chargeup_share(self) -> float:
        return self.chargeup_energy / self.energy_total if self.energy_total > 0 else 0.0

    def to_dict(self, include_trace: bool = False) -> dict:
        d = asdict(self)
        d["final_bits"] = "".join(str(int(b)) for b in self.final_bits)
        d["chargeup_share"] = self.chargeup_share
        d.pop("trace")
        d.pop("trace_t")
        if include_trace and self.trace is not None:
            d["trace_t"] = self.trace_t.tolist()
            d["trace"] = self.trace.tolist()
        return d


def init_all_antiparallel(n: int, params: DeviceParams, weights: WeightMatrix, v_dw: float) -> NetworkState:
    """Every soma and axon wall at its OFF end, clock and energies at zero."""
    if n < 2:
        raise ParameterError("a network needs at least two neurons")
    if weights.n != n:
        raise ParameterError("weight matrix size does not match n")
    return NetworkState(params, np.zeros(n), np.zeros((n, n)), weights, float(v_dw))


def read_states(state: NetworkState) -> np.ndarray:
    """Soma bits; a wall inside the window counts by its side of the centre (centre -> 0)."""
    return (state.soma > state.params.window_centre).astype(np.int8)


def _device_args(params: DeviceParams):
    lo, hi = params.window
    return (
        mobility_k(params),
        params.leak_soma,
        params.leak_axon,
        lo,
        hi,
        params.mtj_width,
        1.0 / params.r_parallel,
        1.0 / params.r_antiparallel,
        params.r_metal,
        params.track_length_Len,
    )


def _run_kernel(
    state, w, clamp, use_clamp, drive_b, dt, max_steps, stop_mode, target, hold_steps, tol,
    check_axons=False, trace_every=0, trace_len=0,
):  # fmt: skip
    energy = np.zeros(5)
    snapshot = np.zeros(5)
    out = np.zeros(4, dtype=np.int64)
    trace = np.zeros((max(trace_len, 1), state.n))
    _kernel.integrate(
        state.soma, state.axon, np.ascontiguousarray(w, dtype=float),
        np.ascontiguousarray(clamp, dtype=float), use_clamp, state.v_dw, float(drive_b),
        *_device_args(state.params),
        float(dt), int(max_steps), stop_mode, np.ascontiguousarray(target, dtype=float),
        int(hold_steps), float(tol), bool(check_axons), int(trace_every), trace, energy, snapshot, out,
    )  # fmt: skip
    return energy, snapshot, out, trace[: out[3]]


def _accrue(state: NetworkState, energy: np.ndarray) -> None:
    state.energy["weight_sources"] += energy[_kernel.E_WEIGHT]
    state.energy["vdw_sources"] += energy[_kernel.E_VDW]
    state.energy["vc_sources"] += energy[_kernel.E_VC]
    state.energy_dissipated += energy[_kernel.E_DISSIPATED]


def charge_up(
    state: NetworkState,
    pattern: Sequence[int],
    v_c: float = 0.25,
    t_cap: float = 100e-9,
    dt: float = 1e-12,
    config: SimConfig | None = None,
) -> NetworkState:
    """Clamp each dendrite to +/-v_c until every soma sits at its target end.

    Returns a new state in the free-running phase with the clamps removed.  If
    ``t_cap`` elapses first, ``chargeup_complete`` is False.
    """
    config = config or SimConfig()
    if t_cap <= 0:
        raise ParameterError("t_cap must be positive")
    bits = as_bits(pattern)
    if bits.shape != (state.n,):
        raise ParameterError("pattern length does not match the network")
    w = state.weights.w
    if v_c < np.abs(w).max():
        warnings.warn(f"v_c={v_c} V is below the largest weight magnitude; somata may not charge correctly")
    if config.zero_weights_during_chargeup:
        w = np.zeros_like(w)
    new = state.copy()
    new.phase = "charge_up"
    clamp = np.where(bits == 1, v_c, -v_c)
    target = np.where(bits == 1, state.params.track_length_Len, 0.0)
    max_steps = int(np.ceil(t_cap / dt))
    energy, _, out, _ = _run_kernel(
        new, w, clamp, True, config.branch_count(state.n), dt, max_steps,
        _kernel.STOP_ON_TARGET, target, 0, config.pin_tolerance, config.chargeup_until == "all_devices",
    )  # fmt: skip
    if out[1] == _kernel.STATUS_FAULT or not np.all(np.isfinite(energy)):
        raise NumericFault("non-finite value during charge-up")
    duration = out[0] * dt
    _accrue(new, energy)
    new.t += duration
    new.chargeup_duration += duration
    new.chargeup_energy += energy[[_kernel.E_WEIGHT, _kernel.E_VDW, _kernel.E_VC]].sum()
    new.chargeup_complete = bool(out[1] == _kernel.STATUS_STOPPED)
    new.phase = "free_run"
    if not new.chargeup_complete:
        log.info("charge-up incomplete after %.3g s", t_cap)
    return new


def release_and_converge(
    state: NetworkState,
    dt: float = 1e-12,
    t_max: float = 2e-6,
    hold_window: float = 5e-9,
    config: SimConfig | None = None,
    raise_on_fault: bool = True,
) -> TrialReport:
    """Free-run from ``state`` until every soma has been pinned for ``hold_window``.

    ``t_converge`` is the start of that window, measured from release; the
    reported energy is what the supplies delivered up to then (charge-up
    included).  ``state`` itself is left untouched.
    """
    config = config or SimConfig()
    if dt <= 0 or t_max <= dt:
        raise ParameterError("need dt > 0 and t_max > dt")
    if state.phase != "free_run":
        raise ParameterError("release requires the free-running phase")
    run = state.copy()
    n = run.n
    max_steps = int(np.ceil(t_max / dt))
    hold_steps = int(round(hold_window / dt))
    trace_len = max_steps // config.trace_every + 1 if config.trace_every > 0 else 0
    energy, snapshot, out, trace = _run_kernel(
        run, run.weights.w, np.zeros(n), False, config.branch_count(n), dt, max_steps,
        _kernel.STOP_ON_PINNED, np.zeros(n), hold_steps, config.pin_tolerance,
        config.convergence == "all_devices", config.trace_every, trace_len,
    )  # fmt: skip
    steps, status, ws = int(out[0]), int(out[1]), int(out[2])
    fault = status == _kernel.STATUS_FAULT or not np.all(np.isfinite(energy))
    if fault and raise_on_fault:
        raise NumericFault("non-finite value during free running")
    converged = status == _kernel.STATUS_STOPPED
    if converged:
        t_conv = ws * dt
        counted = snapshot
    else:
        t_conv = steps * dt
        counted = energy
    by_class = {
        "weight_sources": state.energy["weight_sources"] + counted[_kernel.E_WEIGHT],
        "vdw_sources": state.energy["vdw_sources"] + counted[_kernel.E_VDW],
        "vc_sources": state.energy["vc_sources"] + counted[_kernel.E_VC],
    }
    total = sum(by_class.values())
    elapsed = state.chargeup_duration + t_conv
    report = TrialReport(
        converged=converged,
        t_converge=t_conv,
        final_bits=read_states(run),
        energy_total=total,
        energy_by_class=by_class,
        avg_power=total / elapsed if elapsed > 0 else 0.0,
        chargeup_duration=state.chargeup_duration,
        chargeup_energy=state.chargeup_energy,
        chargeup_complete=state.chargeup_complete,
        energy_dissipated=state.energy_dissipated + counted[_kernel.E_DISSIPATED],
        numeric_fault=fault,
        steps=steps,
    )
    if config.trace_every > 0:
        report.trace = trace
        report.trace_t = np.arange(len(trace)) * config.trace_every * dt
    return report


def run_trial(
    weights: WeightMatrix,
    pattern: Sequence[int] | None,
    params: DeviceParams | None = None,
    config: SimConfig | None = None,
) -> TrialReport:
    """Initialise every wall at its OFF end, optionally charge up ``pattern``, then release."""
    params = params or DeviceParams()
    config = config or SimConfig()
    n = weights.n
    v_dw = calibrate_vdw(params, n, config.calibration)
    state = init_all_antiparallel(n, params, weights, v_dw)
    if pattern is not None:
        state = charge_up(state, pattern, config.v_c, config.chargeup_t_cap, config.dt, config)
    return release_and_converge(state, config.dt, config.t_max, config.hold_window, config)


def reference_step(
    state: NetworkState, dt: float, config: SimConfig | None = None, clamp: np.ndarray | None = None
) -> tuple[NetworkState, dict]:
    """One integration step assembled from the scalar device/circuit functions.

    Slow; exists so the compiled kernel can be checked against an
    independently assembled step.  Returns the new state and per-step
    diagnostics (KCL residuals, delivered and dissipated power).
    """
    config = config or SimConfig()
    p = state.params
    k = mobility_k(p)
    n = state.n
    b = config.branch_count(n)
    new = state.copy()
    delivered = dissipated = 0.0
    for i in range(n):
        r_s = 1.0 / conductance_at(state.soma[i], p)
        i_ax = axon_drive_current(state.v_dw, r_s, p.r_metal, b)
        delivered += state.v_dw * b * i_ax
        dissipated += (b * i_ax) ** 2 * r_s + b * i_ax**2 * p.r_metal
        for j in range(n):
            if j != i:
                x = new.axon[i, j] + (k * i_ax + p.leak_axon) * dt
                new.axon[i, j] = min(max(x, 0.0), p.track_length_Len)
    kcl = []
    for j in range(n):
        branches = [
            SynapseBranch(state.weights.w[i, j], 1.0 / conductance_at(new.axon[i, j], p))
            for i in range(n)
            if i != j
        ]
        c = None if clamp is None else float(clamp[j])
        sol = dendrite_solve(branches, p.r_metal, c)
        kcl.append(sol.kcl_residual)
        volts = [br.source_voltage for br in branches] + ([c] if c is not None else [])
        currents = list(sol.branch_currents) + ([sol.clamp_current] if c is not None else [])
        delivered += float(np.dot(volts, currents))
        dissipated += sum(ib**2 * br.branch_resistance for ib, br in zip(sol.branch_currents, branches))
        dissipated += sol.node_voltage * sol.track_current
        x = state.soma[j] + (k * sol.track_current + p.leak_soma) * dt
        new.soma[j] = min(max(x, 0.0), p.track_length_Len)
    new.t = state.t + dt
    return new, {"kcl": np.array(kcl), "delivered": delivered, "dissipated": dissipated}
