"""Compiled fixed-step integrator for the whole network.

The loop body applies, per step and in this order: soma MTJ resistances,
per-neuron axon drive currents, axon wall updates, axon MTJ conductances,
per-neuron dendrite solves, soma wall updates and supply-energy accrual.  It
mirrors the scalar functions in ``device`` and ``circuit``; ``network``
keeps a pure-Python reference step built from those functions that the test
suite compares against this kernel.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# indices into the energy accumulator
E_WEIGHT, E_VDW, E_VC, E_DISSIPATED, E_DELIVERED = range(5)

STATUS_STOPPED, STATUS_TIMEOUT, STATUS_FAULT = 0, 1, 2

STOP_ON_TARGET, STOP_ON_PINNED = 0, 1


@njit(cache=True, inline="always")
def _conductance(x, lo, hi, width, g_p, g_ap):
    f = (x - lo) / width
    if f < 0.0:
        f = 0.0
    elif f > 1.0 or x >= hi:
        f = 1.0
    return f * g_p + (1.0 - f) * g_ap


@njit(cache=True, inline="always")
def _clip(x, length):
    if x < 0.0:
        return 0.0
    if x > length:
        return length
    return x


@njit(cache=True, fastmath={"reassoc", "contract", "nsz", "arcp"})
def integrate(
    soma, axon, w, clamp, use_clamp, v_dw, drive_b,
    k, leak_soma, leak_axon, lo, hi, width, g_p, g_ap, r_metal, length,
    dt, max_steps, stop_mode, target, hold_steps, tol, check_axons,
    trace_every, trace, energy, snapshot, out,
):  # fmt: skip
    """Advance ``soma``/``axon`` in place.

    ``out`` receives (steps taken, status, first step of the final pinned
    window or -1, trace samples written); ``snapshot`` receives the energy
    accumulator as it stood at the start of that window.
    """
    n = soma.shape[0]
    g_metal = 1.0 / r_metal
    inv_width = 1.0 / width
    gmat = np.empty((n, n))
    num = np.empty(n)
    den = np.empty(n)
    node = np.empty(n)
    i_br = np.empty(n)
    ws = -1
    n_trace = 0
    status = STATUS_TIMEOUT
    s = 0
    while s <= max_steps:
        # stopping conditions are evaluated on the state at t = s * dt
        if stop_mode == STOP_ON_TARGET:
            done = True
            for j in range(n):
                if abs(soma[j] - target[j]) > tol:
                    done = False
                    break
            if done and check_axons:
                # every axon settled at the end its soma is being written to
                for i in range(n):
                    for j in range(n):
                        if i != j and abs(axon[i, j] - target[i]) > tol:
                            done = False
                            break
                    if not done:
                        break
            if done and s > 0:
                status = STATUS_STOPPED
                break
        else:
            pinned = True
            for j in range(n):
                if tol < soma[j] < length - tol:
                    pinned = False
                    break
            if pinned and check_axons:
                for i in range(n):
                    for j in range(n):
                        if i != j and tol < axon[i, j] < length - tol:
                            pinned = False
                            break
                    if not pinned:
                        break
            if pinned:
                if ws < 0:
                    ws = s
                    for c in range(energy.shape[0]):
                        snapshot[c] = energy[c]
                if s - ws >= hold_steps:
                    status = STATUS_STOPPED
                    break
            else:
                ws = -1
        if trace_every > 0 and s % trace_every == 0 and n_trace < trace.shape[0]:
            for j in range(n):
                trace[n_trace, j] = soma[j]
            n_trace += 1
        if s == max_steps:
            break

        p_w = 0.0
        p_vdw = 0.0
        p_vc = 0.0
        p_diss = 0.0
        p_signed = 0.0

        # soma read-out drives that neuron's axons; accumulate each dendrite's sums
        for j in range(n):
            num[j] = 0.0
            den[j] = 0.0
        for i in range(n):
            r_s = 1.0 / _conductance(soma[i], lo, hi, width, g_p, g_ap)
            i_ax = v_dw / (drive_b * r_s + r_metal)
            i_tot = drive_b * i_ax
            p = v_dw * i_tot
            p_vdw += p
            p_signed += p
            p_diss += i_tot * i_tot * r_s + drive_b * i_ax * i_ax * r_metal
            dx = (k * i_ax + leak_axon) * dt
            # the diagonal is swept along and then cancelled, keeping the loop branch-free
            for j in range(n):
                x = min(max(axon[i, j] + dx, 0.0), length)
                axon[i, j] = x
                f = min(max((x - lo) * inv_width, 0.0), 1.0)
                if x >= hi:
                    f = 1.0
                g = f * g_p + (1.0 - f) * g_ap
                gmat[i, j] = g
                num[j] += w[i, j] * g
                den[j] += g
            den[i] -= gmat[i, i]
            num[i] -= w[i, i] * gmat[i, i]
            gmat[i, i] = 0.0
            axon[i, i] = 0.0

        # dendrite star of every post-synaptic neuron j
        fault = False
        for j in range(n):
            if use_clamp:
                node[j] = clamp[j]
            else:
                node[j] = num[j] / (den[j] + g_metal)
            if not np.isfinite(node[j]):
                fault = True
        if fault:
            status = STATUS_FAULT
            break
        for j in range(n):
            i_br[j] = 0.0
        for i in range(n):
            for j in range(n):
                dv = w[i, j] - node[j]
                ib = dv * gmat[i, j]
                i_br[j] += ib
                p = w[i, j] * ib
                p_signed += p
                p_w += max(p, 0.0)
                p_diss += ib * dv
        for j in range(n):
            track = node[j] * g_metal
            if use_clamp:
                p = node[j] * (track - i_br[j])
                p_signed += p
                if p > 0.0:
                    p_vc += p
            p_diss += node[j] * track
            soma[j] = _clip(soma[j] + (k * track + leak_soma) * dt, length)

        energy[E_WEIGHT] += p_w * dt
        energy[E_VDW] += p_vdw * dt
        energy[E_VC] += p_vc * dt
        energy[E_DISSIPATED] += p_diss * dt
        energy[E_DELIVERED] += p_signed * dt
        s += 1

    out[0] = s
    out[1] = status
    out[2] = ws
    out[3] = n_trace
