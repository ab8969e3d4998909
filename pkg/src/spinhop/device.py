"""Single four-terminal DW-MTJ: domain-wall kinematics and MTJ read-out.

Every device is described on its own one-dimensional axis.  Position 0 is the
OFF ("low") end of the track and position ``track_length`` is the ON ("high")
end.  Positive current and positive velocity always move the wall toward the
ON end, so a soma leak is positive (relaxes toward ON) and an axon leak is
negative (relaxes toward OFF).

The functions here accept scalars or numpy arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np


class ParameterError(ValueError):
    """Raised for physically invalid device or simulation parameters."""


class Role(str, enum.Enum):
    SOMA = "soma"
    AXON = "axon"


class BinaryState(str, enum.Enum):
    ON = "on"
    OFF = "off"
    TRANSIT = "transit"


@dataclass(frozen=True)
class DeviceParams:
    """Physical constants and geometry shared by every device (SI units)."""

    lande_g: float = 2.1
    polarization_P: float = 0.7
    bohr_magneton: float = 9.274e-24  # J/T
    cross_section_A: float = 50e-18  # m^2
    track_length_Len: float = 100e-9  # m
    mtj_width: float = 20e-9  # m
    mtj_placement: float = 0.5  # fraction of Len at the window centre
    electron_charge: float = 1.602e-19  # C
    msat: float = 8e5  # A/m
    leak_soma: float = 0.2  # m/s, toward ON
    leak_axon: float = -5.0  # m/s, toward OFF
    r_parallel: float = 500.0  # ohm
    r_antiparallel: float = 2000.0  # ohm
    r_metal: float = 2000.0  # ohm

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if min(self.r_parallel, self.r_antiparallel, self.r_metal) <= 0:
            raise ParameterError("all resistances must be positive")
        if self.r_antiparallel <= self.r_parallel:
            raise ParameterError("r_antiparallel must exceed r_parallel")
        if self.track_length_Len <= 0 or self.mtj_width <= 0:
            raise ParameterError("track length and MTJ width must be positive")
        lo, hi = self.window
        if not (0.0 < lo and hi < self.track_length_Len):
            raise ParameterError(
                f"MTJ window [{lo:g}, {hi:g}] m must lie strictly inside the track"
            )
        if self.cross_section_A <= 0 or self.msat <= 0 or self.electron_charge <= 0:
            raise ParameterError("cross_section_A, msat and electron_charge must be positive")

    @property
    def window(self) -> tuple[float, float]:
        """Low and high edges of the MTJ window along the track (m)."""
        centre = self.mtj_placement * self.track_length_Len
        half = 0.5 * self.mtj_width
        return centre - half, centre + half

    @property
    def window_centre(self) -> float:
        return self.mtj_placement * self.track_length_Len

    @property
    def tmr(self) -> float:
        return (self.r_antiparallel - self.r_parallel) / self.r_parallel

    @property
    def r_mean(self) -> float:
        return 0.5 * (self.r_antiparallel + self.r_parallel)

    def leak_for(self, role: Role) -> float:
        return self.leak_soma if Role(role) is Role.SOMA else self.leak_axon

    def with_(self, **changes) -> "DeviceParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class DwMtjState:
    """One device: wall position (m, measured from the OFF end), role and leak."""

    position: float
    role: Role
    leak: float

    @classmethod
    def fresh(cls, role: Role, params: DeviceParams, position: float = 0.0) -> "DwMtjState":
        role = Role(role)
        return cls(position=float(position), role=role, leak=params.leak_for(role))


def mobility_k(params: DeviceParams) -> float:
    """Current-to-velocity coefficient g*P*mu_B / (2*A*Msat*e), in m s^-1 A^-1."""
    if params.cross_section_A <= 0 or params.msat <= 0 or params.electron_charge <= 0:
        raise ParameterError("cross_section_A, msat and electron_charge must be positive")
    return (params.lande_g * params.polarization_P * params.bohr_magneton) / (
        2.0 * params.cross_section_A * params.msat * params.electron_charge
    )


def dw_velocity(current, k, leak):
    """Wall velocity for a (signed) drive current plus the constant leak."""
    return k * current + leak


def clamp_position(position, track_length):
    return np.minimum(np.maximum(position, 0.0), track_length)


def step_position(state: DwMtjState, v: float, dt: float, params: DeviceParams) -> DwMtjState:
    """Advance one Euler step; the track ends pin the wall without memory of overshoot."""
    if dt <= 0:
        raise ParameterError("dt must be positive")
    pos = float(clamp_position(state.position + v * dt, params.track_length_Len))
    return replace(state, position=pos)


def parallel_fraction(position, params: DeviceParams):
    """Fraction of the MTJ window lying on the ON side of the wall, in [0, 1]."""
    lo, hi = params.window
    f = np.clip((position - lo) / params.mtj_width, 0.0, 1.0)
    # (hi - lo) / width can round just below 1; the far edge must read exactly parallel
    return np.where(position >= hi, 1.0, f)


def conductance_at(position, params: DeviceParams):
    """MTJ conductance (S) for a wall position; the two partial junctions act in parallel."""
    f = parallel_fraction(position, params)
    return f / params.r_parallel + (1.0 - f) / params.r_antiparallel


def mtj_conductance(state: DwMtjState, params: DeviceParams) -> float:
    return float(conductance_at(state.position, params))


def binary_state(state: DwMtjState, params: DeviceParams) -> BinaryState:
    lo, hi = params.window
    if state.position > hi:
        return BinaryState.ON
    if state.position < lo:
        return BinaryState.OFF
    return BinaryState.TRANSIT
