"""Ideal leaky integrate-and-fire neuron.

Two leak flavours are supported: a constant leak current (what the per-pulse
membrane increment uses) and an ohmic leak conductance (for time-constant
studies). The analytic helpers assume the constant-current flavour.
"""

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

from .errors import DomainError, NeverFiresError, NumericError

CMEM_PRESETS = {
    "cmem_paper_1": 864.5e-15,
    "cmem_paper_2": 86.4e-15,
    "cmem_paper_3": 8.6e-15,
    # native parasitic capacitance at the neuron input node
    "cmem_paper_4": 1.4e-15,
}


class LeakMode(str, enum.Enum):
    CONSTANT_CURRENT = "CONSTANT_CURRENT"
    CONDUCTANCE = "CONDUCTANCE"


@dataclass(frozen=True)
class NeuronConfig:
    c_mem: float
    v_dd: float = 1.8
    v_th: Optional[float] = None  # defaults to v_dd / 2
    leak_mode: LeakMode = LeakMode.CONSTANT_CURRENT
    i_leak: float = 0.0
    g_leak: float = 0.0
    v_reset: float = 0.0
    t_refractory: float = 0.0

    def __post_init__(self):
        if self.v_th is None:
            object.__setattr__(self, "v_th", self.v_dd / 2)
        object.__setattr__(self, "leak_mode", LeakMode(self.leak_mode))
        if not self.c_mem > 0:
            raise DomainError(f"c_mem must be > 0, got {self.c_mem}")
        if not 0 < self.v_th <= self.v_dd:
            raise DomainError(f"need 0 < v_th <= v_dd, got v_th={self.v_th}, v_dd={self.v_dd}")
        if self.i_leak < 0 or self.g_leak < 0:
            raise DomainError("leak current and conductance must be >= 0")
        if self.t_refractory < 0:
            raise DomainError("t_refractory must be >= 0")
        if not self.v_reset < self.v_th:
            raise DomainError("v_reset must be below v_th")

    @property
    def constant_leak(self):
        return self.leak_mode is LeakMode.CONSTANT_CURRENT


@dataclass(frozen=True)
class NeuronState:
    v_mem: float = 0.0
    t: float = 0.0
    spike_count: int = 0
    refractory_until: float = -math.inf

    @classmethod
    def at_rest(cls, neuron):
        return cls(v_mem=neuron.v_reset)


def _require_constant(neuron, what):
    if not neuron.constant_leak:
        raise DomainError(f"{what} requires CONSTANT_CURRENT leak mode")


def delta_v_mem(neuron, i_input, pulse):
    """Membrane increment from one pulse of ``i_input``, net of leak. May be negative."""
    _require_constant(neuron, "delta_v_mem")
    return (i_input - neuron.i_leak) * pulse.width / neuron.c_mem


def time_to_fire(neuron, i_const):
    """Time for a constant drive to charge the membrane from reset to threshold."""
    _require_constant(neuron, "time_to_fire")
    net = i_const - neuron.i_leak
    if not net > 0:
        raise NeverFiresError(f"drive {i_const} A does not exceed leak {neuron.i_leak} A")
    return neuron.c_mem * (neuron.v_th - neuron.v_reset) / net


def firing_frequency(neuron, i_const):
    return 1.0 / (time_to_fire(neuron, i_const) + neuron.t_refractory)


def time_constant(neuron):
    """Membrane RC time constant; ``math.inf`` when the leak conductance is zero."""
    if neuron.leak_mode is not LeakMode.CONDUCTANCE:
        raise DomainError("time_constant requires CONDUCTANCE leak mode")
    if neuron.g_leak == 0:
        return math.inf
    return neuron.c_mem / neuron.g_leak


def _estimate_time_to_fire(neuron, i_const):
    # works for both leak modes; None when the drive never fires
    if neuron.constant_leak:
        net = i_const - neuron.i_leak
        return neuron.c_mem * (neuron.v_th - neuron.v_reset) / net if net > 0 else None
    if neuron.g_leak == 0:
        return neuron.c_mem * (neuron.v_th - neuron.v_reset) / i_const if i_const > 0 else None
    v_inf = i_const / neuron.g_leak
    if v_inf <= neuron.v_th:
        return None
    return neuron.c_mem / neuron.g_leak * math.log((v_inf - neuron.v_reset) / (v_inf - neuron.v_th))


def default_dt(neuron, pulse_width, i_const=None):
    """Integration step: a 10^-4 fraction of the shorter of pulse width and analytic time-to-fire."""
    scale = pulse_width
    if i_const is not None:
        ttf = _estimate_time_to_fire(neuron, i_const)
        if ttf is not None:
            scale = min(scale, ttf)
    return scale / 1e4


def _advance(neuron, v, t, refractory_until, i_in, dt):
    """One explicit-Euler step on plain floats. Returns (v, t, refractory_until, fired)."""
    t_next = t + dt
    if t < refractory_until:
        return neuron.v_reset, t_next, refractory_until, False
    leak = neuron.i_leak if neuron.constant_leak else neuron.g_leak * v
    v = v + (i_in - leak) * dt / neuron.c_mem
    if neuron.constant_leak and v < neuron.v_reset:
        v = neuron.v_reset
    if v >= neuron.v_th:
        return neuron.v_reset, t_next, t_next + neuron.t_refractory, True
    return v, t_next, refractory_until, False


def step(state, neuron, i_in_now, dt):
    """Advance ``state`` by ``dt`` under input current ``i_in_now``.

    Returns ``(new_state, fired)``. On a threshold crossing the membrane resets
    and a refractory window of ``t_refractory`` opens, during which the
    membrane is held at ``v_reset``.
    """
    if not (math.isfinite(i_in_now) and math.isfinite(dt) and math.isfinite(state.v_mem)):
        raise NumericError(f"non-finite input to step: i={i_in_now}, dt={dt}, v={state.v_mem}")
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt}")
    v, t, ref, fired = _advance(neuron, state.v_mem, state.t, state.refractory_until, i_in_now, dt)
    new = replace(state, v_mem=v, t=t, refractory_until=ref,
                  spike_count=state.spike_count + (1 if fired else 0))
    return new, fired
