"""eNVM technology models and read-pulse current conversion.

The built-in LRS values are not measured data: they are obtained by inverting
the abacus (``derive_lrs_from_fanin``) against reference fan-in figures, with
zero neuron leak, centred in the floor bucket of each count. HRS values use assumed on/off ratios and only matter for the
continuity-band and resistance-sweep analyses. STT-MRAM ships without
resistances and must be given one explicitly.
"""

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import DomainError, InfeasibleError, MissingResistanceError, OutOfRangeError


class Technology(str, enum.Enum):
    PCM = "PCM"
    OXRAM = "OXRAM"
    STT_MRAM = "STT_MRAM"
    SOT_MRAM = "SOT_MRAM"
    CUSTOM = "CUSTOM"


@dataclass(frozen=True)
class ReadPulse:
    """A rectangular read pulse: amplitude (V), width (s), repetition period (s)."""

    amplitude: float
    width: float
    period: Optional[float] = None

    def __post_init__(self):
        if self.period is None:
            object.__setattr__(self, "period", self.width)
        if not self.amplitude > 0:
            raise DomainError(f"pulse amplitude must be > 0, got {self.amplitude}")
        if not self.width > 0:
            raise DomainError(f"pulse width must be > 0, got {self.width}")
        if not self.period >= self.width:
            raise DomainError(f"pulse period {self.period} shorter than width {self.width}")

    @property
    def duty(self):
        return self.width / self.period


@dataclass(frozen=True)
class EnvmDeviceModel:
    """Read-out envelope of one eNVM technology.

    ``r_lrs``/``r_hrs`` may both be ``None`` for a placeholder device; any
    operation that needs a resistance then raises ``MissingResistanceError``.
    """

    name: Technology
    r_lrs: Optional[float]
    r_hrs: Optional[float]
    read_voltage: float
    default_sdf: float
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "name", Technology(self.name))
        if not self.label:
            object.__setattr__(self, "label", self.name.value.lower())
        if (self.r_lrs is None) != (self.r_hrs is None):
            raise DomainError(f"{self.label}: r_lrs and r_hrs must both be set or both unset")
        if self.r_lrs is not None and not 0 < self.r_lrs <= self.r_hrs:
            raise DomainError(f"{self.label}: need 0 < r_lrs <= r_hrs, got {self.r_lrs}, {self.r_hrs}")
        if not self.read_voltage > 0:
            raise DomainError(f"{self.label}: read_voltage must be > 0")
        if not self.default_sdf >= 1:
            raise DomainError(f"{self.label}: default_sdf must be >= 1")

    @property
    def is_placeholder(self):
        return self.r_lrs is None

    def require_resistance(self):
        if self.is_placeholder:
            raise MissingResistanceError(
                f"device {self.label!r} has no built-in resistance; supply r_lrs/r_hrs explicitly"
            )

    def resistance_samples(self, n):
        """``n`` log-spaced resistances spanning [r_lrs, r_hrs]."""
        self.require_resistance()
        if n < 1:
            raise DomainError("need at least one resistance sample")
        if n == 1:
            return np.array([self.r_lrs])
        return np.geomspace(self.r_lrs, self.r_hrs, n)


def synaptic_current(device, resistance):
    """Read current ``V_read / R`` through a synapse of ``device`` at ``resistance``."""
    device.require_resistance()
    if resistance < device.r_lrs:
        raise OutOfRangeError(
            f"resistance {resistance} ohm below r_lrs bound {device.r_lrs} ohm of {device.label}"
        )
    if resistance > device.r_hrs:
        raise OutOfRangeError(
            f"resistance {resistance} ohm above r_hrs bound {device.r_hrs} ohm of {device.label}"
        )
    return device.read_voltage / resistance


def derive_lrs_from_fanin(target_fan_in, sdf, neuron, pulse, *, centered=False):
    """Invert the abacus: LRS resistance for which ``fan_in`` equals ``target_fan_in``.

    The closed form ``V_read / (sdf * (V_th*C_mem/(n*t_pulse) + I_leak))`` puts
    ``V_th / dV`` exactly on ``n``; it is nudged by a few ulps when rounding
    would land the floored fan-in one count below the target. With
    ``centered=True`` the inversion targets ``n + 1/2`` instead, so that the
    result sits mid-way between floor boundaries and the simulated neuron
    fires unambiguously on pulse ``n + 1``.
    """
    from .abacus import attenuated_input, count_from_delta
    from .neuron import delta_v_mem

    if target_fan_in < 1 or int(target_fan_in) != target_fan_in:
        raise DomainError(f"target fan-in must be a positive integer, got {target_fan_in}")
    if sdf < 1:
        raise DomainError(f"sdf must be >= 1, got {sdf}")
    target_fan_in = int(target_fan_in)

    ratio = target_fan_in + 0.5 if centered else target_fan_in
    i_needed = neuron.v_th * neuron.c_mem / (ratio * pulse.width) + neuron.i_leak
    if not i_needed > 0:
        raise InfeasibleError("leak exceeds achievable input current")
    r = pulse.amplitude / (sdf * i_needed)

    def count(res):
        dv = delta_v_mem(neuron, attenuated_input(pulse.amplitude, res, sdf), pulse)
        return count_from_delta(neuron.v_th, dv) if dv > 0 else -1

    for _ in range(64):
        n = count(r)
        if n == target_fan_in:
            return r
        r = math.nextafter(r, math.inf if n < target_fan_in else 0.0)
    raise InfeasibleError(f"could not realise fan-in {target_fan_in} at sdf {sdf}")


# Reference fan-in figures the defaults are inverted from: (technology, fan-in, SDF) at
# C_mem = 864.5 fF, V_th = 0.9 V, 1 us / 0.1 V read pulse, zero leak.
REFERENCE_FANIN_POINTS = (
    (Technology.PCM, 3560, 6000.0),
    (Technology.OXRAM, 350, 9000.0),
    (Technology.SOT_MRAM, 88200, 1000.0),
)
STT_DEFAULT_SDF = 9000.0

# Assumed HRS/LRS ratios; only used for band and resistance-sweep analyses.
ASSUMED_ON_OFF_RATIO = {
    Technology.PCM: 100.0,
    Technology.OXRAM: 10.0,
    Technology.SOT_MRAM: 2.0,
}


def default_devices(neuron=None, pulse=None):
    """Built-in device models keyed by lowercase label (``pcm``, ``oxram``, ``sot``, ``stt``)."""
    from .neuron import NeuronConfig

    if neuron is None:
        neuron = NeuronConfig(c_mem=864.5e-15, v_dd=1.8)
    if neuron.i_leak != 0:
        neuron = replace(neuron, i_leak=0.0)
    if pulse is None:
        pulse = ReadPulse(amplitude=0.1, width=1e-6)
    labels = {Technology.PCM: "pcm", Technology.OXRAM: "oxram", Technology.SOT_MRAM: "sot"}
    devices = {}
    for tech, n, sdf in REFERENCE_FANIN_POINTS:
        r_lrs = derive_lrs_from_fanin(n, sdf, neuron, pulse, centered=True)
        devices[labels[tech]] = EnvmDeviceModel(
            name=tech,
            r_lrs=r_lrs,
            r_hrs=r_lrs * ASSUMED_ON_OFF_RATIO[tech],
            read_voltage=pulse.amplitude,
            default_sdf=sdf,
            label=labels[tech],
        )
    devices["stt"] = EnvmDeviceModel(
        name=Technology.STT_MRAM, r_lrs=None, r_hrs=None,
        read_voltage=pulse.amplitude, default_sdf=STT_DEFAULT_SDF, label="stt",
    )
    return devices
