"""Scalability abacus: per-spike membrane increment and minimum fan-in.

For a synapse read in its low resistance state the attenuated neuron input is
``V_read / (R_LRS * SDF)``; the membrane gains ``(I_input - I_leak) t / C_mem``
per pulse, and the fan-in is the number of such pulses that fit below
threshold, ``floor(V_th / dV)``.
"""

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import FrozenSet, Optional

from .attenuator import check_saturation, continuity_band, max_sdf
from .devices import EnvmDeviceModel, ReadPulse, Technology
from .errors import DomainError
from .neuron import delta_v_mem
from .units import sci

__all__ = [
    "CSV_COLUMNS", "FanInReport", "Flag", "ReadPulse", "Scale", "attenuated_input",
    "classify_scale", "count_from_delta", "fan_in", "read_sweep_csv", "recompute_row",
    "sweep", "write_sweep_csv",
]


class Flag(str, enum.Enum):
    LEAK_DOMINATED = "LEAK_DOMINATED"
    SDF_EXCEEDS_MAX = "SDF_EXCEEDS_MAX"
    SATURATION_VIOLATED = "SATURATION_VIOLATED"
    BAND_NOT_FLAT = "BAND_NOT_FLAT"


class Scale(str, enum.Enum):
    SUB_SMALL = "SUB_SMALL"
    SMALL = "SMALL"
    LARGE = "LARGE"
    ABOVE_LARGE = "ABOVE_LARGE"


def classify_scale(n):
    """Network scale for a fan-in: small is [10, 100), large is [100, 1000]."""
    if n < 10:
        return Scale.SUB_SMALL
    if n < 100:
        return Scale.SMALL
    if n <= 1000:
        return Scale.LARGE
    return Scale.ABOVE_LARGE


def attenuated_input(amplitude, resistance, sdf):
    return amplitude / (resistance * sdf)


def count_from_delta(v_th, dv):
    return math.floor(v_th / dv)


@dataclass(frozen=True)
class FanInReport:
    device: str
    c_mem: float
    sdf: float
    r_lrs: float
    pulse: ReadPulse
    i_leak: float
    v_th: float
    delta_v_mem: float
    fan_in: Optional[int]  # None when leak-dominated
    i_input_attenuated: float
    max_sdf: float
    binding_constraints: FrozenSet[Flag] = field(default_factory=frozenset)

    @property
    def clean(self):
        return not self.binding_constraints

    @property
    def scale(self):
        return None if self.fan_in is None else classify_scale(self.fan_in)


def fan_in(neuron, device, sdf, pulse, *, attenuator=None, resistance=None, rel_tolerance=0.05):
    """Minimum fan-in of ``neuron`` fed by ``device`` synapses through an SDF.

    ``resistance`` replaces the device LRS as the read resistance (used for
    resistance sweeps); the SDF cap is always taken at the LRS current. When
    ``attenuator`` is given its saturation and continuity-band checks also
    contribute flags.
    """
    if not sdf >= 1:
        raise DomainError(f"sdf must be >= 1, got {sdf}")
    if not neuron.constant_leak:
        raise DomainError("fan_in requires CONSTANT_CURRENT leak mode")
    device.require_resistance()
    r = device.r_lrs if resistance is None else resistance

    i_input = attenuated_input(pulse.amplitude, r, sdf)
    dv = delta_v_mem(neuron, i_input, pulse)
    cap = max_sdf(pulse.amplitude / device.r_lrs, neuron.i_leak)

    flags = set()
    count = None
    if dv > 0:
        count = count_from_delta(neuron.v_th, dv)
    else:
        flags.add(Flag.LEAK_DOMINATED)
    if sdf >= cap:
        flags.add(Flag.SDF_EXCEEDS_MAX)
    if attenuator is not None:
        if not check_saturation(attenuator).passed:
            flags.add(Flag.SATURATION_VIOLATED)
        if not continuity_band(attenuator, device, neuron.i_leak, rel_tolerance).flat:
            flags.add(Flag.BAND_NOT_FLAT)

    return FanInReport(
        device=device.label, c_mem=neuron.c_mem, sdf=float(sdf), r_lrs=float(r), pulse=pulse,
        i_leak=neuron.i_leak, v_th=neuron.v_th, delta_v_mem=dv, fan_in=count,
        i_input_attenuated=i_input, max_sdf=cap, binding_constraints=frozenset(flags),
    )


def _sdf_for(device, sdfs, index):
    if sdfs is None:
        return device.default_sdf
    if isinstance(sdfs, dict):
        return sdfs.get(device.label, device.default_sdf)
    return sdfs[index]


def sweep(neurons, devices, sdfs, pulse, *, attenuator=None, resistance_samples=0):
    """Evaluate ``fan_in`` over every (device, neuron) pair.

    ``sdfs`` is a per-device list aligned with ``devices``, a dict keyed by
    device label, or None for each device's default. Rows come back ordered by
    device label then decreasing ``c_mem``. With ``resistance_samples`` > 0,
    each device additionally gets that many rows spanning [r_lrs, r_hrs] at
    the first neuron's capacitance, appended after the grid.
    """
    neurons, devices = list(neurons), list(devices)
    if not neurons or not devices:
        raise DomainError("sweep needs at least one neuron and one device")
    cells = []
    for idx, device in enumerate(devices):
        sdf = _sdf_for(device, sdfs, idx)
        for neuron in neurons:
            cells.append(fan_in(neuron, device, sdf, pulse, attenuator=attenuator))
    cells.sort(key=lambda rep: (rep.device, -rep.c_mem))

    extra = []
    if resistance_samples:
        for idx, device in sorted(enumerate(devices), key=lambda p: p[1].label):
            sdf = _sdf_for(device, sdfs, idx)
            for r in device.resistance_samples(resistance_samples):
                extra.append(fan_in(neurons[0], device, sdf, pulse, attenuator=attenuator,
                                    resistance=float(r)))
    return cells + extra


CSV_COLUMNS = (
    "device", "c_mem_farads", "sdf", "r_lrs_ohms", "pulse_width_s", "pulse_amplitude_v",
    "i_leak_amps", "v_th_v", "delta_v_mem_v", "fan_in", "scale_class", "flags",
)


def report_row(rep):
    return [
        rep.device, sci(rep.c_mem), sci(rep.sdf), sci(rep.r_lrs), sci(rep.pulse.width),
        sci(rep.pulse.amplitude), sci(rep.i_leak), sci(rep.v_th), sci(rep.delta_v_mem),
        "" if rep.fan_in is None else str(rep.fan_in),
        "" if rep.scale is None else rep.scale.value,
        ";".join(sorted(f.value for f in rep.binding_constraints)),
    ]


def write_sweep_csv(reports, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rep in reports:
        writer.writerow(report_row(rep))


def read_sweep_csv(fh):
    return list(csv.DictReader(fh))


def recompute_row(row):
    """Recompute (delta_v_mem, fan_in) from the input columns of a sweep CSV row."""
    from .neuron import NeuronConfig

    v_th = float(row["v_th_v"])
    neuron = NeuronConfig(c_mem=float(row["c_mem_farads"]), v_dd=max(2 * v_th, v_th),
                          v_th=v_th, i_leak=float(row["i_leak_amps"]))
    pulse = ReadPulse(amplitude=float(row["pulse_amplitude_v"]), width=float(row["pulse_width_s"]))
    r = float(row["r_lrs_ohms"])
    device = EnvmDeviceModel(Technology.CUSTOM, r, r, pulse.amplitude, 1.0, label=row["device"])
    rep = fan_in(neuron, device, float(row["sdf"]), pulse)
    return rep.delta_v_mem, rep.fan_in
