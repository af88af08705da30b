"""Behavioral co-design toolkit for eNVM crossbar columns feeding an analog LIF neuron.

The package estimates how many synapses (the column fan-in) an output neuron can
accommodate before firing, for several eNVM synapse technologies, and checks the
estimate against a brute-force time-stepped simulation of the column.
"""

from .errors import (
    ConfigError,
    DomainError,
    InfeasibleError,
    MissingResistanceError,
    NeverFiresError,
    NumericError,
    OutOfRangeError,
    ScheduleError,
    XbarError,
)
from .devices import EnvmDeviceModel, Technology, default_devices, derive_lrs_from_fanin, synaptic_current
from .attenuator import (
    AttenuatorConfig,
    BandReport,
    check_saturation,
    continuity_band,
    max_sdf,
    output_current,
    scaling_down_factor,
    small_signal_sdf,
)
from .neuron import (
    CMEM_PRESETS,
    LeakMode,
    NeuronConfig,
    NeuronState,
    delta_v_mem,
    firing_frequency,
    step,
    time_constant,
    time_to_fire,
)
from .abacus import Flag, FanInReport, ReadPulse, Scale, classify_scale, fan_in, sweep
from .column_sim import (
    IdealAttenuator,
    SimulationTrace,
    SpikeEvent,
    SpikeSchedule,
    frequency_curve,
    leak_gap_report,
    simulate_column,
)

__version__ = "0.1.0"
