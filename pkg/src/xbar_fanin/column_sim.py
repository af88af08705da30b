"""Brute-force time-stepped simulation of one crossbar column.

Each schedule event reads one synapse for one pulse; the read current goes
through an attenuator (ideal fixed SDF or the tanh model) into the LIF neuron,
which is advanced with the same explicit-Euler kernel as ``neuron.step``.
Events are serialized: overlapping reads are rejected rather than summed.
"""

import csv
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from .abacus import fan_in
from .attenuator import AttenuatorConfig, output_current
from .devices import ReadPulse
from .errors import DomainError, InfeasibleError, NeverFiresError, NumericError, ScheduleError
from .neuron import _advance, _estimate_time_to_fire
from .units import parse_quantity, sci

MAX_TRACE_SAMPLES = 100_000


@dataclass(frozen=True)
class IdealAttenuator:
    """Fixed current division ``i_out = i_in / sdf``."""

    sdf: float

    def __post_init__(self):
        if not self.sdf >= 1:
            raise DomainError(f"sdf must be >= 1, got {self.sdf}")

    def output_current(self, i_in):
        return i_in / self.sdf


def attenuate(atten, i_in):
    if isinstance(atten, AttenuatorConfig):
        return output_current(atten, i_in)
    return atten.output_current(i_in)


@dataclass(frozen=True)
class SpikeEvent:
    t_start: float
    pulse: ReadPulse
    resistance: float

    @property
    def t_end(self):
        return self.t_start + self.pulse.width


@dataclass(frozen=True)
class SpikeSchedule:
    events: Tuple[SpikeEvent, ...]

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        for prev, nxt in zip(self.events, self.events[1:]):
            if nxt.t_start < prev.t_start:
                raise ScheduleError(f"events not sorted at t={nxt.t_start}")
            # relative slack absorbs rounding of k*period start times
            if nxt.t_start < prev.t_end - 1e-9 * prev.pulse.width:
                raise ScheduleError(
                    f"event at t={nxt.t_start} overlaps event ending at t={prev.t_end}"
                )

    def __len__(self):
        return len(self.events)

    @classmethod
    def repeated(cls, resistance, pulse, count, t0=0.0):
        """``count`` identical reads, one per pulse period (back-to-back when period == width)."""
        if count < 1:
            raise ScheduleError("count must be >= 1")
        return cls(tuple(SpikeEvent(t0 + k * pulse.period, pulse, resistance) for k in range(count)))

    def check_device(self, device):
        device.require_resistance()
        for ev in self.events:
            if not device.r_lrs <= ev.resistance <= device.r_hrs:
                raise ScheduleError(
                    f"resistance {ev.resistance} outside [{device.r_lrs}, {device.r_hrs}] of {device.label}"
                )


SCHEDULE_COLUMNS = ("t_start_s", "width_s", "amplitude_v", "resistance_ohms")


def read_schedule_csv(fh):
    """Parse a schedule CSV; errors name the offending line."""
    reader = csv.reader(fh)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ScheduleError("line 1: empty schedule file") from None
    if tuple(header) != SCHEDULE_COLUMNS:
        raise ScheduleError(f"line 1: expected header {','.join(SCHEDULE_COLUMNS)}, got {','.join(header)}")
    events = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(SCHEDULE_COLUMNS):
            raise ScheduleError(f"line {line}: expected {len(SCHEDULE_COLUMNS)} fields, got {len(row)}")
        try:
            t0, width, amp, res = (parse_quantity(c) for c in row)
            events.append(SpikeEvent(t0, ReadPulse(amp, width), res))
        except (ValueError, DomainError) as exc:
            raise ScheduleError(f"line {line}: {exc}") from None
        if not res > 0:
            raise ScheduleError(f"line {line}: resistance must be > 0")
    if not events:
        raise ScheduleError("schedule has no events")
    try:
        return SpikeSchedule(tuple(events))
    except ScheduleError as exc:
        raise ScheduleError(f"schedule: {exc}") from None


@dataclass
class SimulationTrace:
    t: np.ndarray
    v_mem: np.ndarray
    i_in: np.ndarray
    spikes: List[float] = field(default_factory=list)
    spike_inputs: List[int] = field(default_factory=list)  # completed events at each fire
    first_fire_event: Optional[int] = None  # 1-based event during (or after) which the first fire fell

    @property
    def first_fire_after_n_inputs(self):
        return self.spike_inputs[0] if self.spike_inputs else None

    def write_csv(self, fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("t_s", "v_mem_v", "i_in_a"))
        for row in zip(self.t.tolist(), self.v_mem.tolist(), self.i_in.tolist()):
            writer.writerow([sci(x) for x in row])

    def write_spikes_csv(self, fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("fire_time_s", "input_events_so_far"))
        for t, n in zip(self.spikes, self.spike_inputs):
            writer.writerow((sci(t), n))


def _segments(schedule, atten):
    # (start, duration, current, event_index, is_event); gaps carry zero input
    segs = []
    events = schedule.events
    for k, ev in enumerate(events):
        i_syn = ev.pulse.amplitude / ev.resistance
        segs.append((ev.t_start, ev.pulse.width, attenuate(atten, i_syn), k, True))
        if k + 1 < len(events):
            gap = events[k + 1].t_start - ev.t_end
            if gap > 1e-9 * ev.pulse.width:
                segs.append((ev.t_end, gap, 0.0, k, False))
    return segs


def simulate_column(neuron, atten, schedule, dt=None, *, max_samples=MAX_TRACE_SAMPLES):
    """Step the neuron through ``schedule``; see ``SimulationTrace`` for outputs.

    Each constant-input segment is split into ``round(duration / dt)`` equal
    steps, so the integrated charge per event is exact and ``dt`` only
    quantizes threshold detection. Default ``dt`` is the shortest pulse width
    over 100.
    """
    if len(schedule) == 0:
        raise ScheduleError("schedule is empty")
    if dt is None:
        dt = min(ev.pulse.width for ev in schedule.events) / 100
    if not (math.isfinite(dt) and dt > 0):
        raise DomainError(f"dt must be finite and > 0, got {dt}")

    segs = _segments(schedule, atten)
    plan = [(start, dur, i, k, is_ev, max(1, round(dur / dt))) for start, dur, i, k, is_ev in segs]
    for seg in plan:
        if not math.isfinite(seg[2]):
            raise NumericError(f"non-finite input current {seg[2]}")
    total = sum(p[5] for p in plan)
    stride = max(1, math.ceil((total + 1) / max_samples))

    v = neuron.v_reset
    ref = -math.inf
    ts, vs, is_ = [plan[0][0]], [v], [0.0]
    spikes, spike_inputs = [], []
    first_event = None
    counter = 0
    for start, dur, i_now, k, is_event, n in plan:
        h = dur / n
        completed = k if is_event else k + 1
        for j in range(n):
            t = start + j * h
            v, _, ref, fired = _advance(neuron, v, t, ref, i_now, h)
            counter += 1
            t_next = start + (j + 1) * h
            if fired:
                spikes.append(t_next)
                spike_inputs.append(completed)
                if first_event is None:
                    first_event = k + 1
            if counter % stride == 0:
                ts.append(t_next)
                vs.append(v)
                is_.append(i_now)
    return SimulationTrace(
        t=np.array(ts), v_mem=np.array(vs), i_in=np.array(is_),
        spikes=spikes, spike_inputs=spike_inputs, first_fire_event=first_event,
    )


def simulate_constant_drive(neuron, i_const, duration, dt):
    """Fire times under a constant input current held for ``duration``."""
    n = max(1, round(duration / dt))
    h = duration / n
    v, ref = neuron.v_reset, -math.inf
    fires = []
    for j in range(n):
        v, _, ref, fired = _advance(neuron, v, j * h, ref, i_const, h)
        if fired:
            fires.append((j + 1) * h)
    return fires


def frequency_curve(neuron, i_values, *, intervals=10, steps_per_interval=10_000):
    """Simulated firing frequency for each constant drive current.

    Each point is driven for ``intervals`` + 1.5 analytic inter-spike intervals
    and measured as ``(spikes - 1) / (last - first)``. Drives that never fire
    report 0 Hz.
    """
    out = []
    for i in i_values:
        if i < 0:
            raise DomainError(f"drive current must be >= 0, got {i}")
        ttf = _estimate_time_to_fire(neuron, i)
        if ttf is None:
            out.append((i, 0.0))
            continue
        isi = ttf + neuron.t_refractory
        fires = simulate_constant_drive(neuron, i, (intervals + 1.5) * isi, isi / steps_per_interval)
        freq = (len(fires) - 1) / (fires[-1] - fires[0]) if len(fires) >= 2 else 0.0
        out.append((i, freq))
    return out


def leak_gap_report(neuron, sdf, device, pulse, duty, dt=None):
    """Relative excess of simulated inputs-before-fire over the analytic fan-in.

    Events read the device LRS once per period ``width / duty``; the analytic
    fan-in ignores leak between pulses, so the gap grows as duty shrinks.
    """
    if not 0 < duty <= 1:
        raise DomainError(f"duty must lie in (0, 1], got {duty}")
    rep = fan_in(neuron, device, sdf, pulse)
    if rep.fan_in is None:
        raise InfeasibleError(f"leak-dominated configuration for {device.label} at sdf {sdf}")
    if rep.fan_in == 0:
        raise InfeasibleError("a single pulse already fires the neuron")
    spaced = replace(pulse, period=pulse.width / duty)
    # net charge gained per period bounds how many events can be needed
    net = rep.i_input_attenuated * pulse.width - neuron.i_leak * spaced.period
    if net <= 0:
        raise NeverFiresError("leak between pulses cancels the charge of each pulse")
    count = math.ceil(neuron.v_th * neuron.c_mem / net) + 2
    schedule = SpikeSchedule.repeated(device.r_lrs, spaced, count)
    trace = simulate_column(neuron, IdealAttenuator(sdf), schedule, dt)
    if trace.first_fire_after_n_inputs is None:
        raise NeverFiresError("simulation did not fire within the bounded schedule")
    return (trace.first_fire_after_n_inputs - rep.fan_in) / rep.fan_in
