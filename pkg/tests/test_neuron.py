import math
import random
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from xbar_fanin import (
    CMEM_PRESETS,
    LeakMode,
    NeuronConfig,
    NeuronState,
    NeverFiresError,
    NumericError,
    ReadPulse,
    delta_v_mem,
    firing_frequency,
    step,
    time_constant,
    time_to_fire,
)
from xbar_fanin.errors import DomainError
from xbar_fanin.neuron import default_dt

C = 864.5e-15
PULSE = ReadPulse(0.1, 1e-6)


def neuron(**kw):
    kw.setdefault("c_mem", C)
    kw.setdefault("v_dd", 1.8)
    return NeuronConfig(**kw)


def integrate(cfg, i_in, duration, n_steps, state=None):
    state = state or NeuronState.at_rest(cfg)
    fired_any = False
    for _ in range(n_steps):
        state, fired = step(state, cfg, i_in, duration / n_steps)
        fired_any |= fired
    return state, fired_any


def test_presets():
    assert CMEM_PRESETS == {
        "cmem_paper_1": 864.5e-15,
        "cmem_paper_2": 86.4e-15,
        "cmem_paper_3": 8.6e-15,
        "cmem_paper_4": 1.4e-15,
    }


def test_v_th_defaults_to_half_supply():
    assert neuron().v_th == 0.9
    assert neuron(v_th=0.5).v_th == 0.5


@pytest.mark.parametrize(
    "kw",
    [dict(c_mem=0), dict(v_th=2.0), dict(v_th=0.0), dict(i_leak=-1e-12), dict(g_leak=-1e-9),
     dict(t_refractory=-1.0), dict(v_reset=0.9)],
)
def test_config_invariants(kw):
    with pytest.raises(DomainError):
        neuron(**kw)


def test_delta_v_examples():
    dv = delta_v_mem(neuron(), 1e-9, PULSE)
    assert dv == pytest.approx(1.1567e-3, rel=1e-4)
    # one 1 us rectangular pulse through the time stepper
    state, _ = integrate(neuron(), 1e-9, 1e-6, 100)
    assert state.v_mem == pytest.approx(dv, rel=1e-12)

    assert delta_v_mem(neuron(i_leak=2e-9), 2e-9, PULSE) == 0.0

    dv_neg = delta_v_mem(neuron(i_leak=2e-9), 0.0, PULSE)
    assert dv_neg == pytest.approx(-2.313e-3, abs=5e-7)
    # sign check against simulation: starting mid-range, leak pulls the membrane down by |dv|
    start = NeuronState(v_mem=0.5)
    state, _ = integrate(neuron(i_leak=2e-9), 0.0, 1e-6, 100, start)
    assert state.v_mem - 0.5 == pytest.approx(dv_neg, rel=1e-9)


def test_delta_v_requires_constant_leak():
    with pytest.raises(DomainError):
        delta_v_mem(neuron(leak_mode=LeakMode.CONDUCTANCE, g_leak=1e-9), 1e-9, PULSE)


@given(st.floats(1e-12, 1e-6), st.floats(1e-9, 1e-4), st.floats(1e-15, 1e-12), st.floats(0.1, 10))
def test_delta_v_linear(i, width, c, k):
    cfg = neuron(c_mem=c)
    base = delta_v_mem(cfg, i, ReadPulse(0.1, width))
    assert delta_v_mem(cfg, k * i, ReadPulse(0.1, width)) == pytest.approx(k * base, rel=1e-12)
    assert delta_v_mem(cfg, i, ReadPulse(0.1, k * width)) == pytest.approx(k * base, rel=1e-12)
    assert delta_v_mem(replace(cfg, c_mem=c / k), i, ReadPulse(0.1, width)) == pytest.approx(k * base, rel=1e-12)


def test_time_to_fire_example():
    cfg = neuron()
    t = time_to_fire(cfg, 1e-9)
    assert t == pytest.approx(778.05e-6, rel=1e-6)
    # simulator threshold crossing within one step
    dt = t / 1e4
    state, n = NeuronState.at_rest(cfg), 0
    while True:
        state, fired = step(state, cfg, 1e-9, dt)
        n += 1
        if fired:
            break
    assert abs(n * dt - t) <= dt


def test_time_to_fire_errors_and_linearity():
    cfg = neuron(i_leak=1e-9)
    with pytest.raises(NeverFiresError):
        time_to_fire(cfg, 1e-9)
    with pytest.raises(NeverFiresError):
        firing_frequency(cfg, 0.5e-9)
    assert time_to_fire(neuron(c_mem=C / 2), 1e-9) == pytest.approx(time_to_fire(neuron(), 1e-9) / 2, rel=1e-15)


def test_firing_frequency_example():
    assert firing_frequency(neuron(), 1e-9) == pytest.approx(1285.3, abs=0.05)


def test_frequency_monotone_and_refractory_asymptote():
    cfg = neuron(i_leak=1e-10, t_refractory=1e-3)
    currents = [10 ** (e / 4) for e in range(-38, -8)]
    freqs = [firing_frequency(cfg, i) for i in currents if i > cfg.i_leak]
    assert all(b > a for a, b in zip(freqs, freqs[1:]))
    assert firing_frequency(cfg, 1.0) == pytest.approx(1 / cfg.t_refractory, rel=1e-6)


def test_time_constant():
    cfg = neuron(leak_mode=LeakMode.CONDUCTANCE, g_leak=1e-9)
    assert time_constant(cfg) == pytest.approx(864.5e-6, rel=1e-12)
    assert time_constant(replace(cfg, g_leak=2e-9)) == pytest.approx(time_constant(cfg) / 2, rel=1e-15)
    assert time_constant(replace(cfg, g_leak=0.0)) == math.inf
    with pytest.raises(DomainError):
        time_constant(neuron())


def test_step_identity_with_zero_drive():
    cfg = neuron()
    state = NeuronState(v_mem=0.3, t=1e-6, spike_count=2)
    new, fired = step(state, cfg, 0.0, 1e-7)
    assert not fired
    assert new.v_mem == 0.3 and new.spike_count == 2 and new.refractory_until == state.refractory_until
    assert new.t == pytest.approx(1.1e-6)


def test_single_step_matches_delta_v():
    cfg = neuron(i_leak=0.3e-9)
    new, _ = step(NeuronState(v_mem=0.2), cfg, 1e-9, PULSE.width)
    assert new.v_mem - 0.2 == pytest.approx(delta_v_mem(cfg, 1e-9, PULSE), rel=1e-12)


def test_step_fire_reset_and_refractory():
    cfg = neuron(t_refractory=5e-6)
    state, fired = step(NeuronState(v_mem=0.899), cfg, 1e-6, 1e-6)
    assert fired and state.v_mem == 0.0 and state.spike_count == 1
    assert state.refractory_until == pytest.approx(6e-6)
    held, fired = step(state, cfg, 1e-6, 1e-6)
    assert not fired and held.v_mem == 0.0


def test_step_rejects_non_finite():
    with pytest.raises(NumericError):
        step(NeuronState(), neuron(), math.nan, 1e-6)
    with pytest.raises(NumericError):
        step(NeuronState(), neuron(), 1e-9, math.inf)
    with pytest.raises(DomainError):
        step(NeuronState(), neuron(), 1e-9, 0.0)


def test_conductance_leak_decays():
    cfg = neuron(leak_mode=LeakMode.CONDUCTANCE, g_leak=1e-9)
    tau = time_constant(cfg)
    state, _ = integrate(cfg, 0.0, tau, 10_000, NeuronState(v_mem=0.5))
    assert state.v_mem == pytest.approx(0.5 / math.e, rel=1e-3)


@settings(max_examples=200)
@given(st.floats(0.0, 0.8), st.floats(0.0, 1e-6), st.floats(0.0, 1e-7), st.floats(1e-9, 1e-3))
def test_membrane_clamp(v0, leak, i_in, dt):
    cfg = neuron(i_leak=leak)
    state, _ = step(NeuronState(v_mem=v0), cfg, i_in, dt)
    assert cfg.v_reset <= state.v_mem <= cfg.v_dd


def test_default_dt():
    cfg = neuron()
    assert default_dt(cfg, 1e-6) == pytest.approx(1e-10, rel=1e-15)
    assert default_dt(cfg, 1.0, 1e-9) == pytest.approx(time_to_fire(cfg, 1e-9) / 1e4)


def test_analytic_numeric_agreement_randomized():
    rng = random.Random(1234)
    for _ in range(100):
        cfg = neuron(
            c_mem=rng.choice(list(CMEM_PRESETS.values())),
            v_th=rng.uniform(0.2, 0.9),
            i_leak=rng.choice([0.0, rng.uniform(1e-12, 1e-10)]),
            v_reset=rng.uniform(0.0, 0.1),
        )
        i_const = cfg.i_leak + 10 ** rng.uniform(-11, -7)
        t_fire = time_to_fire(cfg, i_const)
        dt = t_fire / 1e4
        state, k_fire = NeuronState.at_rest(cfg), None
        for k in range(1, 10_100):
            state, fired = step(state, cfg, i_const, dt)
            if fired:
                k_fire = k
                break
        assert k_fire is not None
        # within one step of the analytic time; slack only for float rounding of k * dt
        assert abs(k_fire - t_fire / dt) <= 1 + 1e-9


def test_zero_leak_frequency_linear():
    cfg = neuron()
    ratios = [firing_frequency(cfg, i) / i for i in [1e-10 * 10 ** (k / 10) for k in range(11)]]
    assert max(ratios) / min(ratios) - 1 <= 1e-12
