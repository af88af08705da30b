"""Acceptance criteria. Each test prints one PASS/FAIL line, visible even without ``-s``."""

import csv
import io
import math
import random
import time
from contextlib import redirect_stderr, redirect_stdout
from dataclasses import replace

import numpy as np
import pytest

from oracles import random_column_case
from xbar_fanin import (
    CMEM_PRESETS,
    AttenuatorConfig,
    EnvmDeviceModel,
    Flag,
    IdealAttenuator,
    NeuronConfig,
    ReadPulse,
    Scale,
    SpikeSchedule,
    Technology,
    check_saturation,
    classify_scale,
    derive_lrs_from_fanin,
    fan_in,
    firing_frequency,
    frequency_curve,
    max_sdf,
    output_current,
    scaling_down_factor,
    simulate_column,
)
from xbar_fanin.abacus import recompute_row
from xbar_fanin.attenuator import tanh_argument
from xbar_fanin.cli import main


@pytest.fixture
def verdict(capsys):
    def emit(name, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, f"{name}: {detail}"

    return emit


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


def test_ac1_abacus_round_trip(verdict):
    start = time.perf_counter()
    code, out, _ = run_cli("sweep", "--c-mem", "864.5f", "--devices", "pcm,oxram,sot", "--sdf", "6000,9000,1000")
    elapsed = time.perf_counter() - start
    table = {r["device"]: r for r in csv.DictReader(io.StringIO(out))}
    got = {k: int(v["fan_in"]) for k, v in table.items()}
    want = {"pcm": 3560, "oxram": 350, "sot": 88200}
    setup_ok = all(
        float(r["c_mem_farads"]) == 864.5e-15 and float(r["pulse_width_s"]) == 1e-6
        and float(r["pulse_amplitude_v"]) == 0.1 and float(r["v_th_v"]) == 0.9 and float(r["i_leak_amps"]) == 0
        for r in table.values()
    )
    ok = code == 0 and setup_ok and all(abs(got[k] - want[k]) <= 1 for k in want) and elapsed < 1.0
    verdict("AC1 abacus round-trip (self-consistency of derived defaults)", ok,
            f"fan-in {got} vs {want}, {elapsed * 1e3:.0f} ms")


def test_ac2_oracle_equivalence(verdict):
    rng = random.Random(20240601)
    start = time.perf_counter()
    mismatches, n_cases, leaky_cases = [], 0, 0
    names = list(CMEM_PRESETS)
    for k in range(52):
        case = random_column_case(rng, cap_name=names[k % 4], leaky=bool(k % 2))
        rep = fan_in(case.neuron, case.device, case.sdf, case.pulse)
        cap = max_sdf(case.pulse.amplitude / case.device.r_lrs, case.neuron.i_leak)
        assert 1 <= case.sdf < cap and rep.fan_in >= 1
        schedule = SpikeSchedule.repeated(case.device.r_lrs, case.pulse, rep.fan_in + 3)
        trace = simulate_column(case.neuron, IdealAttenuator(case.sdf), schedule)
        n_cases += 1
        leaky_cases += case.neuron.i_leak > 0
        if trace.first_fire_event is None or abs(trace.first_fire_event - (rep.fan_in + 1)) > 1:
            mismatches.append((k, rep.fan_in, trace.first_fire_event))
    elapsed = time.perf_counter() - start
    ok = not mismatches and n_cases >= 50 and leaky_cases > 0 and elapsed < 60
    verdict("AC2 simulator vs analytic fan-in", ok,
            f"{n_cases} configs ({leaky_cases} leaky), mismatches={mismatches}, {elapsed:.1f} s")


def _random_attenuator(rng):
    return AttenuatorConfig(
        i_b=10 ** rng.uniform(-12, -6),
        kappa_n=rng.uniform(0.3, 1.0),
        u_t=rng.uniform(0.02, 0.035),
        r_n9=10 ** rng.uniform(3, 7),
        bias_divider=10 ** rng.uniform(-4, 0),
    )


def test_ac3_attenuator_linear_and_saturated(verdict):
    rng = np.random.default_rng(7)
    worst_dev, worst_sat, n = 0.0, math.inf, 0
    for _ in range(1000):
        cfg = _random_attenuator(rng)
        per_unit = cfg.kappa_n * cfg.r_n9 * cfg.bias_divider / (4 * cfg.u_t)
        x_lin = rng.uniform(1e-6, 0.05)
        i_lin = x_lin / per_unit
        assert tanh_argument(cfg, i_lin) <= 0.05 * (1 + 1e-12)
        limit = 4 * cfg.u_t / (cfg.i_b * cfg.kappa_n * cfg.r_n9 * cfg.bias_divider)
        worst_dev = max(worst_dev, abs(scaling_down_factor(cfg, i_lin) - limit) / limit)
        x_sat = rng.uniform(3, 50)
        worst_sat = min(worst_sat, output_current(cfg, x_sat / per_unit) / cfg.i_b)
        n += 2
    ok = worst_dev <= 1e-3 and worst_sat >= 0.995
    verdict("AC3 attenuator linear-regime SDF and saturation", ok,
            f"{n} points, worst SDF deviation {worst_dev:.2e} (<=1e-3), min i_out/i_b {worst_sat:.5f} (>=0.995)")


def test_ac4_neuron_analytics(verdict):
    rng = random.Random(99)
    worst = 0.0
    points = 0
    for _ in range(20):
        neuron = NeuronConfig(
            c_mem=rng.choice(list(CMEM_PRESETS.values())),
            v_dd=1.8,
            v_th=rng.uniform(0.3, 0.9),
            i_leak=rng.choice([0.0, 10 ** rng.uniform(-12, -10)]),
            t_refractory=rng.choice([0.0, 10 ** rng.uniform(-7, -4)]),
        )
        currents = [neuron.i_leak + 10 ** rng.uniform(-11, -7) for _ in range(3)]
        for i, f in frequency_curve(neuron, currents):
            worst = max(worst, abs(f / firing_frequency(neuron, i) - 1))
            points += 1
    base = NeuronConfig(c_mem=864.5e-15, v_dd=1.8)
    ratios = [firing_frequency(base, i) / i for i in np.geomspace(1e-10, 1e-9, 11)]
    spread = max(ratios) / min(ratios) - 1
    ok = worst <= 1e-3 and spread <= 1e-12
    verdict("AC4 neuron frequency simulation vs analytic", ok,
            f"{points} points, worst rel error {worst:.2e} (<=1e-3); f/I spread {spread:.1e} (<=1e-12)")


def test_ac5_constraint_machinery(verdict):
    neuron = NeuronConfig(c_mem=864.5e-15, v_dd=1.8, i_leak=2e-9)
    pulse = ReadPulse(0.1, 1e-6)
    dev = EnvmDeviceModel(Technology.OXRAM, 5e3, 50e3, 0.1, 9000)
    cap = max_sdf(0.1 / 5e3, neuron.i_leak)
    sdfs = np.geomspace(1, 4 * cap, 2001)
    flags = [Flag.LEAK_DOMINATED in fan_in(neuron, dev, float(s), pulse).binding_constraints for s in sdfs]
    onsets = sum(1 for a, b in zip(flags, flags[1:]) if not a and b)
    recoveries = sum(1 for a, b in zip(flags, flags[1:]) if a and not b)
    onset_sdf = float(sdfs[flags.index(True)])
    leak_ok = onsets == 1 and recoveries == 0 and not flags[0] and onset_sdf >= cap * (1 - 1e-12)

    base = AttenuatorConfig(kappa_n=0.7, kappa_n20=0.7, v_d_n10=0.3, v_d_n11=0.3, u_t=0.02585)
    predicted_vg = (base.kappa_n * (base.v_d_n10 + base.v_d_n11) - 8 * base.u_t) / base.kappa_n20
    grid = [float(v) for v in np.linspace(0.0, 0.6, 601)]
    passes = []
    sign_ok = True
    for vg in grid:
        cfg = replace(base, v_g_n20=vg)
        res = check_saturation(cfg)
        direct = 4 * cfg.u_t < (cfg.kappa_n * (cfg.v_d_n10 + cfg.v_d_n11) - cfg.kappa_n20 * cfg.v_g_n20) / 2
        sign_ok &= res.passed == direct and (res.margin > 0) == direct
        passes.append(res.passed)
    flip = [vg for vg, a, b in zip(grid[1:], passes, passes[1:]) if a != b]
    sign_ok &= len(flip) == 1 and abs(flip[0] - predicted_vg) <= 0.001 + 1e-12
    verdict("AC5 leak onset and saturation margin sign", leak_ok and sign_ok,
            f"LEAK_DOMINATED onsets={onsets} at sdf {onset_sdf:.1f} (cap {cap:.1f}); "
            f"saturation flips at v_g_n20={flip} (predicted {predicted_vg:.4f})")


def test_ac6_scale_classification(verdict):
    neuron = NeuronConfig(c_mem=864.5e-15, v_dd=1.8)
    pulse = ReadPulse(0.1, 1e-6)
    _, out, _ = run_cli("fanin", "--device", "oxram")
    ox_large = "fan_in       350" in out and "scale        LARGE" in out
    r50 = derive_lrs_from_fanin(50, 100, neuron, pulse, centered=True)
    rep = fan_in(neuron, EnvmDeviceModel(Technology.CUSTOM, r50, r50, 0.1, 100), 100, pulse)
    ok = ox_large and rep.fan_in == 50 and rep.scale is Scale.SMALL and classify_scale(350) is Scale.LARGE
    verdict("AC6 scale classification", ok, f"oxram 350 -> LARGE: {ox_large}; fan-in {rep.fan_in} -> {rep.scale}")


def test_ac7_determinism_and_csv_round_trip(verdict, tmp_path):
    commands = [
        ["sweep", "--resistance-samples", "16"],
        ["fanin", "--device", "oxram", "--csv"],
        ["attenuate", "--imin", "1p", "--imax", "1m", "--points", "32", "--bias-divider", "1,0.1"],
        ["simulate", "--device", "oxram", "--count", "400"],
        ["check"],
        ["print-default-config"],
    ]
    identical = all(run_cli(*argv) == run_cli(*argv) for argv in commands)
    _, out, _ = run_cli("sweep", "--resistance-samples", "16", "--i-leak", "3p")
    rows = list(csv.DictReader(io.StringIO(out)))
    bad = []
    for row in rows:
        _, n = recompute_row(row)
        if row["fan_in"] != ("" if n is None else str(n)):
            bad.append(row)
    ok = identical and not bad and len(rows) == 12 + 48
    verdict("AC7 bit-identical reruns and sweep CSV round-trip", ok,
            f"{len(commands)} commands identical={identical}; {len(rows)} rows, {len(bad)} mismatched")
