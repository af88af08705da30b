"""Behavioral model of the subthreshold tanh current attenuator.

The attenuator converts the synapse read current into a much smaller neuron
input current,

    I_out = I_b * tanh( kappa_n / (2 U_t) * R_N9 * (alpha * I_in) / 2 )

where ``alpha`` (``bias_divider``) lumps the effect of the source bias on the
diode-connected input pair. In the linear regime the scaling-down factor
``I_in / I_out`` approaches ``4 U_t / (I_b kappa_n R_N9 alpha)``.
"""

import csv
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .units import sci

THERMAL_VOLTAGE_300K = 0.02585


@dataclass(frozen=True)
class AttenuatorConfig:
    i_b: float = 10e-9
    kappa_n: float = 0.7
    u_t: float = THERMAL_VOLTAGE_300K
    r_n9: float = 100e3
    bias_divider: float = 1.0
    # saturation-check operating point
    v_d_n10: float = 0.3
    v_d_n11: float = 0.3
    v_g_n20: float = 0.2
    kappa_n20: float = 0.7

    def __post_init__(self):
        if not self.i_b > 0:
            raise DomainError("i_b must be > 0")
        if not self.u_t > 0:
            raise DomainError("u_t must be > 0")
        if not self.r_n9 > 0:
            raise DomainError("r_n9 must be > 0")
        if not 0 < self.kappa_n <= 1:
            raise DomainError("kappa_n must lie in (0, 1]")
        if not 0 < self.bias_divider <= 1:
            raise DomainError("bias_divider must lie in (0, 1]")


def tanh_argument(cfg, i_in):
    """Argument of the tanh for input ``i_in`` (scalar or array)."""
    return cfg.kappa_n / (2 * cfg.u_t) * (cfg.r_n9 * (cfg.bias_divider * i_in) / 2)


def output_current(cfg, i_in):
    if i_in < 0:
        raise DomainError(f"attenuator input must be >= 0, got {i_in}")
    return cfg.i_b * math.tanh(tanh_argument(cfg, i_in))


def small_signal_sdf(cfg):
    return 4 * cfg.u_t / (cfg.i_b * cfg.kappa_n * cfg.r_n9 * cfg.bias_divider)


def scaling_down_factor(cfg, i_in):
    """``I_in / I_out``; at zero input returns the small-signal limit."""
    if i_in < 0:
        raise DomainError(f"attenuator input must be >= 0, got {i_in}")
    if i_in == 0:
        return small_signal_sdf(cfg)
    x = tanh_argument(cfg, i_in)
    if x < 1e-4:
        # tanh(x)/x to 1e-16 relative; avoids cancellation at tiny x
        return small_signal_sdf(cfg) / (1 - x * x / 3)
    return i_in / output_current(cfg, i_in)


def tuned_for_sdf(cfg, sdf):
    """Copy of ``cfg`` whose bias divider gives small-signal SDF ``sdf``.

    The divider cannot exceed 1, so SDFs below the undivided small-signal
    value are clamped there.
    """
    alpha = 4 * cfg.u_t / (cfg.i_b * cfg.kappa_n * cfg.r_n9 * sdf)
    return replace(cfg, bias_divider=min(alpha, 1.0))


class SaturationCheck(NamedTuple):
    passed: bool
    margin: float  # volts; right-hand side minus 4 U_t
    rhs: float


def check_saturation(cfg):
    """Saturation of the tail transistor: ``4 U_t < (k(Vd10 + Vd11) - k20 Vg20) / 2``."""
    rhs = (cfg.kappa_n * (cfg.v_d_n10 + cfg.v_d_n11) - cfg.kappa_n20 * cfg.v_g_n20) / 2
    margin = rhs - 4 * cfg.u_t
    return SaturationCheck(margin > 0, margin, rhs)


def max_sdf(i_input_min, i_leak):
    """Largest SDF keeping the attenuated minimum read current above the neuron leak.

    Returns ``math.inf`` when there is no leak.
    """
    if not i_input_min > 0:
        raise DomainError("i_input_min must be > 0")
    if i_leak < 0:
        raise DomainError("i_leak must be >= 0")
    if i_leak == 0:
        return math.inf
    return i_input_min / i_leak


@dataclass(frozen=True)
class BandReport:
    i_in: np.ndarray
    i_out: np.ndarray
    sdf: np.ndarray
    sdf_min: float
    sdf_max: float
    flat: bool
    leak_ok: bool

    @property
    def admissible(self):
        return self.flat and self.leak_ok

    @property
    def spread(self):
        return (self.sdf_max - self.sdf_min) / self.sdf_min

    def rows(self):
        return list(zip(self.i_in.tolist(), self.i_out.tolist(), self.sdf.tolist()))

    def write_csv(self, fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("i_in_amps", "i_out_amps", "sdf"))
        for row in self.rows():
            writer.writerow([sci(x) for x in row])


def continuity_band(cfg, device, i_leak=0.0, rel_tolerance=0.05, n_samples=256):
    """SDF spread over a device's read-current range [V/r_hrs, V/r_lrs].

    The band is flat when ``(max - min) / min <= rel_tolerance`` and leak-safe
    when the attenuated current at the bottom of the band exceeds ``i_leak``.
    """
    if not rel_tolerance > 0:
        raise DomainError("rel_tolerance must be > 0")
    if n_samples < 2:
        raise DomainError("n_samples must be >= 2")
    device.require_resistance()
    lo = device.read_voltage / device.r_hrs
    hi = device.read_voltage / device.r_lrs
    i_in = np.array([lo]) if lo == hi else np.geomspace(lo, hi, n_samples)
    i_out = np.array([output_current(cfg, float(i)) for i in i_in])
    sdf = np.array([scaling_down_factor(cfg, float(i)) for i in i_in])
    sdf_min, sdf_max = float(sdf.min()), float(sdf.max())
    return BandReport(
        i_in=i_in,
        i_out=i_out,
        sdf=sdf,
        sdf_min=sdf_min,
        sdf_max=sdf_max,
        flat=(sdf_max - sdf_min) / sdf_min <= rel_tolerance,
        leak_ok=bool(i_out[0] > i_leak),
    )


def sweep_curve(cfg, i_min, i_max, points):
    """Log-spaced (i_in, i_out, sdf) rows between ``i_min`` and ``i_max``."""
    if not 0 < i_min < i_max:
        raise DomainError(f"need 0 < imin < imax, got {i_min}, {i_max}")
    if points < 1:
        raise DomainError("points must be >= 1")
    grid = np.array([i_min]) if points == 1 else np.geomspace(i_min, i_max, points)
    return [(float(i), output_current(cfg, float(i)), scaling_down_factor(cfg, float(i))) for i in grid]
