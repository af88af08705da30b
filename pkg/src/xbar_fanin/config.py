"""Tool configuration: INI-style sections with engineering-notation values.

Sections are ``[neuron]``, ``[attenuator]``, ``[pulse]``, ``[sweep]`` and one
``[device.<label>]`` per eNVM technology. Unknown sections and keys are
errors. A device section without ``r_lrs``/``r_hrs`` declares a placeholder
device that needs resistances supplied on the command line.
"""

import configparser
from dataclasses import dataclass, field, fields
from typing import Dict, List

from .attenuator import AttenuatorConfig
from .devices import EnvmDeviceModel, ReadPulse, Technology, default_devices
from .errors import ConfigError, XbarError
from .neuron import CMEM_PRESETS, LeakMode, NeuronConfig
from .units import parse_quantity

DEVICE_PREFIX = "device."


@dataclass(frozen=True)
class ToolConfig:
    devices: Dict[str, EnvmDeviceModel]
    neuron: NeuronConfig
    attenuator: AttenuatorConfig
    pulse: ReadPulse
    sweep_c_mem: List[float] = field(default_factory=lambda: list(CMEM_PRESETS.values()))
    sweep_devices: List[str] = field(default_factory=lambda: ["pcm", "oxram", "sot"])
    resistance_samples: int = 0
    rel_tolerance: float = 0.05
    band_samples: int = 256

    def device(self, label):
        try:
            return self.devices[label]
        except KeyError:
            raise ConfigError(
                f"unknown device {label!r}; available: {', '.join(self.devices)}"
            ) from None


def parse_capacitance(text):
    """A capacitance value or one of the named presets (``cmem_paper_1`` .. ``cmem_paper_4``)."""
    text = str(text).strip()
    if text in CMEM_PRESETS:
        return CMEM_PRESETS[text]
    return parse_quantity(text)


def _split_list(text):
    return [item.strip() for item in str(text).split(",") if item.strip()]


_NEURON_KEYS = {
    "c_mem": parse_capacitance, "v_dd": parse_quantity, "v_th": parse_quantity,
    "leak_mode": lambda s: LeakMode(s.strip().upper()), "i_leak": parse_quantity,
    "g_leak": parse_quantity, "v_reset": parse_quantity, "t_refractory": parse_quantity,
}
_ATTEN_KEYS = {f.name: parse_quantity for f in fields(AttenuatorConfig)}
_PULSE_KEYS = {"amplitude": parse_quantity, "width": parse_quantity, "period": parse_quantity}
_DEVICE_KEYS = {
    "name": lambda s: Technology(s.strip().upper()), "r_lrs": parse_quantity,
    "r_hrs": parse_quantity, "read_voltage": parse_quantity, "default_sdf": parse_quantity,
}
_SWEEP_KEYS = {
    "c_mem": lambda s: [parse_capacitance(x) for x in _split_list(s)],
    "devices": _split_list,
    "resistance_samples": int,
    "rel_tolerance": parse_quantity,
    "band_samples": int,
}


def _read_section(parser, section, schema):
    values = {}
    for key, raw in parser.items(section):
        if key not in schema:
            raise ConfigError(f"[{section}]: unknown key {key!r}; allowed: {', '.join(schema)}")
        try:
            values[key] = schema[key](raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from None
    return values


def parse_config(text, source="<config>"):
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"), default_section="__none__"
    )
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None

    sections = {"neuron": {}, "attenuator": {}, "pulse": {}, "sweep": {}}
    devices = {}
    schemas = {"neuron": _NEURON_KEYS, "attenuator": _ATTEN_KEYS, "pulse": _PULSE_KEYS,
               "sweep": _SWEEP_KEYS}
    try:
        for section in parser.sections():
            if section in schemas:
                sections[section] = _read_section(parser, section, schemas[section])
            elif section.startswith(DEVICE_PREFIX):
                label = section[len(DEVICE_PREFIX):]
                vals = _read_section(parser, section, _DEVICE_KEYS)
                missing = {"name", "read_voltage", "default_sdf"} - set(vals)
                if missing:
                    raise ConfigError(f"[{section}]: missing keys {', '.join(sorted(missing))}")
                devices[label] = EnvmDeviceModel(
                    label=label, r_lrs=vals.get("r_lrs"), r_hrs=vals.get("r_hrs"),
                    name=vals["name"], read_voltage=vals["read_voltage"],
                    default_sdf=vals["default_sdf"],
                )
            else:
                raise ConfigError(f"unknown section [{section}]")

        if "c_mem" not in sections["neuron"]:
            raise ConfigError("[neuron]: c_mem is required")
        if not {"amplitude", "width"} <= set(sections["pulse"]):
            raise ConfigError("[pulse]: amplitude and width are required")
        neuron = NeuronConfig(**sections["neuron"])
        attenuator = AttenuatorConfig(**sections["attenuator"])
        pulse = ReadPulse(**sections["pulse"])
        sweep = {("sweep_" + k if k in ("c_mem", "devices") else k): v
                 for k, v in sections["sweep"].items()}
        cfg = ToolConfig(devices=devices, neuron=neuron, attenuator=attenuator, pulse=pulse, **sweep)
    except ConfigError:
        raise
    except XbarError as exc:
        raise ConfigError(str(exc)) from None

    for label in cfg.sweep_devices:
        if label not in devices:
            raise ConfigError(f"[sweep] devices: unknown device {label!r}")
    return cfg


def load_config(path=None):
    """Read a config file, or the built-in defaults when ``path`` is None."""
    if path is None:
        return parse_config(default_config_text(), source="<defaults>")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source=str(path))


def default_config_text():
    """The default configuration, reproducing the 864.5 fF / 1 us / 0.1 V abacus point."""
    neuron = NeuronConfig(c_mem=CMEM_PRESETS["cmem_paper_1"], v_dd=1.8)
    pulse = ReadPulse(amplitude=0.1, width=1e-6)
    atten = AttenuatorConfig()
    lines = [
        "# xbar-fanin configuration. Values accept SI prefixes (f p n u m k M G) and unit symbols.",
        "",
        "[neuron]",
        "c_mem = 864.5f",
        "v_dd = 1.8",
        "v_th = 0.9",
        "leak_mode = CONSTANT_CURRENT",
        "# current equivalent of the leak bias is unspecified; zero leak assumed",
        "i_leak = 0",
        "g_leak = 0",
        "v_reset = 0",
        "# refractory behaviour of the neuron is unspecified; assumed zero",
        "t_refractory = 0",
        "",
        "[attenuator]",
    ]
    lines += [f"{f.name} = {getattr(atten, f.name)!r}" for f in fields(AttenuatorConfig)]
    lines += [
        "",
        "[pulse]",
        "amplitude = 0.1",
        "width = 1u",
        "period = 1u",
        "",
        "[sweep]",
        "c_mem = cmem_paper_1, cmem_paper_2, cmem_paper_3, cmem_paper_4",
        "devices = pcm, oxram, sot",
        "resistance_samples = 0",
        "rel_tolerance = 0.05",
        "band_samples = 256",
    ]
    for label, dev in default_devices(neuron, pulse).items():
        lines += ["", f"[device.{label}]", f"name = {dev.name.value}"]
        if dev.is_placeholder:
            lines += ["# no reference resistance range: supply r_lrs / r_hrs before use",
                      "# r_lrs =", "# r_hrs ="]
        else:
            lines += ["# LRS inverted from the reference fan-in; HRS from an assumed on/off ratio",
                      f"r_lrs = {dev.r_lrs!r}", f"r_hrs = {dev.r_hrs!r}"]
        lines += [f"read_voltage = {dev.read_voltage!r}", f"default_sdf = {dev.default_sdf!r}"]
    return "\n".join(lines) + "\n"
