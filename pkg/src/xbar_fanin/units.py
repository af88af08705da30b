"""Engineering-notation number parsing and formatting.

Values are stored in base SI units; text input may carry an SI prefix and an
optional unit symbol, e.g. ``864.5f``, ``864.5fF``, ``11.3 Meg``, ``100k``,
``1us``, ``2 nA``.
"""

import math
import re
from decimal import Decimal

# decimal exponents; scaling goes through Decimal so "864.5f" == 864.5e-15 exactly
PREFIXES = {
    "a": -18, "f": -15, "p": -12, "n": -9, "u": -6, "µ": -6, "μ": -6, "m": -3,
    "": 0, "k": 3, "K": 3, "M": 6, "Meg": 6, "G": 9, "T": 12,
}

# longest first so "Hz" is not read as a bare unit after prefix "H"
UNITS = ("ohms", "ohm", "Hz", "Ω", "F", "A", "V", "s", "S")

_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_PATTERN = re.compile(
    r"^\s*(?P<num>{num})\s*(?P<prefix>Meg|[afpnuµμmkKMGT])?(?P<unit>{units})?\s*$".format(
        num=_NUMBER, units="|".join(re.escape(u) for u in UNITS)
    )
)


def parse_quantity(text):
    """Parse ``text`` into a float in base SI units.

    Raises ``ValueError`` on anything that is not a finite number with an
    optional prefix and unit.
    """
    if isinstance(text, (int, float)):
        value = float(text)
    else:
        match = _PATTERN.match(str(text))
        if match is None:
            raise ValueError(f"cannot parse quantity {text!r}")
        exponent = PREFIXES[match.group("prefix") or ""]
        value = float(Decimal(match.group("num")).scaleb(exponent))
    if not math.isfinite(value):
        raise ValueError(f"non-finite quantity {text!r}")
    return value


def parse_quantity_list(text):
    """Parse a comma-separated list of quantities."""
    items = [item for item in str(text).split(",") if item.strip()]
    return [parse_quantity(item) for item in items]


_FORMAT_TIERS = [(1e12, "T"), (1e9, "G"), (1e6, "M"), (1e3, "k"), (1.0, ""),
                 (1e-3, "m"), (1e-6, "u"), (1e-9, "n"), (1e-12, "p"), (1e-15, "f"), (1e-18, "a")]


def format_quantity(value, unit="", digits=4):
    """Human-readable engineering notation, e.g. ``format_quantity(8.645e-13, 'F')`` -> ``'864.5fF'``."""
    if value == 0 or not math.isfinite(value):
        return f"{value:g}{unit}"
    mag = abs(value)
    for scale, prefix in _FORMAT_TIERS:
        if mag >= scale * (1 - 1e-12):
            return f"{value / scale:.{digits}g}{prefix}{unit}"
    scale, prefix = _FORMAT_TIERS[-1]
    return f"{value / scale:.{digits}g}{prefix}{unit}"


def sci(value):
    """Full-precision scientific notation used in CSV output (round-trips exactly)."""
    return f"{value:.16e}"
