"""Symbol preset parsing for the CLI and experiments.

Grammar: ``name:key=value,key=value`` with names ``oscillatory``, ``bessel``,
``xdep``, ``multiplier``.  Values are read as fractions or floats.  The
lattice is needed to pin the support-smoothing width (one frequency bin) and
the x-period of the x-dependent model.
"""

from __future__ import annotations

from fractions import Fraction

from .func import Lattice
from .multiplier import model_multiplier
from .symbol import Symbol, model_bessel, model_oscillatory, model_x_dependent

__all__ = ["symbol_preset", "parse_kv"]


def parse_kv(args: str) -> dict[str, float]:
    out = {}
    if args:
        for item in args.split(","):
            key, _, val = item.partition("=")
            if not val:
                raise ValueError(f"malformed preset argument {item!r}")
            out[key.strip()] = float(Fraction(val))
    return out


def symbol_preset(lat: Lattice, spec: str) -> Symbol:
    name, _, args = spec.partition(":")
    kv = parse_kv(args)
    if name == "oscillatory":
        return model_oscillatory(kv["m"], kv.get("rho", 0.0), chi_width=lat.dxi)
    if name == "bessel":
        return model_bessel(kv["m"])
    if name == "xdep":
        return model_x_dependent(kv["m"], kv.get("rho", 0.0), lat.L, chi_width=lat.dxi)
    if name == "multiplier":
        return model_multiplier(kv["alpha"], kv["beta"], chi_width=lat.dxi)
    raise ValueError(f"unknown symbol preset {name!r}")
