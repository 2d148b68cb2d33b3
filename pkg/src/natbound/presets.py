"""Named product specifications and the reference values shipped with them."""

from __future__ import annotations

from dataclasses import dataclass, field

from .dirichlet import ProductSpec
from .polyparse import parse_polynomial


@dataclass(frozen=True)
class Preset:
    name: str
    spec: ProductSpec
    description: str
    # factor list as usually displayed, (n, m) -> exponent; compared against the canonical one
    reference_factors: dict[tuple[int, int], int] = field(default_factory=dict)
    reference_residues: dict[str, float] = field(default_factory=dict)
    reference_constants: dict[str, float] = field(default_factory=dict)


PRESETS: dict[str, Preset] = {
    "quadratic-half": Preset(
        "quadratic-half",
        ProductSpec(parse_polynomial("1 + T + p*T^2")),
        "local factor 1 + p^-s + p^(1-2s); natural boundary expected on Re s = 1/2",
        reference_factors={(0, 1): 1, (1, 2): 1, (1, 3): 1, (0, 2): -1, (2, 4): -1},
    ),
    "polarised-z6": Preset(
        "polarised-z6",
        ProductSpec(
            parse_polynomial("1 + p*T + p^2*T + p^3*T + p^4*T + p^5*T^2"),
            ((1, 0, 1), (1, 3, 1), (1, 5, 1), (1, 6, 1)),
            3,
        ),
        "zeta(s) zeta(s-3) zeta(s-5) zeta(s-6) prod_p (1 + p^(1-s) + ... + p^(4-s) + p^(5-2s)), in w = s/3",
        reference_residues={"7": 2.377, "6": -1.168, "5": 0.1149},
        reference_constants={"c1": 2.830, "c2": 1.168, "c3": 0.1037},
    ),
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None
