"""Small-signal model of the Pierce sustaining amplifier.

A transconductor g_m loaded by the two ground capacitors C1, C2 and shunted
by the resonator's static capacitance C0 presents, at the resonator port,

    Z_C = (g_m + j*w*(C1 + C2)) / (j*w*g_m*C0 - w^2 * S)
    S   = C1*C2 + C2*C0 + C0*C1

whose real part is negative with magnitude

    |Re(Z_C)| = g_m*C1*C2 / ((g_m*C0)^2 + w^2 * S^2).

The magnitude is unimodal in g_m: it peaks at g_m_opt = w*S/C0 with value
Re_max = C1*C2 / (2*w*C0*S). Oscillation builds up while |Re(Z_C)| exceeds
the motional resistance R_x; design practice asks for a 3x margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .errors import ValidationError


@dataclass(frozen=True)
class PierceConfig:
    """Amplifier operating point: load caps, shunt cap, g_m, frequency.

    c1, c2  input/output ground capacitors, F
    c0      static (feedthrough) capacitance across the resonator, F
    gm      transconductance, A/V (zero models a switched-off amplifier)
    f0      evaluation frequency, Hz
    """

    c1: float
    c2: float
    c0: float
    gm: float
    f0: float

    def __post_init__(self):
        if self.c1 <= 0 or self.c2 <= 0 or self.c0 <= 0:
            raise ValidationError("c1, c2 and c0 must all be > 0")
        if self.gm < 0:
            raise ValidationError("gm must be >= 0")
        if self.f0 <= 0:
            raise ValidationError("f0 must be > 0")


def _sum_products(c1: float, c2: float, c0: float) -> float:
    return c1 * c2 + c2 * c0 + c0 * c1


def negative_resistance(config: PierceConfig) -> float:
    """Magnitude of the negative real part of Z_C, ohm (>= 0)."""
    w = 2.0 * math.pi * config.f0
    s = _sum_products(config.c1, config.c2, config.c0)
    num = config.gm * config.c1 * config.c2
    den = (config.gm * config.c0) ** 2 + (w * s) ** 2
    return num / den


def complex_impedance(config: PierceConfig) -> complex:
    """Full small-signal impedance of the amplifier at the resonator port, ohm."""
    w = 2.0 * math.pi * config.f0
    s = _sum_products(config.c1, config.c2, config.c0)
    num = complex(config.gm, w * (config.c1 + config.c2))
    den = complex(-w * w * s, w * config.gm * config.c0)
    return num / den


class PierceOptimum(NamedTuple):
    """Peak of |Re(Z_C)| over g_m: the value and where it occurs."""

    re_max: float  # ohm
    gm_opt: float  # A/V


def max_negative_resistance(c1: float, c2: float, c0: float, f0: float) -> PierceOptimum:
    """Best achievable |Re(Z_C)| and the transconductance that reaches it."""
    if min(c1, c2, c0, f0) <= 0:
        raise ValidationError("c1, c2, c0 and f0 must all be > 0")
    w = 2.0 * math.pi * f0
    s = _sum_products(c1, c2, c0)
    return PierceOptimum(
        re_max=c1 * c2 / (2.0 * w * c0 * s),
        gm_opt=w * s / c0,
    )


def required_gm(
    c1: float, c2: float, c0: float, f0: float, target_resistance: float
) -> tuple[float, ...]:
    """Transconductances giving |Re(Z_C)| = target_resistance, ascending.

    Solves target*(C0*gm)^2 - C1*C2*gm + target*(w*S)^2 = 0. Returns two
    roots below/above g_m_opt, one double root at the peak, or an empty
    tuple when the target exceeds Re_max.
    """
    if min(c1, c2, c0, f0) <= 0:
        raise ValidationError("c1, c2, c0 and f0 must all be > 0")
    if target_resistance <= 0:
        raise ValidationError("target_resistance must be > 0")
    w = 2.0 * math.pi * f0
    s = _sum_products(c1, c2, c0)
    a = target_resistance * c0 * c0
    b = -c1 * c2
    c = target_resistance * (w * s) ** 2
    disc = b * b - 4.0 * a * c
    # Relative discriminant guards the target == Re_max boundary against
    # rounding: treat |disc| below 1e-12*b^2 as a double root.
    rel = disc / (b * b)
    if rel < -1e-12:
        return ()
    if rel <= 1e-12:
        return (-b / (2.0 * a),)
    root = math.sqrt(disc)
    gm_high = (-b + root) / (2.0 * a)
    gm_low = c / (a * gm_high)  # stable form of the subtractive root
    return (gm_low, gm_high)


@dataclass(frozen=True)
class StartupReport:
    """Startup margin of a resonator/amplifier pairing.

    margin = |Re(Z_C)| / R_x. Oscillation requires margin > 1 strictly;
    meets_3x reports the margin >= 3 design rule.
    """

    negative_resistance: float
    motional_resistance: float
    margin: float
    oscillates: bool
    meets_3x: bool

    def __post_init__(self):
        if self.meets_3x and not self.oscillates:
            raise ValidationError("meets_3x implies oscillates")


def startup_check(neg_resistance: float, motional_resistance: float) -> StartupReport:
    """Compare achievable |Re(Z_C)| against the motional resistance."""
    if neg_resistance < 0:
        raise ValidationError("neg_resistance must be >= 0")
    if motional_resistance <= 0:
        raise ValidationError("motional_resistance must be > 0")
    margin = neg_resistance / motional_resistance
    return StartupReport(
        negative_resistance=neg_resistance,
        motional_resistance=motional_resistance,
        margin=margin,
        oscillates=margin > 1.0,
        meets_3x=margin >= 3.0,
    )


class LocusPoint(NamedTuple):
    """One sample of the impedance locus: g_m and Z_C split by component."""

    gm: float
    re_magnitude: float  # ohm, |Re(Z_C)| (Re itself is <= 0)
    im: float            # ohm, Im(Z_C) (capacitive, < 0)


def impedance_locus(
    c1: float, c2: float, c0: float, f0: float, gm_values: Iterable[float]
) -> list[LocusPoint]:
    """Trace Z_C over a grid of transconductances.

    The real part stays non-positive and the imaginary part strictly
    capacitive for every g_m >= 0.
    """
    points = []
    for gm in gm_values:
        cfg = PierceConfig(c1=c1, c2=c2, c0=c0, gm=gm, f0=f0)
        z = complex_impedance(cfg)
        points.append(LocusPoint(gm=gm, re_magnitude=-z.real, im=z.imag))
    return points
