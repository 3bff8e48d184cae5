"""Electrostatic gap transducer and the series RLC equivalent circuit.

A DC-biased parallel-plate electrode converts beam motion into current and
drive voltage into force with the same coupling coefficient

    eta = V_P * eps * A / g^2        [N/V, equivalently A/(m/s)]

Seen from the electrode, the vibrating beam behaves as a series RLC branch:

    R_x = k / (w0 * Q * eta^2)    L_x = m / eta^2    C_x = eta^2 / k

so that w0 = 1/sqrt(L_x C_x) and R_x * Q = sqrt(L_x / C_x) hold exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError

EPS0 = 8.854e-12  # vacuum permittivity, F/m

PORT_ONE = "one_port"
PORT_TWO = "two_port"
VALID_PORTS = frozenset({PORT_ONE, PORT_TWO})

# Usable peak displacement as a fraction of the rest gap. The one-port limit
# is set by bias network dynamics, the two-port limit by feedthrough linearity.
DISPLACEMENT_FRACTION = {PORT_ONE: 0.33, PORT_TWO: 0.11}

_IDENTITY_RTOL = 1e-9  # resonance/Q identity slack for EquivalentCircuit


@dataclass(frozen=True)
class Transducer:
    """Parallel-plate air-gap electrode facing the moving beam.

    gap               electrode-to-beam spacing at rest, m
    electrode_length  electrode overlap measured along the beam, m
    electrode_height  electrode height, equal to the beam stack thickness, m
    bias_voltage      DC polarization across the gap, V
    port              "one_port" (drive and sense share the electrode) or
                      "two_port"
    permittivity      gap dielectric permittivity, F/m (air gap by default)
    """

    gap: float
    electrode_length: float
    electrode_height: float
    bias_voltage: float
    port: str = PORT_ONE
    permittivity: float = EPS0

    def __post_init__(self):
        if self.gap <= 0:
            raise ValidationError("transducer gap must be > 0")
        if self.electrode_length <= 0:
            raise ValidationError("electrode_length must be > 0")
        if self.electrode_height <= 0:
            raise ValidationError("electrode_height must be > 0")
        if self.bias_voltage < 0:
            raise ValidationError("bias_voltage must be >= 0")
        if self.port not in VALID_PORTS:
            raise ValidationError(
                f"port must be one of {sorted(VALID_PORTS)}, got {self.port!r}"
            )
        if self.permittivity <= 0:
            raise ValidationError("permittivity must be > 0")

    @property
    def area(self) -> float:
        """Electrode face area, m^2."""
        return self.electrode_length * self.electrode_height


def electrode_capacitance(transducer: Transducer) -> float:
    """Static gap capacitance eps*A/g at rest, F."""
    return transducer.permittivity * transducer.area / transducer.gap


def coupling_coefficient(transducer: Transducer) -> float:
    """Electromechanical coupling eta = V_P * eps * A / g^2, N/V."""
    t = transducer
    return t.bias_voltage * t.permittivity * t.area / (t.gap * t.gap)


def displacement_limit(transducer: Transducer) -> float:
    """Largest usable vibration amplitude for the port configuration, m."""
    return DISPLACEMENT_FRACTION[transducer.port] * transducer.gap


@dataclass(frozen=True)
class EquivalentCircuit:
    """Series RLC branch equivalent to the resonator seen at the electrode.

    A lossless resonator is expressed as q = inf with r_x = 0. Construction
    enforces the resonance identity w0*sqrt(L_x*C_x) = 1 and, for finite Q,
    R_x*Q = sqrt(L_x/C_x), both to 1e-9 relative.
    """

    r_x: float  # motional resistance, ohm
    l_x: float  # motional inductance, H
    c_x: float  # motional capacitance, F
    f0: float   # series resonance, Hz
    q: float    # quality factor (may be math.inf)

    def __post_init__(self):
        if self.l_x <= 0 or self.c_x <= 0 or self.f0 <= 0:
            raise ValidationError("l_x, c_x and f0 must all be > 0")
        if self.r_x < 0:
            raise ValidationError("r_x must be >= 0")
        if not self.q > 0:
            raise ValidationError("q must be > 0")
        w0 = 2.0 * math.pi * self.f0
        res = w0 * math.sqrt(self.l_x * self.c_x)
        if abs(res - 1.0) > _IDENTITY_RTOL:
            raise ValidationError(
                f"resonance identity violated: w0*sqrt(LxCx) = {res!r}"
            )
        if math.isinf(self.q):
            if self.r_x != 0.0:
                raise ValidationError("q = inf requires r_x = 0")
        else:
            char = math.sqrt(self.l_x / self.c_x)
            if abs(self.r_x * self.q / char - 1.0) > _IDENTITY_RTOL:
                raise ValidationError(
                    "Q identity violated: r_x*q != sqrt(Lx/Cx)"
                )


def motional_resistance(k: float, f0: float, q: float, eta: float) -> float:
    """R_x = k / (2*pi*f0 * Q * eta^2), ohm."""
    if min(k, f0, q, eta) <= 0:
        raise ValidationError("k, f0, q and eta must all be > 0")
    return k / (2.0 * math.pi * f0 * q * eta * eta)


def extract_circuit(k: float, m: float, q: float, eta: float) -> EquivalentCircuit:
    """Map spring constant, mass, Q and coupling onto the series RLC branch.

    q may be math.inf for a lossless branch (r_x = 0).
    """
    if k <= 0 or m <= 0 or eta <= 0:
        raise ValidationError("k, m and eta must all be > 0")
    if not q > 0:
        raise ValidationError("q must be > 0")
    w0 = math.sqrt(k / m)
    f0 = w0 / (2.0 * math.pi)
    l_x = m / (eta * eta)
    c_x = eta * eta / k
    r_x = 0.0 if math.isinf(q) else k / (w0 * q * eta * eta)
    return EquivalentCircuit(r_x=r_x, l_x=l_x, c_x=c_x, f0=f0, q=q)


def series_impedance(circuit: EquivalentCircuit, frequency: float) -> complex:
    """Impedance R_x + j(wL_x - 1/(wC_x)) of the branch at `frequency`, ohm."""
    if frequency <= 0:
        raise ValidationError("frequency must be > 0")
    w = 2.0 * math.pi * frequency
    return complex(circuit.r_x, w * circuit.l_x - 1.0 / (w * circuit.c_x))


def motional_current(eta: float, f0: float, x_amplitude: float) -> float:
    """Peak motional current eta * w0 * x for vibration amplitude x, A."""
    if eta <= 0 or f0 <= 0:
        raise ValidationError("eta and f0 must be > 0")
    if x_amplitude < 0:
        raise ValidationError("x_amplitude must be >= 0")
    return eta * 2.0 * math.pi * f0 * x_amplitude
