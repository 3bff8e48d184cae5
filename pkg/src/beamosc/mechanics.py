"""Lumped single-mode model of a laterally vibrating beam.

The beam bends in plane, so the area moment uses the in-plane width H as the
bending dimension and the stack thickness W as the out-of-plane depth:

    I = W * H^3 / 12
    k = c * E * I / L^3      c = 3 (cantilever tip) or 192 (clamped-clamped middle)

The default mass model lumps the full beam mass rho*L*H*W at the drive point.
That choice, together with the stiffness above, reproduces the bundled
reference device table; a single-mode modal mass (fraction of the full mass)
is available as an alternative and raises the predicted frequency by
1/sqrt(fraction).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ConvergenceError, PullInError, ValidationError
from .transduction import EPS0, Transducer, coupling_coefficient


class Anchor(str, enum.Enum):
    CANTILEVER = "cantilever"
    CLAMPED_CLAMPED = "clamped_clamped"


# Tip (cantilever) and midpoint (clamped-clamped) point-load stiffness factors.
STIFFNESS_COEFF = {Anchor.CANTILEVER: 3.0, Anchor.CLAMPED_CLAMPED: 192.0}

# Effective fraction of the beam mass participating in the fundamental mode.
MODAL_MASS_FRACTION = {Anchor.CANTILEVER: 0.2427, Anchor.CLAMPED_CLAMPED: 0.3965}

MASS_MODELS = ("full", "modal")
DEFLECTION_MODES = ("linearized", "nonlinear")

_FP_TOL = 1e-15       # nonlinear deflection fixed-point tolerance, m
_FP_MAX_ITER = 1000
_FP_DAMPING = 0.5


@dataclass(frozen=True)
class BeamGeometry:
    """Prismatic beam released over a cavity.

    L  length between anchors, m
    H  in-plane width (the bending direction), m
    W  stack thickness (out-of-plane depth), m
    """

    anchor: Anchor
    L: float
    H: float
    W: float

    def __post_init__(self):
        # Accept plain strings for the anchor to keep config plumbing simple.
        if not isinstance(self.anchor, Anchor):
            try:
                object.__setattr__(self, "anchor", Anchor(self.anchor))
            except ValueError:
                valid = [a.value for a in Anchor]
                raise ValidationError(
                    f"anchor must be one of {valid}, got {self.anchor!r}"
                ) from None
        if self.L <= 0 or self.H <= 0 or self.W <= 0:
            raise ValidationError("beam dimensions must all be > 0")
        if self.L <= self.H:
            raise ValidationError("beam length must exceed its in-plane width")


def area_moment(geometry: BeamGeometry) -> float:
    """Second moment of area for in-plane bending, m^4."""
    return geometry.W * geometry.H ** 3 / 12.0


def spring_constant(geometry: BeamGeometry, youngs_modulus: float) -> float:
    """Point-load stiffness at the drive point, N/m."""
    if youngs_modulus <= 0:
        raise ValidationError("youngs_modulus must be > 0")
    coeff = STIFFNESS_COEFF[geometry.anchor]
    return coeff * youngs_modulus * area_moment(geometry) / geometry.L ** 3


def lumped_mass(geometry: BeamGeometry, density: float, mass_model: str = "full") -> float:
    """Equivalent mass at the drive point, kg.

    "full" lumps the entire beam mass (the calibration used throughout the
    bundled reference designs); "modal" scales it by the fundamental-mode
    participation fraction.
    """
    if density <= 0:
        raise ValidationError("density must be > 0")
    if mass_model not in MASS_MODELS:
        raise ValidationError(f"mass_model must be one of {MASS_MODELS}")
    m = density * geometry.L * geometry.H * geometry.W
    if mass_model == "modal":
        m *= MODAL_MASS_FRACTION[geometry.anchor]
    return m


def resonant_frequency(k: float, m: float) -> float:
    """Natural frequency sqrt(k/m)/(2*pi), Hz."""
    if k <= 0 or m <= 0:
        raise ValidationError("k and m must be > 0")
    return math.sqrt(k / m) / (2.0 * math.pi)


@dataclass(frozen=True)
class LumpedBeamModel:
    """Spring-mass-damper summary of one beam: k [N/m], m [kg], f0 [Hz], q."""

    k: float
    m: float
    f0: float
    q: float

    def __post_init__(self):
        if self.k <= 0 or self.m <= 0 or self.f0 <= 0:
            raise ValidationError("k, m and f0 must all be > 0")
        if not self.q > 0:
            raise ValidationError("q must be > 0")
        expected = resonant_frequency(self.k, self.m)
        if abs(self.f0 / expected - 1.0) > 1e-12:
            raise ValidationError(
                f"f0 = {self.f0!r} inconsistent with sqrt(k/m)/2pi = {expected!r}"
            )

    @classmethod
    def from_geometry(
        cls,
        geometry: BeamGeometry,
        youngs_modulus: float,
        density: float,
        q: float,
        mass_model: str = "full",
    ) -> "LumpedBeamModel":
        k = spring_constant(geometry, youngs_modulus)
        m = lumped_mass(geometry, density, mass_model)
        return cls(k=k, m=m, f0=resonant_frequency(k, m), q=q)


def pull_in_voltage(
    k: float, gap: float, electrode_area: float, permittivity: float = EPS0
) -> float:
    """Bias at which the gap collapses: sqrt(8*k*g^3 / (27*eps*A)), V."""
    if min(k, gap, electrode_area, permittivity) <= 0:
        raise ValidationError("k, gap, electrode_area and permittivity must be > 0")
    return math.sqrt(8.0 * k * gap ** 3 / (27.0 * permittivity * electrode_area))


def static_deflection(k: float, transducer: Transducer, mode: str = "linearized") -> float:
    """DC gap closure under bias, m.

    "linearized" evaluates the force at the rest gap, x = eta*V_P/(2k).
    "nonlinear" solves x = eps*A*V^2 / (2k*(g-x)^2) by a damped fixed point
    (damping 0.5, tolerance 1e-15 m, at most 1000 iterations) and requires
    the bias to sit strictly below pull-in.
    """
    if k <= 0:
        raise ValidationError("k must be > 0")
    if mode not in DEFLECTION_MODES:
        raise ValidationError(f"mode must be one of {DEFLECTION_MODES}")
    t = transducer
    if t.bias_voltage == 0.0:
        return 0.0
    if mode == "linearized":
        return coupling_coefficient(t) * t.bias_voltage / (2.0 * k)

    v_pi = pull_in_voltage(k, t.gap, t.area, t.permittivity)
    if t.bias_voltage >= v_pi:
        raise PullInError(
            f"bias {t.bias_voltage} V >= pull-in voltage {v_pi:.6g} V"
        )
    force_num = t.permittivity * t.area * t.bias_voltage ** 2 / (2.0 * k)
    x = 0.0
    for _ in range(_FP_MAX_ITER):
        target = force_num / (t.gap - x) ** 2
        x_next = x + _FP_DAMPING * (target - x)
        if x_next >= t.gap / 3.0:
            # Past the stable-branch boundary: treat as collapse.
            raise PullInError("deflection iterate crossed the stable-branch limit g/3")
        if abs(x_next - x) < _FP_TOL:
            return x_next
        x = x_next
    raise ConvergenceError(
        f"static deflection fixed point did not reach {_FP_TOL} m "
        f"within {_FP_MAX_ITER} iterations"
    )


def spring_softening(transducer: Transducer) -> float:
    """Electrical spring constant k_e = eps*A*V_P^2 / g^3, N/m."""
    t = transducer
    return t.permittivity * t.area * t.bias_voltage ** 2 / t.gap ** 3


def frequency_shift(model: LumpedBeamModel, delta_k: float) -> float:
    """Resonance after a stiffness perturbation, sqrt((k+dk)/m)/(2*pi), Hz.

    Pass delta_k = -spring_softening(...) for the bias-induced shift.
    """
    k_eff = model.k + delta_k
    if k_eff <= 0:
        raise ValidationError(
            f"stiffness perturbation {delta_k} collapses the resonator (k = {model.k})"
        )
    return resonant_frequency(k_eff, model.m)
