"""Design evaluation pipeline, parameter sweeps, and optimization.

evaluate() runs one candidate through process -> mechanics -> transduction ->
amplifier sizing and grades it against four feasibility constraints:

  bias        V_P <= alpha * V_pi (stay clear of pull-in, alpha = 0.97)
  deflection  static deflection + vibration allowance <= displacement limit
  startup     |Re(Z_C)| / R_x >= target margin (3x by default)
  rules       release-etch manufacturability rules hold

sweep() maps a Cartesian grid, keeping infeasible points flagged rather than
dropped. optimize() runs a coarse feasible-grid pass and refines the best
cell with a derivative-free simplex search that rejects constraint
violations; the result is never worse than the best grid point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import BeamoscError, GridCapError, ValidationError
from .mechanics import (
    BeamGeometry,
    LumpedBeamModel,
    pull_in_voltage,
    static_deflection,
)
from .pierce import (
    PierceConfig,
    StartupReport,
    max_negative_resistance,
    negative_resistance,
    required_gm,
    startup_check,
)
from .process import (
    LaminateProperties,
    LaminateSpec,
    MemsRuleSet,
    RuleViolation,
    check_mems_rules,
    laminate_properties,
)
from .transduction import (
    EquivalentCircuit,
    Transducer,
    coupling_coefficient,
    displacement_limit,
    electrode_capacitance,
    extract_circuit,
    motional_current,
)
from .errors import StageError

_SLACK = 1e-9  # relative slack on constraint boundaries


@dataclass(frozen=True)
class DesignInputs:
    """Everything needed to evaluate one resonator/oscillator candidate.

    The electrode height always follows the beam stack thickness; whatever
    `transducer.electrode_height` was constructed with is replaced by
    `beam.W` during evaluation, so sweeping the thickness stays consistent.

    gm = None sizes the amplifier automatically: the smallest
    transconductance that reaches target_margin, falling back to the
    |Re(Z_C)| peak when the margin is out of reach. x_amplitude is the
    assumed operating vibration amplitude (used only to report motional
    current); vibration_amplitude is the amplitude budget enforced by the
    deflection constraint, defaulting to the remaining headroom.
    """

    laminate: LaminateSpec
    beam: BeamGeometry
    transducer: Transducer
    q_factor: float
    c1: float = 2e-12
    c2: float = 2e-12
    c0: float = 10e-15
    gm: float | None = None
    target_margin: float = 3.0
    alpha_pull_in: float = 0.97
    vibration_amplitude: float | None = None
    x_amplitude: float | None = None
    mass_model: str = "full"
    deflection_mode: str = "linearized"
    rules: MemsRuleSet = MemsRuleSet()
    youngs_modulus: float | None = None
    density: float | None = None

    def __post_init__(self):
        if self.q_factor <= 0:
            raise ValidationError("q_factor must be > 0")
        if min(self.c1, self.c2, self.c0) <= 0:
            raise ValidationError("c1, c2 and c0 must all be > 0")
        if self.gm is not None and self.gm < 0:
            raise ValidationError("gm must be >= 0 (or None for automatic sizing)")
        if self.target_margin <= 0:
            raise ValidationError("target_margin must be > 0")
        if not 0 < self.alpha_pull_in <= 1:
            raise ValidationError("alpha_pull_in must be in (0, 1]")
        if self.vibration_amplitude is not None and self.vibration_amplitude < 0:
            raise ValidationError("vibration_amplitude must be >= 0")
        if self.x_amplitude is not None and self.x_amplitude < 0:
            raise ValidationError("x_amplitude must be >= 0")


@dataclass(frozen=True)
class ConstraintCheck:
    """One graded constraint: measured value vs limit plus a violation size.

    violation is 0 when satisfied, otherwise the normalized amount by which
    the limit is exceeded (used to rank infeasible candidates).
    """

    name: str
    ok: bool
    measured: float
    limit: float
    violation: float


CONSTRAINT_NAMES = ("bias", "deflection", "startup", "rules")


@dataclass(frozen=True)
class DesignPoint:
    """Fully evaluated candidate: resolved parts, derived figures, verdict."""

    inputs: DesignInputs
    laminate: LaminateProperties
    model: LumpedBeamModel
    transducer: Transducer
    eta: float
    c_static: float
    v_pull_in: float
    x_static: float
    x_limit: float
    circuit: EquivalentCircuit
    i_x: float | None
    re_max: float
    gm_opt: float
    gm: float
    re_zc: float
    startup: StartupReport
    rule_violations: tuple[RuleViolation, ...]
    constraints: tuple[ConstraintCheck, ...]
    feasible: bool

    def constraint(self, name: str) -> ConstraintCheck:
        for check in self.constraints:
            if check.name == name:
                return check
        raise KeyError(name)


def evaluate(inputs: DesignInputs) -> DesignPoint:
    """Run the full pipeline on one candidate.

    Any validation or physics error is re-raised as a StageError naming the
    pipeline stage that rejected the candidate.
    """
    stage = "process"
    try:
        lam = laminate_properties(
            inputs.laminate,
            youngs_modulus=inputs.youngs_modulus,
            density=inputs.density,
        )

        stage = "mechanics"
        beam = inputs.beam
        model = LumpedBeamModel.from_geometry(
            beam, lam.youngs_modulus, lam.density, inputs.q_factor, inputs.mass_model
        )

        stage = "transduction"
        tr = replace(inputs.transducer, electrode_height=beam.W)
        if tr.electrode_length > beam.L * (1.0 + _SLACK):
            raise ValidationError(
                f"electrode_length {tr.electrode_length:.6g} m exceeds "
                f"beam length {beam.L:.6g} m"
            )
        eta = coupling_coefficient(tr)
        c_static = electrode_capacitance(tr)
        x_limit = displacement_limit(tr)
        v_pi = pull_in_voltage(model.k, tr.gap, tr.area, tr.permittivity)
        x_static = static_deflection(model.k, tr, inputs.deflection_mode)
        circuit = extract_circuit(model.k, model.m, model.q, eta)
        i_x = None
        if inputs.x_amplitude is not None:
            i_x = motional_current(eta, circuit.f0, inputs.x_amplitude)

        stage = "pierce"
        opt = max_negative_resistance(inputs.c1, inputs.c2, inputs.c0, circuit.f0)
        if inputs.gm is None:
            roots = required_gm(
                inputs.c1, inputs.c2, inputs.c0, circuit.f0,
                inputs.target_margin * circuit.r_x,
            )
            gm = roots[0] if roots else opt.gm_opt
        else:
            gm = inputs.gm
        re_zc = negative_resistance(
            PierceConfig(c1=inputs.c1, c2=inputs.c2, c0=inputs.c0, gm=gm, f0=circuit.f0)
        )
        startup = startup_check(re_zc, circuit.r_x)

        stage = "rules"
        violations = tuple(check_mems_rules(beam, tr, inputs.rules))
    except BeamoscError as err:
        raise StageError(stage, err) from err

    bias_limit = inputs.alpha_pull_in * v_pi
    allowance = (
        inputs.vibration_amplitude
        if inputs.vibration_amplitude is not None
        else max(0.0, x_limit - x_static)
    )
    deflection_measured = x_static + allowance
    rules_violation = max(
        (abs(v.measured - v.limit) / v.limit for v in violations), default=0.0
    )
    checks = (
        ConstraintCheck(
            name="bias",
            ok=tr.bias_voltage <= bias_limit * (1.0 + _SLACK),
            measured=tr.bias_voltage,
            limit=bias_limit,
            violation=max(0.0, tr.bias_voltage / bias_limit - 1.0),
        ),
        ConstraintCheck(
            name="deflection",
            ok=deflection_measured <= x_limit * (1.0 + _SLACK),
            measured=deflection_measured,
            limit=x_limit,
            violation=max(0.0, deflection_measured / x_limit - 1.0),
        ),
        ConstraintCheck(
            name="startup",
            ok=startup.margin >= inputs.target_margin * (1.0 - _SLACK),
            measured=startup.margin,
            limit=inputs.target_margin,
            violation=max(0.0, 1.0 - startup.margin / inputs.target_margin),
        ),
        ConstraintCheck(
            name="rules",
            ok=not violations,
            measured=float(len(violations)),
            limit=0.0,
            violation=rules_violation,
        ),
    )
    return DesignPoint(
        inputs=inputs,
        laminate=lam,
        model=model,
        transducer=tr,
        eta=eta,
        c_static=c_static,
        v_pull_in=v_pi,
        x_static=x_static,
        x_limit=x_limit,
        circuit=circuit,
        i_x=i_x,
        re_max=opt.re_max,
        gm_opt=opt.gm_opt,
        gm=gm,
        re_zc=re_zc,
        startup=startup,
        rule_violations=violations,
        constraints=checks,
        feasible=all(c.ok for c in checks),
    )


def feasible_for(point: DesignPoint, names: tuple[str, ...]) -> bool:
    """Feasibility against a subset of the constraint set."""
    return all(point.constraint(n).ok for n in names)


def flatten(point: DesignPoint) -> dict:
    """One row of scalars per design point, for CSV/JSON export."""
    ins = point.inputs
    row = {
        "beam.anchor": ins.beam.anchor.value,
        "beam.length": ins.beam.L,
        "beam.in_plane_width": ins.beam.H,
        "beam.thickness": ins.beam.W,
        "beam.q_factor": ins.q_factor,
        "laminate.top_metal_index": ins.laminate.top_metal_index,
        "laminate.thickness": point.laminate.thickness,
        "laminate.youngs_modulus": point.laminate.youngs_modulus,
        "laminate.density": point.laminate.density,
        "transducer.gap": point.transducer.gap,
        "transducer.electrode_length": point.transducer.electrode_length,
        "transducer.bias_voltage": point.transducer.bias_voltage,
        "transducer.port": point.transducer.port,
        "pierce.c1": ins.c1,
        "pierce.c2": ins.c2,
        "pierce.c0": ins.c0,
        "derived.spring_constant": point.model.k,
        "derived.mass": point.model.m,
        "derived.f0": point.model.f0,
        "derived.v_pull_in": point.v_pull_in,
        "derived.x_static": point.x_static,
        "derived.x_limit": point.x_limit,
        "derived.eta": point.eta,
        "derived.c_static": point.c_static,
        "derived.r_x": point.circuit.r_x,
        "derived.l_x": point.circuit.l_x,
        "derived.c_x": point.circuit.c_x,
        "derived.i_x": point.i_x,
        "derived.re_zc": point.re_zc,
        "derived.re_zc_max": point.re_max,
        "derived.gm_opt": point.gm_opt,
        "derived.gm": point.gm,
        "derived.startup_margin": point.startup.margin,
        "derived.oscillates": point.startup.oscillates,
        "derived.meets_3x": point.startup.meets_3x,
    }
    for check in point.constraints:
        row[f"constraint.{check.name}_ok"] = check.ok
    row["rule_violation_count"] = len(point.rule_violations)
    row["feasible"] = point.feasible
    return row


def _set_beam(field: str):
    def setter(inputs: DesignInputs, value: float) -> DesignInputs:
        return replace(inputs, beam=replace(inputs.beam, **{field: value}))
    return setter


def _set_transducer(field: str):
    def setter(inputs: DesignInputs, value: float) -> DesignInputs:
        return replace(inputs, transducer=replace(inputs.transducer, **{field: value}))
    return setter


def _set_scalar(field: str):
    def setter(inputs: DesignInputs, value: float) -> DesignInputs:
        return replace(inputs, **{field: value})
    return setter


# Sweepable parameter paths. Names match the config file / --set syntax.
PARAMETER_PATHS = {
    "beam.length": _set_beam("L"),
    "beam.in_plane_width": _set_beam("H"),
    "beam.thickness": _set_beam("W"),
    "beam.q_factor": _set_scalar("q_factor"),
    "transducer.gap": _set_transducer("gap"),
    "transducer.electrode_length": _set_transducer("electrode_length"),
    "transducer.bias_voltage": _set_transducer("bias_voltage"),
    "pierce.c0": _set_scalar("c0"),
    "pierce.c1": _set_scalar("c1"),
    "pierce.c2": _set_scalar("c2"),
    "pierce.gm": _set_scalar("gm"),
    "pierce.target_margin": _set_scalar("target_margin"),
    "materials.youngs_modulus": _set_scalar("youngs_modulus"),
    "materials.density": _set_scalar("density"),
    "explore.alpha_pull_in": _set_scalar("alpha_pull_in"),
    "explore.vibration_amplitude": _set_scalar("vibration_amplitude"),
    "explore.x_amplitude": _set_scalar("x_amplitude"),
}


def set_parameter(inputs: DesignInputs, path: str, value: float) -> DesignInputs:
    """Return a copy of `inputs` with one dotted-path parameter replaced."""
    try:
        setter = PARAMETER_PATHS[path]
    except KeyError:
        raise ValidationError(
            f"unknown parameter path {path!r}; valid paths: "
            f"{', '.join(sorted(PARAMETER_PATHS))}"
        ) from None
    return setter(inputs, value)


@dataclass(frozen=True)
class SweepAxis:
    """One grid axis: a dotted parameter path and its sampled range."""

    path: str
    minimum: float
    maximum: float
    steps: int
    scale: str = "linear"

    def __post_init__(self):
        if self.path not in PARAMETER_PATHS:
            raise ValidationError(f"unknown parameter path {self.path!r}")
        if not isinstance(self.steps, int) or isinstance(self.steps, bool) or self.steps < 1:
            raise ValidationError("steps must be an integer >= 1")
        if self.minimum > self.maximum:
            raise ValidationError("axis minimum must not exceed maximum")
        if self.scale not in ("linear", "log"):
            raise ValidationError("scale must be 'linear' or 'log'")
        if self.scale == "log" and self.minimum <= 0:
            raise ValidationError("log axes need minimum > 0")

    def values(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.minimum])
        if self.scale == "log":
            return np.geomspace(self.minimum, self.maximum, self.steps)
        return np.linspace(self.minimum, self.maximum, self.steps)


OBJECTIVES = {
    # Achievable startup margin ceiling: best-case |Re(Z_C)| over R_x.
    "startup_margin": ("max", lambda p: p.re_max / p.circuit.r_x),
    "min_Rx": ("min", lambda p: p.circuit.r_x),
    "max_f0": ("max", lambda p: p.model.f0),
}

DEFAULT_GRID_CAP = 1_000_000


@dataclass(frozen=True)
class SweepSpec:
    """Grid definition plus the objective/constraints used to grade it.

    constraints = None enforces all four; pass a subset of
    ("bias", "deflection", "startup", "rules") to relax the rest.
    """

    axes: tuple[SweepAxis, ...]
    objective: str = "startup_margin"
    grid_cap: int = DEFAULT_GRID_CAP
    constraints: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.axes:
            raise ValidationError("sweep needs at least one axis")
        if self.objective not in OBJECTIVES:
            raise ValidationError(
                f"objective must be one of {sorted(OBJECTIVES)}"
            )
        if self.grid_cap < 1:
            raise ValidationError("grid_cap must be >= 1")
        if self.constraints is not None:
            bad = set(self.constraints) - set(CONSTRAINT_NAMES)
            if bad:
                raise ValidationError(f"unknown constraints: {sorted(bad)}")

    @property
    def enabled_constraints(self) -> tuple[str, ...]:
        return CONSTRAINT_NAMES if self.constraints is None else self.constraints


def _check_cap(sizes: list[int], cap: int) -> int:
    total = math.prod(sizes)
    if total > cap:
        raise GridCapError(
            f"grid of {total} points exceeds the cap of {cap}; "
            "shrink the axes or raise grid_cap"
        )
    return total


def sweep(inputs: DesignInputs, spec: SweepSpec) -> list[DesignPoint]:
    """Evaluate the full Cartesian grid, in row-major axis order.

    Infeasible points are returned flagged, not dropped. Points whose
    parameter combination is outright invalid (for example an electrode
    longer than the beam) raise StageError; choose axis bounds inside the
    valid region.
    """
    grids = [axis.values() for axis in spec.axes]
    _check_cap([len(g) for g in grids], spec.grid_cap)
    points = []
    for combo in itertools.product(*grids):
        candidate = inputs
        for axis, value in zip(spec.axes, combo):
            candidate = set_parameter(candidate, axis.path, float(value))
        points.append(evaluate(candidate))
    return points


@dataclass(frozen=True)
class OptimizeResult:
    """Outcome of optimize(): the winning point or an infeasibility report."""

    objective: str
    feasible: bool
    best: DesignPoint | None
    best_params: dict | None
    objective_value: float | None
    evaluations: int
    most_violated: str | None
    log: tuple[dict, ...]


_COARSE_LIMIT = 5     # max grid steps per axis in the coarse pass
_NM_ITER_PER_DIM = 60
_NM_TOL = 1e-4        # normalized simplex spread at convergence


def optimize(inputs: DesignInputs, spec: SweepSpec) -> OptimizeResult:
    """Coarse grid pass plus simplex refinement of the best feasible cell.

    Candidates violating any enabled constraint (or failing to evaluate at
    all) are rejected rather than penalized smoothly. The refined result is
    never worse than the best feasible grid point. Fully deterministic.

    If no grid point is feasible the result reports the constraint that was
    closest to blocking everywhere (most_violated).
    """
    sense, extract = OBJECTIVES[spec.objective]
    sign = -1.0 if sense == "max" else 1.0
    enabled = spec.enabled_constraints

    axes = spec.axes
    grids = [
        axis.values() if axis.steps <= _COARSE_LIMIT
        else replace(axis, steps=_COARSE_LIMIT).values()
        for axis in axes
    ]
    _check_cap([len(g) for g in grids], spec.grid_cap)

    log: list[dict] = []
    evaluations = 0
    last_error: BeamoscError | None = None
    infeasible_candidates: list[DesignPoint] = []
    best: tuple[float, dict, DesignPoint] | None = None  # (signed obj, params, point)

    def try_point(phase: str, params: dict):
        nonlocal evaluations, best, last_error
        evaluations += 1
        candidate = inputs
        try:
            for path, value in params.items():
                candidate = set_parameter(candidate, path, value)
            point = evaluate(candidate)
        except BeamoscError as err:
            last_error = err
            log.append({"phase": phase, "params": dict(params),
                        "objective": None, "feasible": False})
            return math.inf
        if not feasible_for(point, enabled):
            infeasible_candidates.append(point)
            log.append({"phase": phase, "params": dict(params),
                        "objective": extract(point), "feasible": False})
            return math.inf
        value = extract(point)
        log.append({"phase": phase, "params": dict(params),
                    "objective": value, "feasible": True})
        signed = sign * value
        if best is None or signed < best[0]:
            best = (signed, dict(params), point)
        return signed

    for combo in itertools.product(*grids):
        params = {axis.path: float(v) for axis, v in zip(axes, combo)}
        try_point("grid", params)

    if best is None:
        if not infeasible_candidates:
            assert last_error is not None
            raise last_error
        closest = min(
            infeasible_candidates,
            key=lambda p: sum(c.violation for c in p.constraints if c.name in enabled),
        )
        worst = max(
            (c for c in closest.constraints if c.name in enabled),
            key=lambda c: c.violation,
        )
        return OptimizeResult(
            objective=spec.objective,
            feasible=False,
            best=None,
            best_params=None,
            objective_value=None,
            evaluations=evaluations,
            most_violated=worst.name,
            log=tuple(log),
        )

    # Normalized box coordinates: u in [0,1] per axis, geometric for log axes.
    los = np.array([a.minimum for a in axes])
    his = np.array([a.maximum for a in axes])
    logscale = np.array([a.scale == "log" for a in axes])

    def to_params(u: np.ndarray) -> dict:
        vals = {}
        for i, axis in enumerate(axes):
            if los[i] == his[i]:
                vals[axis.path] = float(los[i])
            elif logscale[i]:
                vals[axis.path] = float(los[i] * (his[i] / los[i]) ** u[i])
            else:
                vals[axis.path] = float(los[i] + u[i] * (his[i] - los[i]))
        return vals

    def to_u(params: dict) -> np.ndarray:
        u = np.zeros(len(axes))
        for i, axis in enumerate(axes):
            v = params[axis.path]
            if los[i] == his[i]:
                u[i] = 0.0
            elif logscale[i]:
                u[i] = math.log(v / los[i]) / math.log(his[i] / los[i])
            else:
                u[i] = (v - los[i]) / (his[i] - los[i])
        return u

    def objective_u(u: np.ndarray) -> float:
        if np.any(u < 0.0) or np.any(u > 1.0):
            return math.inf
        return try_point("refine", to_params(u))

    dim = len(axes)
    step = 0.5 / max(len(g) - 1 for g in grids) if max(len(g) for g in grids) > 1 else 0.25
    u0 = to_u(best[1])
    simplex = [u0]
    for i in range(dim):
        v = u0.copy()
        v[i] = v[i] + step if v[i] + step <= 1.0 else v[i] - step
        simplex.append(v)
    fvals = [objective_u(u) for u in simplex]

    for _ in range(_NM_ITER_PER_DIM * dim):
        order = sorted(range(dim + 1), key=lambda i: fvals[i])
        simplex = [simplex[i] for i in order]
        fvals = [fvals[i] for i in order]
        spread = max(np.max(np.abs(s - simplex[0])) for s in simplex[1:])
        if spread < _NM_TOL:
            break
        centroid = np.mean(simplex[:-1], axis=0)
        worst_u, worst_f = simplex[-1], fvals[-1]
        refl = centroid + (centroid - worst_u)
        f_refl = objective_u(refl)
        if f_refl < fvals[0]:
            expd = centroid + 2.0 * (centroid - worst_u)
            f_expd = objective_u(expd)
            if f_expd < f_refl:
                simplex[-1], fvals[-1] = expd, f_expd
            else:
                simplex[-1], fvals[-1] = refl, f_refl
        elif f_refl < fvals[-2]:
            simplex[-1], fvals[-1] = refl, f_refl
        else:
            base = refl if f_refl < worst_f else worst_u
            contr = centroid + 0.5 * (base - centroid)
            f_contr = objective_u(contr)
            if f_contr < min(f_refl, worst_f):
                simplex[-1], fvals[-1] = contr, f_contr
            else:
                for i in range(1, dim + 1):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    fvals[i] = objective_u(simplex[i])

    signed, params, point = best
    return OptimizeResult(
        objective=spec.objective,
        feasible=True,
        best=point,
        best_params=params,
        objective_value=sign * signed,
        evaluations=evaluations,
        most_violated=None,
        log=tuple(log),
    )
