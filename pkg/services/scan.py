import logging
import math
from typing import Callable, List, Optional, Tuple

from scipy.optimize import bisect

from config import BISECTION_RTOL
from models import CriticalResult, PhysParams, SpectrumModel, SplittingPoint, SweepRow, SweepSpec, SweepTable
from services import analytic
from services.params import derive, ensure_valid
from utils.errors import InvalidRequest, NoSignChange, SpectraError, UnknownModel, UnknownParameter

SWEEP_PARAMETERS = ("theta", "B", "omega", "m")
CRITICAL_PARAMETERS = {"landau": ("theta",), "oscillator": ("B", "theta")}


def _spectrum_model(model: str) -> SpectrumModel:
    try:
        return SpectrumModel(model.replace("-", "_"))
    except ValueError:
        raise UnknownModel(f"Unknown model '{model}', expected one of {[m.value for m in SpectrumModel]}.")


def _well_posed(model: SpectrumModel, phys: PhysParams) -> bool:
    derived = derive(phys)
    if model == SpectrumModel.LANDAU_NC:
        return derived.well_posed_landau
    if model == SpectrumModel.OSCILLATOR_NC:
        return derived.well_posed_oscillator
    return True


def _row(model: SpectrumModel, spec: SweepSpec, value: float) -> SweepRow:
    phys = spec.base.model_copy(update={spec.parameter: value})
    derived = derive(phys)
    blank = [None] * len(spec.levels)
    if not _well_posed(model, phys):
        return SweepRow(param_value=value, well_posed=False, derived=derived, E_squared=blank, E_nonrel=list(blank))
    n1_max = max(level.n1 for level in spec.levels)
    n2_max = max(level.n2 for level in spec.levels)
    try:
        table = analytic.spectrum(model, phys, n1_max=n1_max, n2_max=n2_max, n_max=max(n1_max, n2_max),
                                  substitute_critical=True)
    except SpectraError as e:
        logging.info(f"Sweep point {spec.parameter}={value} skipped: {e}")
        return SweepRow(param_value=value, well_posed=False, derived=derived, E_squared=blank, E_nonrel=list(blank))

    by_key = {line.level.sort_key(): line for line in table.lines}
    found = [by_key.get(level.sort_key()) for level in spec.levels]
    e_squared = [line.E_squared if line else None for line in found]
    e_nonrel = [line.E_nonrel if line else None for line in found]

    splitting = None
    ground = [line for line in table.lines if (line.level.n1, line.level.n2) == (0, 0)]
    if len(ground) == 2:
        gaps = {line.level.sigma_z: line.E_squared for line in ground}
        splitting = gaps[1] - gaps[-1]
    return SweepRow(param_value=value, well_posed=True, derived=derived, E_squared=e_squared, E_nonrel=e_nonrel,
                    splitting=splitting)


def sweep(spec: SweepSpec) -> SweepTable:
    """
    Evaluates the analytic spectrum of ``spec.model`` at every grid value of ``spec.parameter``.
    Ill-posed points are kept as flagged rows with blank spectra, so the table always has one row per grid value.
    :param spec: Model, base parameters, swept parameter, grid and the levels to report.
    :return: SweepTable with rows in grid order.
    """
    model = _spectrum_model(spec.model)
    if spec.parameter not in SWEEP_PARAMETERS:
        raise UnknownParameter(f"Cannot sweep '{spec.parameter}', expected one of {list(SWEEP_PARAMETERS)}.")
    rows = [_row(model, spec, value) for value in spec.grid]
    flagged = sum(not row.well_posed for row in rows)
    if flagged:
        logging.info(f"Sweep over {spec.parameter}: {flagged} of {len(rows)} points flagged ill-posed")
    return SweepTable(spec=spec, rows=rows)


def linear_grid(start: float, stop: float, steps: int) -> List[float]:
    """Linear spacing inclusive of both endpoints; one step gives [start]."""
    if steps < 1:
        raise InvalidRequest(f"steps must be >= 1, got {steps}.")
    if steps == 1:
        return [start]
    return [start + (stop - start) * i / (steps - 1) for i in range(steps)]


def _lz_coefficient(family: str, phys: PhysParams) -> float:
    omega_c = phys.e * phys.B / (2 * phys.m)
    if family == "landau":
        return omega_c * (1 + phys.e * phys.B * phys.theta / 4)
    # (m_tilde / 2) varpi^2 theta + omega_c, with m_tilde varpi^2 = m (omega^2 + omega_c^2)
    return phys.m / 2 * (phys.omega ** 2 + omega_c ** 2) * phys.theta + omega_c


def _bracket(f: Callable[[float], float], seed: float, max_doublings: int = 200) -> Tuple[float, float]:
    """
    Expands geometrically around ``seed`` until f changes sign; the bracket nearest to the seed wins.
    """
    f_seed = f(seed)
    step = 1e-6 * max(abs(seed), 1.0)
    for _ in range(max_doublings):
        for other in (seed - step, seed + step):
            f_other = f(other)
            if math.isfinite(f_other) and f_other * f_seed < 0:
                return (other, seed) if other < seed else (seed, other)
        step *= 2
    raise NoSignChange(f"No sign change found within {step:.3e} of {seed}.")


def _root(f: Callable[[float], float], seed: float = 0.0) -> Tuple[float, Tuple[float, float]]:
    if f(seed) == 0:
        if f(seed - 1) == 0 and f(seed + 1) == 0:
            raise NoSignChange("Coefficient vanishes identically; there is no isolated critical value.")
        return seed, (seed, seed)
    lo, hi = _bracket(f, seed)
    root = bisect(f, lo, hi, xtol=1e-300, rtol=BISECTION_RTOL, maxiter=200)
    return float(root), (lo, hi)


def locate_critical(model: str, phys: PhysParams, parameter: Optional[str] = None) -> CriticalResult:
    """
    Root of the angular-momentum coefficient in ``parameter`` by bisection, reported next to the closed-form
    critical value. For the oscillator the two differ at second order in theta and both are kept.
    :param model: "landau" or "oscillator" (spectrum model ids such as landau_nc are accepted).
    :param phys: Base parameters; the located parameter's own value is ignored.
    :param parameter: "theta" for landau, "B" (default) or "theta" for oscillator.
    """
    family = model.replace("-", "_").split("_")[0]
    if family not in CRITICAL_PARAMETERS:
        raise UnknownModel(f"Unknown model '{model}', expected 'landau' or 'oscillator'.")
    parameter = parameter or CRITICAL_PARAMETERS[family][0]
    if parameter not in CRITICAL_PARAMETERS[family]:
        raise UnknownParameter(f"No critical {parameter} for {family}, expected one of {list(CRITICAL_PARAMETERS[family])}.")
    ensure_valid(phys)

    def coefficient(value: float) -> float:
        return _lz_coefficient(family, phys.model_copy(update={parameter: value}))

    notes = []
    closed_form = None
    try:
        if family == "landau":
            closed_form = analytic.critical_theta_landau(phys)
        elif parameter == "B":
            closed_form = analytic.critical_field_oscillator(phys)
        else:
            closed_form = analytic.critical_theta_oscillator(phys)
    except SpectraError as e:
        notes.append(f"no closed form: {e}")

    root, bracket = _root(coefficient)
    difference = None if closed_form is None else root - closed_form
    if family == "oscillator" and difference is not None:
        notes.append("closed form is first order in theta; the coefficient root keeps the omega_c^2 term")
    logging.info(f"Critical {parameter} for {family}: bisection={root!r}, closed form={closed_form!r}")
    return CriticalResult(model=family, parameter=parameter, closed_form=closed_form, bisection=root,
                          difference=difference, bracket=bracket, notes=notes)


def splitting_scan(model: SpectrumModel, phys: PhysParams, theta_grid: List[float]) -> List[SplittingPoint]:
    """Ground-level Zeeman gap E^2(sigma=+1) - E^2(sigma=-1) along a theta grid."""
    if not theta_grid:
        raise InvalidRequest("theta grid must not be empty.")
    if any(b <= a for a, b in zip(theta_grid, theta_grid[1:])):
        raise InvalidRequest("theta grid must be strictly ascending.")
    points = []
    for theta in theta_grid:
        table = analytic.spectrum(SpectrumModel(model), phys.model_copy(update={"theta": theta}), 0, 0, 0,
                                  substitute_critical=True)
        ground = analytic.zeeman_splitting(table)[0]
        points.append(SplittingPoint(theta=theta, gap=ground.gap))
    return points
