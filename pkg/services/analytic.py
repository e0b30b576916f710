import logging
import math
from collections import defaultdict
from typing import Callable, List, Optional

from models import LevelIndex, NonrelResidual, PhysParams, SpectrumLine, SpectrumModel, SpectrumTable, SplittingGap
from services.params import derive, ensure_valid
from utils.errors import IllPosed, InvalidField, InvalidRequest, MissingPartner, NotAtCriticalPoint


def e_bar_of(phys: PhysParams, e_squared: float) -> float:
    return (e_squared - phys.m ** 2 + phys.e * phys.B) / (2 * phys.m)


def e_squared_of(phys: PhysParams, e_bar: float) -> float:
    return 2 * phys.m * e_bar + phys.m ** 2 - phys.e * phys.B


# Closed forms. ``sigma`` is the +-1 that multiplies the spin term; which s_z it belongs to is decided by the caller.

def landau_nc_e_squared(phys: PhysParams, n1: int, n2: int, sigma: int) -> float:
    d = derive(phys)
    eb_tilde = phys.e * d.B_tilde
    return (phys.m ** 2 + 2 * phys.m * eb_tilde / d.m_tilde * (n2 + n1 + 1) + 2 * eb_tilde * (n2 - n1)
            - phys.e * phys.B + sigma * (phys.e * phys.B) ** 2 * phys.theta / 4)


def landau_ladder_e_bar(phys: PhysParams, n1: int, n2: int, sigma: int) -> float:
    """Ladder-operator form with the explicit eB~/m constant and +s_z spin term."""
    d = derive(phys)
    eb_tilde = phys.e * d.B_tilde
    return (eb_tilde / d.m_tilde * (n2 + n1 + 1) + eb_tilde / phys.m + eb_tilde / phys.m * (n2 - n1)
            + sigma / 2 * (phys.e * phys.B) ** 2 * phys.theta / (4 * phys.m))


def landau_critical_e_squared(phys: PhysParams, n: int, sigma: int) -> float:
    return 2 * phys.e * phys.B * (n + sigma / 2) + phys.m ** 2


def oscillator_commutative_e_squared(phys: PhysParams, n1: int, n2: int) -> float:
    omega_c = phys.e * phys.B / (2 * phys.m)
    return (2 * phys.m * math.sqrt(phys.omega ** 2 + omega_c ** 2) * (n1 + n2 + 1)
            + phys.e * phys.B * (n1 - n2 - 1) + phys.m ** 2)


def oscillator_lz_coefficient(phys: PhysParams, mass: str = "m") -> float:
    """
    Angular-momentum coefficient (M/2) varpi^2 theta + omega_c with M = m or m_tilde.
    """
    d = derive(phys)
    weight = phys.m if mass == "m" else d.m_tilde
    return weight / 2 * d.varpi_sq * phys.theta + d.omega_c


def oscillator_nc_e_squared(phys: PhysParams, n1: int, n2: int, sigma: int, mass: str = "m") -> float:
    d = derive(phys)
    varpi = math.sqrt(d.varpi_sq)
    return (phys.m ** 2 - phys.e * phys.B + 2 * phys.m * varpi * (n1 + n2 + 1)
            - 2 * phys.m * oscillator_lz_coefficient(phys, mass) * (n1 - n2)
            + sigma * phys.m ** 2 * d.varpi_sq * phys.theta)


def oscillator_nc_nonrel_literal(phys: PhysParams, n1: int, n2: int, sigma: int) -> float:
    """Non-relativistic form with the varpi/m leading coefficient, kept as a flagged alternate."""
    d = derive(phys)
    varpi = math.sqrt(d.varpi_sq)
    return (varpi / phys.m * (n1 + n2 + 1)
            - (phys.m * d.varpi_sq * phys.theta + 2 * d.omega_c) / (2 * phys.m) * (n1 - n2)
            - phys.e * phys.B / (2 * phys.m) + sigma * phys.m / 2 * d.varpi_sq * phys.theta)


def oscillator_critical_e_squared(phys: PhysParams, n: int, sigma: int) -> float:
    stiffness = phys.omega ** 2 + (phys.e * phys.B / (2 * phys.m)) ** 2
    return (2 * phys.m * math.sqrt(stiffness) * (2 * n + 1) - sigma * 2 * stiffness / (phys.m * phys.omega ** 2) * phys.B
            - phys.e * phys.B + phys.m ** 2)


def critical_theta_landau(phys: PhysParams) -> float:
    eb = phys.e * phys.B
    if eb == 0:
        raise InvalidField("No critical theta: eB = 0.")
    return -4 / eb


def critical_field_oscillator(phys: PhysParams) -> float:
    if phys.e == 0:
        raise InvalidField("No critical field: e = 0.")
    return -(phys.m * phys.omega) ** 2 * phys.theta / (2 * phys.e)


def critical_theta_oscillator(phys: PhysParams) -> float:
    """Critical field relation solved for theta: theta = -2eB/(m^2 omega^2)."""
    if phys.omega == 0:
        raise InvalidField("No critical theta: omega = 0.")
    return -2 * phys.e * phys.B / (phys.m * phys.omega) ** 2


def _make_line(phys: PhysParams, level: LevelIndex, e_squared: float, e_nonrel_alt: Optional[float] = None) -> SpectrumLine:
    return SpectrumLine(
        level=level,
        E_squared=e_squared,
        E=math.sqrt(e_squared) if e_squared >= 0 else None,
        E_nonrel=(e_squared - phys.m ** 2) / (2 * phys.m),
        E_bar=e_bar_of(phys, e_squared),
        E_nonrel_alt=e_nonrel_alt,
    )


def _make_table(model: SpectrumModel, phys: PhysParams, lines: List[SpectrumLine], notes: List[str] = None) -> SpectrumTable:
    lines = sorted(lines, key=lambda line: (line.E_squared, *line.level.sort_key()))
    return SpectrumTable(model=model, phys=phys, derived=derive(phys), lines=lines, notes=notes or [])


def _check_bounds(**bounds: int):
    for name, value in bounds.items():
        if value < 0:
            raise InvalidRequest(f"{name} must be >= 0, got {value}.")


def _grid(phys: PhysParams, n1_max: int, n2_max: int, e_squared: Callable[[int, int, int], float],
          alt: Callable[[int, int, int], float] = None) -> List[SpectrumLine]:
    lines = []
    for n1 in range(n1_max + 1):
        for n2 in range(n2_max + 1):
            for sigma in (1, -1):
                level = LevelIndex(n1=n1, n2=n2, sigma_z=sigma)
                lines.append(_make_line(phys, level, e_squared(n1, n2, sigma), alt(n1, n2, sigma) if alt else None))
    return lines


def landau_nc_levels(phys: PhysParams, n1_max: int = 5, n2_max: int = 5) -> SpectrumTable:
    ensure_valid(phys)
    _check_bounds(n1_max=n1_max, n2_max=n2_max)
    derived = derive(phys)
    if not derived.well_posed_landau:
        raise IllPosed(f"Landau spectrum is ill-posed: m_tilde={derived.m_tilde}, omega_tilde={derived.omega_tilde}.")
    lines = _grid(phys, n1_max, n2_max, lambda n1, n2, s: landau_nc_e_squared(phys, n1, n2, s))
    return _make_table(SpectrumModel.LANDAU_NC, phys, lines)


def landau_critical_levels(phys: PhysParams, n_max: int = 5) -> SpectrumTable:
    ensure_valid(phys)
    _check_bounds(n_max=n_max)
    if phys.e * phys.B <= 0:
        raise InvalidField(f"Critical Landau spectrum needs eB > 0, got eB={phys.e * phys.B}.")
    theta_c = critical_theta_landau(phys)
    critical = phys.model_copy(update={"theta": theta_c})
    logging.info(f"Landau critical point substituted: theta_c={theta_c}")
    lines = [_make_line(critical, LevelIndex(n1=0, n2=n, sigma_z=sigma), landau_critical_e_squared(critical, n, sigma))
             for n in range(n_max + 1) for sigma in (1, -1)]
    return _make_table(SpectrumModel.LANDAU_CRITICAL, critical, lines, [f"theta replaced by theta_c = {theta_c!r}"])


def oscillator_commutative_levels(phys: PhysParams, n1_max: int = 5, n2_max: int = 5) -> SpectrumTable:
    ensure_valid(phys)
    _check_bounds(n1_max=n1_max, n2_max=n2_max)
    if phys.omega == 0 and phys.e * phys.B <= 0:
        raise InvalidField("Oscillator spectrum needs omega > 0 or eB > 0.")
    lines = _grid(phys, n1_max, n2_max, lambda n1, n2, s: oscillator_commutative_e_squared(phys, n1, n2))
    return _make_table(SpectrumModel.OSCILLATOR_COMMUTATIVE, phys, lines)


def oscillator_nc_levels(phys: PhysParams, n1_max: int = 5, n2_max: int = 5) -> SpectrumTable:
    ensure_valid(phys)
    _check_bounds(n1_max=n1_max, n2_max=n2_max)
    derived = derive(phys)
    if not derived.well_posed_oscillator:
        raise IllPosed(f"NC oscillator is ill-posed: m_tilde={derived.m_tilde}, varpi^2={derived.varpi_sq}.")
    lines = _grid(phys, n1_max, n2_max,
                  lambda n1, n2, s: oscillator_nc_e_squared(phys, n1, n2, s),
                  lambda n1, n2, s: oscillator_nc_nonrel_literal(phys, n1, n2, s))
    return _make_table(SpectrumModel.OSCILLATOR_NC, phys, lines,
                       ["E_nonrel_alt is the literal varpi/m variant; it disagrees with (E^2 - m^2)/(2m) for m != 1"])


def oscillator_critical_levels(phys: PhysParams, n_max: int = 5, substitute: bool = False) -> SpectrumTable:
    ensure_valid(phys)
    _check_bounds(n_max=n_max)
    if phys.omega == 0:
        raise InvalidField("Critical oscillator spectrum needs omega > 0.")
    b_c = critical_field_oscillator(phys)
    notes = []
    if substitute:
        phys = phys.model_copy(update={"B": b_c})
        notes.append(f"B replaced by B_c = {b_c!r}")
    elif not math.isclose(phys.B, b_c, rel_tol=1e-9, abs_tol=1e-300):
        raise NotAtCriticalPoint(f"B={phys.B} is not the critical field B_c={b_c}; pass substitute to use B_c.")
    lines = [_make_line(phys, LevelIndex(n1=n, n2=n, sigma_z=sigma), oscillator_critical_e_squared(phys, n, sigma))
             for n in range(n_max + 1) for sigma in (1, -1)]
    return _make_table(SpectrumModel.OSCILLATOR_CRITICAL, phys, lines, notes)


def spectrum(model: SpectrumModel, phys: PhysParams, n1_max: int = 5, n2_max: int = 5, n_max: int = 5,
             substitute_critical: bool = False) -> SpectrumTable:
    if model == SpectrumModel.LANDAU_NC:
        return landau_nc_levels(phys, n1_max, n2_max)
    if model == SpectrumModel.LANDAU_CRITICAL:
        return landau_critical_levels(phys, n_max)
    if model == SpectrumModel.OSCILLATOR_COMMUTATIVE:
        return oscillator_commutative_levels(phys, n1_max, n2_max)
    if model == SpectrumModel.OSCILLATOR_NC:
        return oscillator_nc_levels(phys, n1_max, n2_max)
    return oscillator_critical_levels(phys, n_max, substitute_critical)


def zeeman_splitting(table: SpectrumTable) -> List[SplittingGap]:
    towers = defaultdict(dict)
    for line in table.lines:
        towers[(line.level.n1, line.level.n2)][line.level.sigma_z] = line.E_squared
    gaps = []
    for (n1, n2), tower in sorted(towers.items()):
        if len(tower) != 2:
            raise MissingPartner(f"Level ({n1}, {n2}) has only sigma_z={list(tower)[0]:+d}.")
        gaps.append(SplittingGap(n1=n1, n2=n2, gap=tower[1] - tower[-1]))
    return gaps


def nonrel_consistency(table: SpectrumTable) -> List[NonrelResidual]:
    m = table.phys.m
    residuals = []
    for line in table.lines:
        reference = (line.E_squared - m ** 2) / (2 * m)
        alt_residual = None if line.E_nonrel_alt is None else line.E_nonrel_alt - reference
        flagged = alt_residual is not None and abs(alt_residual) > 2 * math.ulp(max(abs(reference), 1.0))
        residuals.append(NonrelResidual(level=line.level, residual=line.E_nonrel - reference,
                                        alt_residual=alt_residual, flagged=flagged))
    return residuals
