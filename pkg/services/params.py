import math
from typing import List

from models import DerivedParams, PhysParams
from utils.errors import InvalidParameters


def derive(phys: PhysParams) -> DerivedParams:
    """
    Computes the deformed quantities of both models. Never raises: singular points (m_tilde = 0) give NaN entries
    and false well-posedness flags.
    :param phys: The physical inputs.
    :return: DerivedParams with omega_c, m_tilde, omega_tilde, B_tilde, varpi^2 and the E_bar offset.
    """
    eb = phys.e * phys.B
    landau_factor = 1 + eb * phys.theta / 4
    mass_factor = 1 + eb * phys.theta / 2

    omega_c = eb / (2 * phys.m)
    m_tilde = phys.m * mass_factor
    B_tilde = phys.B / 2 * landau_factor
    if m_tilde != 0:
        omega_tilde = eb / (2 * m_tilde) * landau_factor
        varpi_sq = (phys.omega ** 2 + (eb / (2 * phys.m)) ** 2) / mass_factor
    else:
        omega_tilde = math.nan
        varpi_sq = math.nan

    return DerivedParams(
        omega_c=omega_c,
        m_tilde=m_tilde,
        omega_tilde=omega_tilde,
        B_tilde=B_tilde,
        varpi_sq=varpi_sq,
        e_bar_offset=omega_c,
        well_posed_landau=bool(m_tilde > 0 and omega_tilde ** 2 > 0),
        well_posed_oscillator=bool(m_tilde > 0 and varpi_sq > 0),
    )


def validate(phys: PhysParams) -> List[str]:
    violations = []
    if not phys.m > 0:
        violations.append("m must be > 0")
    if not phys.e > 0:
        violations.append("e must be > 0")
    if not phys.omega >= 0:
        violations.append("omega must be >= 0")
    if phys.s_z not in (0.5, -0.5):
        violations.append("s_z must be ±1/2")
    for name in ("B", "theta"):
        if not math.isfinite(getattr(phys, name)):
            violations.append(f"{name} must be finite")
    return violations


def ensure_valid(phys: PhysParams):
    violations = validate(phys)
    if violations:
        raise InvalidParameters("; ".join(violations))


def reference_length(phys: PhysParams) -> float:
    """Default auxiliary oscillator length 1/sqrt(m * max(omega, omega_c, 1))."""
    omega_c = abs(phys.e * phys.B / (2 * phys.m))
    return 1 / math.sqrt(phys.m * max(phys.omega, omega_c, 1.0))


def sigma_of(phys: PhysParams) -> int:
    return 1 if phys.s_z > 0 else -1
