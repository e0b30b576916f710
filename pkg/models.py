from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator

from utils.errors import DimensionMismatch


class SpectrumModel(str, Enum):
    LANDAU_NC = "landau_nc"
    LANDAU_CRITICAL = "landau_critical"
    OSCILLATOR_COMMUTATIVE = "oscillator_commutative"
    OSCILLATOR_NC = "oscillator_nc"
    OSCILLATOR_CRITICAL = "oscillator_critical"


class HamiltonianModel(str, Enum):
    LANDAU_COMMUTATIVE = "landau_commutative"
    LANDAU_NC_EXPANDED = "landau_nc_expanded"
    LANDAU_NC_SHIFTED = "landau_nc_shifted"
    LANDAU_CRITICAL = "landau_critical"
    OSCILLATOR_COMMUTATIVE = "oscillator_commutative"
    OSCILLATOR_NC_EXPANDED = "oscillator_nc_expanded"
    OSCILLATOR_NC_SHIFTED = "oscillator_nc_shifted"
    OSCILLATOR_CRITICAL = "oscillator_critical"

    @property
    def family(self) -> str:
        return "landau" if self.value.startswith("landau") else "oscillator"

    @property
    def is_shifted(self) -> bool:
        return self.value.endswith("_shifted")

    @property
    def gauge(self) -> str:
        if self.family == "landau":
            return "A = (iBz/2, -iBz_bar/2)"
        return "A = (-iBz_bar/2, iBz/2)"


class ShiftOrder(str, Enum):
    EXACT = "exact"
    FIRST_ORDER = "first_order"


class PhysParams(BaseModel):
    """
    Physical inputs in natural units (hbar = c = 1). Construction never rejects values; ``services.params.validate``
    reports the violated invariants so callers can decide how to fail.
    """
    model_config = ConfigDict(frozen=True)

    m: float
    e: float
    B: float = 0.0
    omega: float = 0.0
    theta: float = 0.0
    s_z: float = 0.5


class DerivedParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    omega_c: float
    m_tilde: float
    omega_tilde: float
    B_tilde: float
    varpi_sq: float
    e_bar_offset: float
    well_posed_landau: bool
    well_posed_oscillator: bool


class LevelIndex(BaseModel):
    model_config = ConfigDict(frozen=True)

    n1: int = Field(ge=0)
    n2: int = Field(ge=0)
    sigma_z: int = 1

    @field_validator("sigma_z")
    @classmethod
    def check_sigma(cls, value: int) -> int:
        if value not in (1, -1):
            raise ValueError("sigma_z must be +1 or -1")
        return value

    @computed_field
    @property
    def m_l(self) -> int:
        return self.n1 - self.n2

    def sort_key(self) -> Tuple[int, int, int]:
        return self.n1, self.n2, self.sigma_z


class SpectrumLine(BaseModel):
    level: LevelIndex
    E_squared: float
    E: Optional[float] = None
    E_nonrel: float
    E_bar: float
    # literal non-relativistic alternate, only emitted for the NC oscillator
    E_nonrel_alt: Optional[float] = None


class SpectrumTable(BaseModel):
    model: SpectrumModel
    phys: PhysParams
    derived: DerivedParams
    lines: List[SpectrumLine]
    notes: List[str] = []

    def line(self, n1: int, n2: int, sigma_z: int) -> Optional[SpectrumLine]:
        for line in self.lines:
            if (line.level.n1, line.level.n2, line.level.sigma_z) == (n1, n2, sigma_z):
                return line
        return None


class SplittingGap(BaseModel):
    n1: int
    n2: int
    gap: float


class NonrelResidual(BaseModel):
    level: LevelIndex
    residual: float
    alt_residual: Optional[float] = None
    flagged: bool = False


class OperatorMatrix(BaseModel):
    """
    Dense complex matrix on the truncated two-mode basis |n_x, n_y>, row-major (index = n_x * N + n_y).
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    per_mode_cutoff: int
    l_ref: float
    entries: np.ndarray
    label: str = ""

    @property
    def dim(self) -> int:
        return self.per_mode_cutoff ** 2

    def _check(self, other: "OperatorMatrix"):
        if self.per_mode_cutoff != other.per_mode_cutoff or self.entries.shape != other.entries.shape:
            raise DimensionMismatch(f"Cannot combine '{self.label}' (N={self.per_mode_cutoff}) with "
                                    f"'{other.label}' (N={other.per_mode_cutoff}).")
        if self.l_ref != other.l_ref:
            raise DimensionMismatch(f"Cannot combine '{self.label}' (l_ref={self.l_ref}) with "
                                    f"'{other.label}' (l_ref={other.l_ref}).")

    def _with(self, entries: np.ndarray, label: str) -> "OperatorMatrix":
        return OperatorMatrix(per_mode_cutoff=self.per_mode_cutoff, l_ref=self.l_ref, entries=entries, label=label)

    def adjoint(self) -> "OperatorMatrix":
        return self._with(self.entries.conj().T, f"({self.label})^+")

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return self._with(self.entries @ other.entries, f"{self.label} {other.label}")

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return self._with(self.entries + other.entries, f"{self.label} + {other.label}")

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return self._with(self.entries - other.entries, f"{self.label} - {other.label}")

    def __mul__(self, scalar: complex) -> "OperatorMatrix":
        return self._with(scalar * self.entries, f"{scalar} {self.label}")

    __rmul__ = __mul__

    def __neg__(self) -> "OperatorMatrix":
        return self._with(-self.entries, f"-{self.label}")

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.entries))) if self.entries.size else 0.0

    def hermiticity_error(self) -> float:
        """Relative deviation max|M - M^+| / max|M| (0 for the zero matrix)."""
        scale = self.max_abs()
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(self.entries - self.entries.conj().T))) / scale


class StateVector(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    per_mode_cutoff: int
    amplitudes: np.ndarray
    label: Optional[Tuple[int, int, int]] = None

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


class VariantComparison(BaseModel):
    name: str
    formula: str
    predicted: List[float]
    residuals: List[float]
    max_residual: float


class LevelAssignment(BaseModel):
    level: LevelIndex
    sector: int
    radial: int
    numeric: float
    predicted: Optional[float] = None
    degenerate: bool = False


class ConvergenceResult(BaseModel):
    eigenvalues: List[float]
    slot_values: Dict[str, float]
    N_used: int
    converged: bool
    delta: float
    history: List[Tuple[int, float]] = []


class VerificationReport(BaseModel):
    model: HamiltonianModel
    phys: PhysParams
    shift_order: ShiftOrder
    l_ref: float
    per_mode_cutoff: int
    k: int
    tolerance: float
    eigenvalues: List[float]
    variants: List[VariantComparison]
    matched_variant: str = "none"
    matching_variants: List[str] = []
    assignments: List[LevelAssignment] = []
    converged: bool
    convergence_delta: float
    notes: List[str] = []


class OracleSplitting(BaseModel):
    model: HamiltonianModel
    numeric_gap: float
    analytic_gap: float
    difference: float
    spin_binding: str


class MonomialFit(BaseModel):
    p_z_p_z_bar: float
    z_z_bar: float
    L_z: float
    identity: float
    fit_residual: float


class GaugeComparison(BaseModel):
    pair: str
    theta: float
    per_mode_cutoff: int
    l_ref: float
    norm_difference_interior: float
    norm_difference_half_theta: float
    ratio: Optional[float] = None
    theta_order_estimate: Optional[float] = None
    first_order_consistent: bool
    monomial_fit: MonomialFit
    coefficient_difference: MonomialFit


class FockCheck(BaseModel):
    name: str
    residual: float
    passed: bool


class FockCheckResult(BaseModel):
    per_mode_cutoff: int
    margin: int
    theta: float
    threshold: float
    checks: List[FockCheck]
    notes: List[str] = []

    @computed_field
    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


class SweepSpec(BaseModel):
    model: str
    base: PhysParams
    parameter: str
    grid: List[float]
    levels: List[LevelIndex] = [LevelIndex(n1=0, n2=0, sigma_z=1), LevelIndex(n1=0, n2=0, sigma_z=-1)]

    @field_validator("grid")
    @classmethod
    def check_grid(cls, grid: List[float]) -> List[float]:
        if not grid:
            raise ValueError("grid must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("grid must be strictly ascending")
        return grid


class SweepRow(BaseModel):
    param_value: float
    well_posed: bool
    derived: DerivedParams
    E_squared: List[Optional[float]]
    E_nonrel: List[Optional[float]]
    splitting: Optional[float] = None


class SweepTable(BaseModel):
    spec: SweepSpec
    rows: List[SweepRow]


class SplittingPoint(BaseModel):
    theta: float
    gap: float


class CriticalResult(BaseModel):
    model: str
    parameter: str
    closed_form: Optional[float] = None
    bisection: float
    difference: Optional[float] = None
    bracket: Tuple[float, float]
    notes: List[str] = []


# request bodies
class SpectrumRequest(BaseModel):
    model: SpectrumModel
    phys: PhysParams
    n1_max: int = 5
    n2_max: int = 5
    n_max: int = 5
    substitute_critical: bool = False


class VerifyRequest(BaseModel):
    model: HamiltonianModel
    phys: PhysParams
    k: int = 6
    tol: float = 1e-6
    schedule: List[int] = [16, 24, 32, 40]
    l_ref: Optional[float] = None
    shift_order: ShiftOrder = ShiftOrder.FIRST_ORDER


class GaugeCompareRequest(BaseModel):
    pair: str = "landau"
    phys: PhysParams
    cutoff: int = 16
    l_ref: Optional[float] = None


class FockCheckRequest(BaseModel):
    cutoff: int = 24
    margin: Optional[int] = None
    theta: float = 0.0
    l_ref: float = 1.0
    phys: Optional[PhysParams] = None


class CriticalRequest(BaseModel):
    model: str
    phys: PhysParams
    parameter: Optional[str] = None


class SplittingScanRequest(BaseModel):
    model: SpectrumModel
    phys: PhysParams
    theta_grid: List[float]
