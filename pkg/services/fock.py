import logging
import math
from functools import cached_property, lru_cache
from typing import Dict, Optional

import numpy as np
import scipy.linalg

from config import FOCK_CHECK_THRESHOLD
from models import FockCheck, FockCheckResult, OperatorMatrix, PhysParams, ShiftOrder, StateVector
from services.params import derive
from utils.errors import CutoffTooSmall, DimensionMismatch, IllPosed, InvalidField, InvalidMargin, InvalidScale

FACTORIAL_CAP = 40


def ladder(N: int) -> np.ndarray:
    """
    Single-mode annihilation operator truncated to N levels: a[n-1, n] = sqrt(n).
    :param N: Number of retained levels.
    :return: N x N real matrix.
    """
    if N < 2:
        raise CutoffTooSmall(f"Ladder needs N >= 2, got {N}.")
    return np.diag(np.sqrt(np.arange(1, N, dtype=float)), 1)


def embed_two_modes(op: np.ndarray, mode: str, N: int, l_ref: float = 1.0, label: str = "") -> OperatorMatrix:
    """
    Embeds a single-mode operator on mode x (op (x) I) or mode y (I (x) op); basis index = n_x * N + n_y.
    """
    if op.shape != (N, N):
        raise DimensionMismatch(f"Expected a {N}x{N} single-mode operator, got {op.shape}.")
    identity = np.eye(N)
    if mode == "x":
        entries = np.kron(op, identity)
    elif mode == "y":
        entries = np.kron(identity, op)
    else:
        raise DimensionMismatch(f"Unknown mode '{mode}', expected 'x' or 'y'.")
    return OperatorMatrix(per_mode_cutoff=N, l_ref=l_ref, entries=entries.astype(complex), label=label or f"op_{mode}")


def mode_ladders(N: int, l_ref: float = 1.0) -> Dict[str, OperatorMatrix]:
    a = ladder(N)
    return {"a_x": embed_two_modes(a, "x", N, l_ref, "a_x"), "a_y": embed_two_modes(a, "y", N, l_ref, "a_y")}


def identity(N: int, l_ref: float = 1.0) -> OperatorMatrix:
    return OperatorMatrix(per_mode_cutoff=N, l_ref=l_ref, entries=np.eye(N * N, dtype=complex), label="I")


def position_momentum(N: int, l_ref: float) -> Dict[str, OperatorMatrix]:
    if not l_ref > 0:
        raise InvalidScale(f"l_ref must be > 0, got {l_ref}.")
    ladders = mode_ladders(N, l_ref)
    quadratures = {}
    for axis in ("x", "y"):
        a = ladders[f"a_{axis}"]
        a_dag = a.adjoint()
        quadratures[axis] = (l_ref / math.sqrt(2)) * (a + a_dag)
        quadratures[f"p_{axis}"] = (1j / (l_ref * math.sqrt(2))) * (a_dag - a)
    return {name: op.model_copy(update={"label": name}) for name, op in quadratures.items()}


def _same_basis(*ops: OperatorMatrix):
    first = ops[0]
    for op in ops[1:]:
        if op.per_mode_cutoff != first.per_mode_cutoff or op.l_ref != first.l_ref:
            raise DimensionMismatch(f"'{op.label}' and '{first.label}' live on different truncated bases.")


def complex_coords(quadratures: Dict[str, OperatorMatrix]) -> Dict[str, OperatorMatrix]:
    """
    z = x + iy, z_bar = x - iy, p_z = (p_x - i p_y)/2, p_z_bar = (p_x + i p_y)/2.
    """
    x, y, p_x, p_y = (quadratures[name] for name in ("x", "y", "p_x", "p_y"))
    _same_basis(x, y, p_x, p_y)
    coords = {
        "z": x + 1j * y,
        "z_bar": x - 1j * y,
        "p_z": 0.5 * (p_x - 1j * p_y),
        "p_z_bar": 0.5 * (p_x + 1j * p_y),
    }
    return {name: op.model_copy(update={"label": name}) for name, op in coords.items()}


def angular_momentum(coords: Dict[str, OperatorMatrix]) -> OperatorMatrix:
    """L_z = i (z p_z - z_bar p_z_bar)."""
    z, z_bar, p_z, p_z_bar = (coords[name] for name in ("z", "z_bar", "p_z", "p_z_bar"))
    _same_basis(z, z_bar, p_z, p_z_bar)
    return (1j * (z @ p_z - z_bar @ p_z_bar)).model_copy(update={"label": "L_z"})


def bopp_shift(coords: Dict[str, OperatorMatrix], theta: float,
               order: ShiftOrder = ShiftOrder.EXACT) -> Dict[str, OperatorMatrix]:
    """
    z_hat = z + i theta p_z_bar, z_bar_hat = z_bar - i theta p_z. The shift is the same for both orders; ``order``
    only tags the result for Hamiltonian assembly.
    """
    z, z_bar, p_z, p_z_bar = (coords[name] for name in ("z", "z_bar", "p_z", "p_z_bar"))
    _same_basis(z, z_bar, p_z, p_z_bar)
    tag = ShiftOrder(order).value
    return {
        "z_hat": (z + (1j * theta) * p_z_bar).model_copy(update={"label": f"z_hat[{tag}]"}),
        "z_bar_hat": (z_bar - (1j * theta) * p_z).model_copy(update={"label": f"z_bar_hat[{tag}]"}),
    }


def commutator(A: OperatorMatrix, B: OperatorMatrix) -> OperatorMatrix:
    return (A @ B - B @ A).model_copy(update={"label": f"[{A.label}, {B.label}]"})


def interior_projector(N: int, margin: int, l_ref: float = 1.0) -> OperatorMatrix:
    if not 0 < margin < N:
        raise InvalidMargin(f"Margin must satisfy 0 < margin < N={N}, got {margin}.")
    keep = (np.arange(N) < N - margin).astype(float)
    diagonal = np.kron(keep, keep)
    return OperatorMatrix(per_mode_cutoff=N, l_ref=l_ref, entries=np.diag(diagonal).astype(complex), label="P_interior")


def default_margin(N: int) -> int:
    return math.ceil(N / 5)


def shell_indices(N: int, max_quanta: Optional[int] = None) -> np.ndarray:
    """
    Basis indices of |n_x, n_y> with n_x + n_y <= max_quanta (default N - 2). Products of two first-order
    operators are exact on these states, and rotations keep complete shells invariant.
    """
    if max_quanta is None:
        max_quanta = N - 2
    n_x, n_y = np.divmod(np.arange(N * N), N)
    return np.flatnonzero(n_x + n_y <= max_quanta)


def shell_projector(N: int, max_quanta: Optional[int] = None, l_ref: float = 1.0) -> OperatorMatrix:
    diagonal = np.zeros(N * N)
    diagonal[shell_indices(N, max_quanta)] = 1.0
    return OperatorMatrix(per_mode_cutoff=N, l_ref=l_ref, entries=np.diag(diagonal).astype(complex), label="P_shell")


def compress(op: OperatorMatrix, indices: np.ndarray) -> np.ndarray:
    return op.entries[np.ix_(indices, indices)]


class FockSpace:
    """
    Cached operator set for one (cutoff, l_ref) pair: coordinates, angular momentum and the invariant monomials
    p_z p_z_bar and z z_bar every quadratic Hamiltonian is assembled from.
    """

    def __init__(self, N: int, l_ref: float):
        if N < 2:
            raise CutoffTooSmall(f"Fock space needs N >= 2, got {N}.")
        self.N = N
        self.l_ref = l_ref
        self.coords = complex_coords(position_momentum(N, l_ref))
        self.l_z = angular_momentum(self.coords)
        self.kinetic = (self.coords["p_z"] @ self.coords["p_z_bar"]).model_copy(update={"label": "p_z p_z_bar"})
        self.radial = (self.coords["z"] @ self.coords["z_bar"]).model_copy(update={"label": "z z_bar"})
        self.shell = shell_indices(N)

    def quadratic(self, kinetic: float, radial: float, rotation: float, constant: float, label: str = "H") -> OperatorMatrix:
        """kinetic * p_z p_z_bar + radial * z z_bar - rotation * L_z + constant."""
        entries = (kinetic * self.kinetic.entries + radial * self.radial.entries - rotation * self.l_z.entries
                   + constant * np.eye(self.N * self.N))
        return OperatorMatrix(per_mode_cutoff=self.N, l_ref=self.l_ref, entries=entries, label=label)

    @cached_property
    def l_z_sectors(self) -> Dict[int, np.ndarray]:
        """
        Orthonormal eigenvectors of L_z on the shell subspace, grouped by their integer eigenvalue.
        """
        values, vectors = scipy.linalg.eigh(compress(self.l_z, self.shell))
        sectors = np.rint(values).astype(int)
        drift = float(np.max(np.abs(values - sectors))) if values.size else 0.0
        if drift > 1e-8:
            logging.warning(f"L_z eigenvalues deviate from integers by {drift:.3e} at N={self.N}")
        return {int(ell): vectors[:, sectors == ell] for ell in np.unique(sectors)}


@lru_cache(maxsize=1)
def fock_space(N: int, l_ref: float) -> FockSpace:
    logging.info(f"Building Fock space N={N}, l_ref={l_ref}")
    return FockSpace(N, l_ref)


def model_ladders(phys: PhysParams, model: str, coords: Dict[str, OperatorMatrix]) -> Dict[str, OperatorMatrix]:
    """
    Ladder pair diagonalizing the quadratic NC Hamiltonians:
    a = (2i p_z + k z_bar) / (2 sqrt(k)), b = (2i p_z_bar + k z) / (2 sqrt(k)),
    with k = e B_tilde (landau) or m_tilde varpi (oscillator).
    """
    derived = derive(phys)
    if model == "landau":
        stiffness = phys.e * derived.B_tilde
    elif model == "oscillator":
        stiffness = derived.m_tilde * math.sqrt(derived.varpi_sq) if derived.varpi_sq > 0 else math.nan
    else:
        raise IllPosed(f"No ladder pair for model '{model}'.")
    if not stiffness > 0:
        raise IllPosed(f"Ladder operators need a positive stiffness, got {stiffness} for {model}.")
    z, z_bar, p_z, p_z_bar = (coords[name] for name in ("z", "z_bar", "p_z", "p_z_bar"))
    norm = 1 / (2 * math.sqrt(stiffness))
    a = norm * (2j * p_z + stiffness * z_bar)
    b = norm * (2j * p_z_bar + stiffness * z)
    return {"a": a.model_copy(update={"label": "a"}), "b": b.model_copy(update={"label": "b"})}


def build_number_state(N: int, n1: int, n2: int, ladder_pair: Dict[str, OperatorMatrix],
                       sigma_z: int = 1) -> StateVector:
    """
    Normalized (a^+)^n1 (b^+)^n2 |0> / sqrt(n1! n2!). The vacuum is the lowest eigenvector of a^+ a + b^+ b on the
    exactly represented shells, phase-fixed so its largest component is real and positive.
    """
    if n1 < 0 or n2 < 0 or n1 + n2 >= N - 1:
        raise CutoffTooSmall(f"State ({n1}, {n2}) is not representable with N={N}.")
    if n1 + n2 > FACTORIAL_CAP:
        raise CutoffTooSmall(f"n1 + n2 = {n1 + n2} exceeds the factorial cap {FACTORIAL_CAP}.")
    a, b = ladder_pair["a"], ladder_pair["b"]
    if a.per_mode_cutoff != N or b.per_mode_cutoff != N:
        raise DimensionMismatch(f"Ladders are built for N={a.per_mode_cutoff}, requested N={N}.")

    shell = shell_indices(N)
    number = a.adjoint() @ a + b.adjoint() @ b
    _, vectors = scipy.linalg.eigh(compress(number, shell), subset_by_index=[0, 0])
    vacuum = np.zeros(N * N, dtype=complex)
    vacuum[shell] = vectors[:, 0]
    pivot = vacuum[np.argmax(np.abs(vacuum))]
    vacuum *= abs(pivot) / pivot

    state = vacuum
    a_dag, b_dag = a.adjoint().entries, b.adjoint().entries
    factorial = 1.0
    for count in range(1, n2 + 1):
        state = b_dag @ state
        factorial *= count
    for count in range(1, n1 + 1):
        state = a_dag @ state
        factorial *= count
    state = state / math.sqrt(factorial)
    return StateVector(per_mode_cutoff=N, amplitudes=state, label=(n1, n2, sigma_z))


def algebra_checks(N: int, theta: float = 0.0, margin: Optional[int] = None, l_ref: float = 1.0,
                   phys: Optional[PhysParams] = None, threshold: float = FOCK_CHECK_THRESHOLD) -> FockCheckResult:
    """
    Runs the operator-algebra suite on the interior of an N-level truncation.
    :param N: Per-mode cutoff.
    :param theta: Non-commutativity used for the Bopp-shifted coordinates.
    :param margin: Levels excluded at the top of each mode; None uses ceil(N/5), 0 disables the projection.
    :param l_ref: Reference length of the auxiliary oscillator.
    :param phys: When given, the NC Landau ladder pair is checked as well; eB_tilde must be positive.
    :param threshold: Maximum residual accepted by each check.
    :return: FockCheckResult with one residual per check.
    """
    if margin is None:
        margin = default_margin(N)
    if margin == 0:
        interior = np.arange(N * N)
    else:
        interior = np.flatnonzero(np.diag(interior_projector(N, margin, l_ref).entries).real > 0.5)
    unit = identity(N, l_ref)

    def projected(op: OperatorMatrix) -> float:
        return float(np.max(np.abs(compress(op, interior))))

    ladders = mode_ladders(N, l_ref)
    quadratures = position_momentum(N, l_ref)
    coords = complex_coords(quadratures)
    shifted = bopp_shift(coords, theta)
    shifted_coords = {**coords, "z": shifted["z_hat"], "z_bar": shifted["z_bar_hat"]}
    x, y, p_x, p_y = (quadratures[name] for name in ("x", "y", "p_x", "p_y"))

    residuals = {
        "[a,a+]=I": projected(commutator(ladders["a_x"], ladders["a_x"].adjoint()) - unit),
        "[b,b+]=I": projected(commutator(ladders["a_y"], ladders["a_y"].adjoint()) - unit),
        "[z_hat,z_bar_hat]=2theta": projected(commutator(shifted["z_hat"], shifted["z_bar_hat"]) - (2 * theta) * unit),
        "L_z dual form": (angular_momentum(coords) - (x @ p_y - y @ p_x)).max_abs(),
        "shifted L_z dual form": (angular_momentum(shifted_coords) - (x @ p_y - y @ p_x)
                                  + (2 * theta) * (coords["p_z"] @ coords["p_z_bar"])).max_abs(),
        "adjoint pairing": max((coords["z_bar"] - coords["z"].adjoint()).max_abs(),
                               (coords["p_z_bar"] - coords["p_z"].adjoint()).max_abs(),
                               (shifted["z_bar_hat"] - shifted["z_hat"].adjoint()).max_abs()),
    }
    if phys is not None:
        if not phys.e * derive(phys).B_tilde > 0:
            raise InvalidField(f"Landau ladder checks need eB_tilde > 0, got e={phys.e!r}, B={phys.B!r}, "
                               f"theta={phys.theta!r}.")
        pair = model_ladders(phys, "landau", coords)
        a, b = pair["a"], pair["b"]
        residuals["landau [a,a+]=I"] = projected(commutator(a, a.adjoint()) - unit)
        residuals["landau [b,b+]=I"] = projected(commutator(b, b.adjoint()) - unit)
        residuals["landau [a,b]=0"] = projected(commutator(a, b))
        residuals["landau [a,b+]=0"] = projected(commutator(a, b.adjoint()))

    checks = [FockCheck(name=name, residual=value, passed=value < threshold) for name, value in residuals.items()]
    for check in checks:
        if not check.passed:
            logging.warning(f"Algebra check '{check.name}' failed with residual {check.residual:.3e}")
    notes = []
    if margin == 0:
        notes.append(f"margin 0 keeps the truncation corner, where [a,a+] - I has the entry -{N}, "
                     f"so that residual is {N}")
    return FockCheckResult(per_mode_cutoff=N, margin=margin, theta=theta, threshold=threshold, checks=checks,
                           notes=notes)
