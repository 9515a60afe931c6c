"""Dense Hermitian operator core.

Builders for the stock generators, exact spectral decomposition, operator
exponentials evaluated through the eigensystem, and the quadratic-form
statistics (expectation value, uncertainty) everything else in the package
is built from.

All generators handled here are constant, dense and of desk scale
(dim <= 512), so exponentials are computed exactly as ``V exp(z L) V*``
instead of by scaling-and-squaring.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import NATURAL, Constants

HERMITICITY_RTOL = 1e-12
RECONSTRUCTION_RTOL = 1e-10
ORTHONORMALITY_ATOL = 1e-12
UNIT_LABELS = ("energy", "entropy", "dimensionless")

# exp() overflows double precision just above this exponent
_MAX_EXPONENT = 709.0
_TINY = np.finfo(float).tiny

__all__ = [
    "HERMITICITY_RTOL",
    "UNIT_LABELS",
    "HermitianOperator",
    "SpectralDecomposition",
    "StateVector",
    "apply_exponential",
    "build_hamiltonian",
    "expectation",
    "spectral_decompose",
    "uncertainty",
]


class StateVector:
    """Complex amplitude vector, immutable after construction."""

    __slots__ = ("_amplitudes",)

    def __init__(self, amplitudes):
        arr = np.array(amplitudes, dtype=complex)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("amplitudes must form a nonempty 1-D sequence")
        if not (np.all(np.isfinite(arr.real)) and np.all(np.isfinite(arr.imag))):
            raise ValueError("amplitudes must be finite")
        arr.setflags(write=False)
        self._amplitudes = arr

    @property
    def dim(self) -> int:
        return self._amplitudes.size

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amplitudes

    def norm(self) -> float:
        return float(np.linalg.norm(self._amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self._amplitudes / n)

    def __repr__(self) -> str:
        return f"StateVector(dim={self.dim}, norm={self.norm():.6g})"


class HermitianOperator:
    """Immutable dense self-adjoint matrix carrying a unit label.

    Entries that deviate from their conjugate transpose by more than
    ``HERMITICITY_RTOL`` (relative Frobenius norm) are rejected rather than
    symmetrized, so construction bugs surface at the boundary instead of
    being averaged away.
    """

    __slots__ = ("_entries", "_unit", "_decomposition")

    def __init__(self, entries, unit: str = "dimensionless"):
        arr = np.array(entries, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ValueError(f"operator entries must form a square matrix, got shape {arr.shape}")
        if not (np.all(np.isfinite(arr.real)) and np.all(np.isfinite(arr.imag))):
            raise ValueError("operator entries must be finite")
        defect = np.linalg.norm(arr - arr.conj().T)
        if defect > HERMITICITY_RTOL * max(np.linalg.norm(arr), _TINY):
            raise ValueError(
                f"matrix is not Hermitian within relative tolerance {HERMITICITY_RTOL:g} "
                f"(defect {defect:.3e})"
            )
        if unit not in UNIT_LABELS:
            raise ValueError(f"unit must be one of {UNIT_LABELS}, got {unit!r}")
        arr.setflags(write=False)
        self._entries = arr
        self._unit = unit
        self._decomposition = None

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def unit(self) -> str:
        return self._unit

    def norm(self) -> float:
        """Frobenius norm of the entries."""
        return float(np.linalg.norm(self._entries))

    def scaled(self, factor: float, unit: str | None = None) -> "HermitianOperator":
        """Multiply by a real scalar (keeps self-adjointness exactly)."""
        if not np.isfinite(factor) or np.iscomplexobj(np.asarray(factor)):
            raise ValueError("scale factor must be a finite real number")
        return HermitianOperator(self._entries * float(factor), unit or self._unit)

    def shifted(self, offset: float) -> "HermitianOperator":
        """Add ``offset`` times identity."""
        if not np.isfinite(offset):
            raise ValueError("offset must be finite")
        return HermitianOperator(
            self._entries + float(offset) * np.eye(self.dim), self._unit
        )

    def __repr__(self) -> str:
        return f"HermitianOperator(dim={self.dim}, unit={self._unit!r})"


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in ascending order and the matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def spectral_decompose(operator: HermitianOperator) -> SpectralDecomposition:
    """Exact eigensystem of a Hermitian operator.

    Eigenvalues are returned ascending.  Inside a degenerate cluster the
    basis is whatever the solver produced; no downstream result may depend
    on that choice, and the exponential below provably does not.

    The decomposition is cached on the operator (operators are immutable,
    so the cache is safe to share across threads).
    """
    cached = operator._decomposition
    if cached is not None:
        return cached
    eigenvalues, eigenvectors = np.linalg.eigh(operator.entries)
    scale = max(operator.norm(), _TINY)
    recon = eigenvectors @ (eigenvalues[:, None] * eigenvectors.conj().T)
    if np.linalg.norm(recon - operator.entries) > RECONSTRUCTION_RTOL * scale:
        raise np.linalg.LinAlgError("spectral decomposition failed the reconstruction bound")
    gram = eigenvectors.conj().T @ eigenvectors
    if np.linalg.norm(gram - np.eye(operator.dim)) > ORTHONORMALITY_ATOL:
        raise np.linalg.LinAlgError("eigenvector basis is not orthonormal")
    eigenvalues.setflags(write=False)
    eigenvectors.setflags(write=False)
    decomposition = SpectralDecomposition(eigenvalues=eigenvalues, eigenvectors=eigenvectors)
    operator._decomposition = decomposition
    return decomposition


def _require_finite(name, *values):
    for value in values:
        if not np.isfinite(value):
            raise ValueError(f"{name}: parameters must be finite, got {value!r}")


def build_hamiltonian(
    kind: str,
    *,
    constants: Constants = NATURAL,
    shift_nonnegative: bool = False,
    **params,
) -> HermitianOperator:
    """Construct one of the stock energy operators.

    Kinds
    -----
    ``two_level``            -- diag(e0, e1)
    ``truncated_oscillator`` -- diag(hbar * omega * (n + 1/2)), n < levels
    ``random_hermitian``     -- (A + A*)/2 with A complex standard normal,
                                seeded and reproducible

    With ``shift_nonnegative`` the spectrum is raised by ``-min(eigenvalue)``
    whenever the bottom of the spectrum is negative, so the ground level
    sits exactly at zero.
    """
    if kind == "two_level":
        e0, e1 = params.pop("e0"), params.pop("e1")
        _require_finite("two_level", e0, e1)
        matrix = np.diag([complex(e0), complex(e1)])
    elif kind == "truncated_oscillator":
        levels = params.pop("levels")
        omega = params.pop("omega", 1.0)
        if int(levels) != levels or levels <= 0:
            raise ValueError(f"truncated_oscillator: levels must be a positive integer, got {levels!r}")
        _require_finite("truncated_oscillator", omega)
        if omega <= 0:
            raise ValueError("truncated_oscillator: omega must be positive")
        ladder = constants.hbar * omega * (np.arange(int(levels)) + 0.5)
        matrix = np.diag(ladder.astype(complex))
    elif kind == "random_hermitian":
        dim = params.pop("dim")
        seed = params.pop("seed")
        if int(dim) != dim or dim <= 0:
            raise ValueError(f"random_hermitian: dim must be a positive integer, got {dim!r}")
        rng = np.random.default_rng(seed)
        raw = rng.standard_normal((int(dim), int(dim))) + 1j * rng.standard_normal((int(dim), int(dim)))
        matrix = (raw + raw.conj().T) / 2.0
    else:
        raise ValueError(f"unknown generator kind {kind!r}")
    if params:
        raise ValueError(f"unexpected parameters for {kind!r}: {sorted(params)}")

    operator = HermitianOperator(matrix, unit="energy")
    if shift_nonnegative:
        bottom = float(spectral_decompose(operator).eigenvalues[0])
        if bottom < 0.0:
            operator = operator.shifted(-bottom)
    return operator


def apply_exponential(operator: HermitianOperator, z: complex, state: StateVector) -> StateVector:
    """Apply ``exp(z * operator)`` to ``state`` exactly via the eigensystem.

    The result is independent of the eigenbasis chosen inside degenerate
    clusters because the exponential weights coincide there.  Exponents
    whose real part exceeds the double-precision range are reported as
    ``OverflowError`` instead of silently saturating.
    """
    if operator.dim != state.dim:
        raise ValueError(f"dimension mismatch: operator {operator.dim} vs state {state.dim}")
    z = complex(z)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise ValueError("exponent must be finite")
    decomposition = spectral_decompose(operator)
    exponents = z.real * decomposition.eigenvalues
    largest = float(np.max(exponents)) if exponents.size else 0.0
    if largest > _MAX_EXPONENT:
        raise OverflowError(
            f"exp({largest:.3e}) exceeds the representable double range; "
            "rescale the generator or shorten the evolution interval"
        )
    weights = decomposition.eigenvectors.conj().T @ state.amplitudes
    weights = np.exp(z * decomposition.eigenvalues) * weights
    return StateVector(decomposition.eigenvectors @ weights)


def expectation(operator: HermitianOperator, state: StateVector) -> float:
    """Normalized quadratic form ``<state, operator state> / <state, state>``."""
    if operator.dim != state.dim:
        raise ValueError(f"dimension mismatch: operator {operator.dim} vs state {state.dim}")
    amplitudes = state.amplitudes
    weight = float(np.vdot(amplitudes, amplitudes).real)
    if weight == 0.0:
        raise ValueError("expectation of the zero vector is undefined")
    value = complex(np.vdot(amplitudes, operator.entries @ amplitudes)) / weight
    if abs(value.imag) > 1e-12 * max(1.0, abs(value.real)):
        raise ArithmeticError(
            f"quadratic form of a Hermitian operator came out complex ({value!r})"
        )
    return float(value.real)


def uncertainty(operator: HermitianOperator, state: StateVector) -> float:
    """Standard deviation sqrt(<A^2> - <A>^2) on the given state.

    A tiny negative variance (within -1e-12 of zero, rounding) is clamped
    to zero; anything more negative is reported as an error.
    """
    if operator.dim != state.dim:
        raise ValueError(f"dimension mismatch: operator {operator.dim} vs state {state.dim}")
    amplitudes = state.amplitudes
    weight = float(np.vdot(amplitudes, amplitudes).real)
    if weight == 0.0:
        raise ValueError("uncertainty of the zero vector is undefined")
    image = operator.entries @ amplitudes
    mean = float(np.vdot(amplitudes, image).real) / weight
    second = float(np.vdot(image, image).real) / weight
    variance = second - mean * mean
    if variance < 0.0:
        if variance < -1e-12 * max(1.0, second):
            raise ArithmeticError(f"variance {variance:.3e} is negative beyond rounding")
        variance = 0.0
    return float(np.sqrt(variance))
