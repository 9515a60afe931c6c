"""Entropy-generated evolution in dimensionless thermal time.

The generator is the energy operator divided by temperature; the evolution
parameter is tau = ln(T / T0).  A unit-modulus complex factor exp(i*phase)
tilts the time axis; its weak-field expansion produces a dissipation
parameter epsilon <= 0 that turns the unitary group into a one-parameter
semigroup of norm-dilating operators.  Everything claimed about that
construction is expressed here as computable quantities: the propagator,
its eigen-solutions, the production-rate identity, uncertainty products,
and the consistency map back to evolution in laboratory time.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ._grid import evolution_grid
from .constants import NATURAL, Constants
from .operators import (
    HermitianOperator,
    StateVector,
    apply_exponential,
    expectation,
    spectral_decompose,
    uncertainty,
)

_TINY = np.finfo(float).tiny

# |d<A>/dtau| below this is treated as a stationary probe observable
STATIONARY_DERIVATIVE = 1e-14

__all__ = [
    "ConvergenceError",
    "EigenSolutionSpec",
    "EntropyOperator",
    "EntropyProductionReport",
    "STrajectory",
    "SecondLawVerdict",
    "ThermalTimeChart",
    "UncertaintyProduct",
    "WickFactor",
    "dissipative_part",
    "eigen_solution",
    "entropy_operator",
    "entropy_production",
    "entropy_production_via_chart",
    "evolve_s",
    "generator_reading_gap",
    "picture_consistency",
    "second_law_refinement",
    "uncertainty_product",
    "wick_factor",
]


class ConvergenceError(RuntimeError):
    """Raised when the ordered-product integrator fails to refine to tolerance."""


def dissipative_part(matrix: np.ndarray) -> np.ndarray:
    """Operator-valued imaginary part: the Hermitian Y in M = X + iY.

    For a complex matrix this is (M - M*) / 2i, not the entrywise imaginary
    part; it is the component that breaks the conservation law.
    """
    matrix = np.asarray(matrix, dtype=complex)
    return (matrix - matrix.conj().T) / 2j


@dataclass(frozen=True)
class WickFactor:
    """Rotation of the time axis controlled by an external-field strength.

    ``phase`` interpolates from 0 (no field, unitary evolution) to -pi/2
    (strong field, maximal dissipation); ``factor`` is exp(i * phase) and
    ``epsilon = -pi * strength / 2`` is its weak-field expansion parameter.
    """

    strength: float
    phase: float
    factor: complex
    epsilon: float

    def __post_init__(self):
        if not (np.isfinite(self.strength) and self.strength >= 0.0):
            raise ValueError(f"strength must be finite and >= 0, got {self.strength!r}")
        expected_phase = -(math.pi / 2.0) * (1.0 - math.exp(-self.strength))
        if abs(self.phase - expected_phase) > 1e-12:
            raise ValueError("phase is inconsistent with the strength profile")
        if abs(self.factor - complex(math.cos(self.phase), math.sin(self.phase))) > 1e-12:
            raise ValueError("factor must equal exp(i * phase)")
        if abs(abs(self.factor) - 1.0) > 1e-12:
            raise ValueError("factor must have unit modulus")
        expected_epsilon = -math.pi * self.strength / 2.0
        if abs(self.epsilon - expected_epsilon) > 1e-12 * max(1.0, abs(expected_epsilon)):
            raise ValueError("epsilon is inconsistent with the strength")


def wick_factor(strength: float) -> WickFactor:
    """Build the time-axis rotation for a given nonnegative field strength."""
    if not np.isfinite(strength):
        raise ValueError("strength must be finite")
    if strength < 0.0:
        raise ValueError(f"strength must be >= 0, got {strength}")
    phase = -(math.pi / 2.0) * (1.0 - math.exp(-strength))
    return WickFactor(
        strength=float(strength),
        phase=phase,
        factor=complex(math.cos(phase), math.sin(phase)),
        epsilon=-math.pi * float(strength) / 2.0,
    )


@dataclass(frozen=True)
class EntropyOperator:
    """Energy operator divided by a fixed positive temperature."""

    operator: HermitianOperator
    temperature: float
    source: HermitianOperator

    def __post_init__(self):
        if not (np.isfinite(self.temperature) and self.temperature > 0.0):
            raise ValueError(f"temperature must be positive, got {self.temperature!r}")
        if self.source.unit != "energy":
            raise ValueError("source operator must carry energy units")
        if self.operator.unit != "entropy":
            raise ValueError("entropy operator must carry entropy units")
        if self.operator.dim != self.source.dim:
            raise ValueError("operator and source dimensions differ")
        defect = np.linalg.norm(self.operator.entries - self.source.entries / self.temperature)
        if defect > 1e-12 * max(self.operator.norm(), _TINY):
            raise ValueError("operator entries must equal source / temperature")

    @property
    def dim(self) -> int:
        return self.operator.dim


def entropy_operator(hamiltonian: HermitianOperator, temperature: float) -> EntropyOperator:
    """Divide an energy operator by a temperature to get the evolution generator."""
    if not (np.isfinite(temperature) and temperature > 0.0):
        raise ValueError(f"temperature must be positive, got {temperature!r}")
    if hamiltonian.unit != "energy":
        raise ValueError("hamiltonian must carry energy units")
    return EntropyOperator(
        operator=hamiltonian.scaled(1.0 / temperature, unit="entropy"),
        temperature=float(temperature),
        source=hamiltonian,
    )


@dataclass(frozen=True)
class ThermalTimeChart:
    """Coordinate chart trading laboratory time for temperature.

    Forward map: T(t) = hbar * factor / (kB * t) for t > 0.  The thermal
    time is tau = ln(T / T0).  For a real factor the three maps are
    mutually inverse; for a complex factor the returned time is complex
    and only the real-factor round trip is contractual.
    """

    reference_temperature: float
    factor: complex = 1.0
    constants: Constants = NATURAL

    def __post_init__(self):
        if not (np.isfinite(self.reference_temperature) and self.reference_temperature > 0.0):
            raise ValueError("reference_temperature must be positive")

    def temperature_from_time(self, t: float):
        if not (np.isfinite(t) and t > 0.0):
            raise ValueError(f"time must be positive, got {t!r}")
        value = self.constants.hbar * complex(self.factor) / (self.constants.kB * t)
        return value.real if value.imag == 0.0 else value

    def tau_from_temperature(self, temperature: float) -> float:
        if not (np.isfinite(temperature) and temperature > 0.0):
            raise ValueError(f"temperature must be positive, got {temperature!r}")
        return float(np.log(temperature / self.reference_temperature))

    def time_from_tau(self, tau: float):
        if not np.isfinite(tau):
            raise ValueError("tau must be finite")
        value = self.constants.hbar * complex(self.factor) / (
            self.constants.kB * self.reference_temperature * math.exp(tau)
        )
        return value.real if value.imag == 0.0 else value


@dataclass(frozen=True)
class STrajectory:
    """States sampled along thermal time, with norms and entropy averages."""

    taus: np.ndarray
    states: tuple
    norms: np.ndarray
    entropy_expectations: np.ndarray

    def __post_init__(self):
        n = len(self.taus)
        if not (len(self.states) == len(self.norms) == len(self.entropy_expectations) == n):
            raise ValueError("trajectory fields must have equal lengths")
        if np.any(np.asarray(self.norms) <= 0.0):
            raise ValueError("trajectory norms must be positive")


def _generator_at(generator, tau: float, dim: int) -> EntropyOperator:
    value = generator(tau)
    if not isinstance(value, EntropyOperator):
        raise TypeError(f"generator schedule must return EntropyOperator, got {type(value)!r}")
    if value.dim != dim:
        raise ValueError("generator schedule changed dimension along the way")
    return value


def _ordered_product(state, generator, a, b, substeps, z_rate, dim):
    # piecewise-constant factors evaluated at interval midpoints, applied in
    # tau order (later factors act later)
    width = (b - a) / substeps
    current = state
    for j in range(substeps):
        midpoint = a + (j + 0.5) * width
        op = _generator_at(generator, midpoint, dim)
        current = apply_exponential(op.operator, z_rate * width, current)
    return current


def evolve_s(
    psi0: StateVector,
    generator,
    tau_grid,
    epsilon: float,
    constants: Constants = NATURAL,
    *,
    allow_antidissipative: bool = False,
    rtol: float = 1e-8,
    max_refinements: int = 14,
) -> STrajectory:
    """Evolve under the entropy generator: psi(tau) = T-exp[(i - eps)/kB * Integral(S)] psi0.

    ``generator`` is either a constant ``EntropyOperator`` (solved exactly
    through its eigensystem) or a callable tau -> EntropyOperator, handled
    by midpoint ordered products whose step is halved until two successive
    refinements agree within ``rtol``; the agreement budget is divided
    across grid intervals so the accumulated trajectory honours ``rtol``
    as a whole.

    ``epsilon > 0`` selects the contraction (norm-shrinking) branch, which
    is rejected unless ``allow_antidissipative`` is set explicitly; it is
    needed to test the contraction property but describes no physical
    dissipation.
    """
    grid = evolution_grid(tau_grid, "tau_grid")
    if not np.isfinite(epsilon):
        raise ValueError("epsilon must be finite")
    if epsilon > 0.0 and not allow_antidissipative:
        raise ValueError(
            "epsilon > 0 drives the antidissipative contraction branch; "
            "pass allow_antidissipative=True to run it deliberately"
        )
    if psi0.norm() == 0.0:
        raise ValueError("initial state must be nonzero")
    z_rate = (1j - epsilon) / constants.kB

    if isinstance(generator, EntropyOperator):
        if generator.dim != psi0.dim:
            raise ValueError("generator and state dimensions differ")
        states = [apply_exponential(generator.operator, z_rate * tau, psi0) for tau in grid]
        entropies = np.array([expectation(generator.operator, s) for s in states])
    elif callable(generator):
        dim = psi0.dim
        states = [psi0]
        current = psi0
        interval_rtol = rtol / max(1, grid.size - 1)
        for a, b in zip(grid[:-1], grid[1:]):
            coarse = _ordered_product(current, generator, a, b, 1, z_rate, dim)
            substeps = 2
            refined = None
            while substeps <= 2**max_refinements:
                fine = _ordered_product(current, generator, a, b, substeps, z_rate, dim)
                gap = float(np.linalg.norm(fine.amplitudes - coarse.amplitudes))
                if gap <= interval_rtol * max(fine.norm(), _TINY):
                    refined = fine
                    break
                coarse = fine
                substeps *= 2
            if refined is None:
                raise ConvergenceError(
                    f"ordered-product refinement stalled above rtol={rtol:g} "
                    f"on tau interval [{a:g}, {b:g}]"
                )
            current = refined
            states.append(current)
        entropies = np.array(
            [expectation(_generator_at(generator, tau, dim).operator, s) for tau, s in zip(grid, states)]
        )
    else:
        raise TypeError(
            "generator must be an EntropyOperator or a callable tau -> EntropyOperator"
        )

    norms = np.array([s.norm() for s in states])
    return STrajectory(taus=grid, states=tuple(states), norms=norms, entropy_expectations=entropies)


@dataclass(frozen=True)
class EigenSolutionSpec:
    """A tau-independent mode with its dimensionless entropic eigenvalue.

    The mode must satisfy ``S mode = s * kB * mode`` within
    1e-10 * |S| * |mode| (Frobenius norm on the operator).
    """

    mode: StateVector
    entropic_eigenvalue: float
    generator: EntropyOperator
    constants: Constants = field(default=NATURAL)

    def __post_init__(self):
        if self.mode.dim != self.generator.dim:
            raise ValueError("mode and generator dimensions differ")
        if self.mode.norm() == 0.0:
            raise ValueError("mode must be nonzero")
        target = self.entropic_eigenvalue * self.constants.kB * self.mode.amplitudes
        residual = np.linalg.norm(self.generator.operator.entries @ self.mode.amplitudes - target)
        bound = 1e-10 * max(self.generator.operator.norm(), _TINY) * self.mode.norm()
        if residual > bound:
            raise ValueError(
                f"mode fails the eigenvalue equation: residual {residual:.3e} > {bound:.3e}"
            )


def eigen_solution(spec: EigenSolutionSpec, tau: float, epsilon: float) -> StateVector:
    """Closed-form factorized solution: mode * exp[(i - eps) * tau * s].

    Matches ``evolve_s`` on the same mode; the entire tau dependence is the
    scalar factor, whose modulus exp(-eps * tau * s) carries the
    norm growth of the dissipative branch.
    """
    if not (np.isfinite(tau) and np.isfinite(epsilon)):
        raise ValueError("tau and epsilon must be finite")
    factor = np.exp((1j - epsilon) * tau * spec.entropic_eigenvalue)
    return StateVector(spec.mode.amplitudes * factor)


@dataclass(frozen=True)
class EntropyProductionReport:
    """Rate of change of the entropy operator along laboratory time.

    ``rates[k] = coefficient * mode_energies[k]`` with
    ``coefficient = (kB / hbar) (1 - i * epsilon)``; the imaginary part,
    ``-epsilon * kB * energy / hbar``, is the dissipative piece and is
    nonnegative for epsilon <= 0 on a nonnegative spectrum.
    """

    mode_energies: np.ndarray
    rates: np.ndarray
    coefficient: complex
    rate_operator: np.ndarray


def entropy_production(
    hamiltonian: HermitianOperator,
    wick: WickFactor,
    constants: Constants = NATURAL,
) -> EntropyProductionReport:
    """Per-mode production rates (kB/hbar)(1 - i*eps) * energy, plus the same
    statement as an operator."""
    coefficient = (constants.kB / constants.hbar) * (1.0 - 1j * wick.epsilon)
    energies = spectral_decompose(hamiltonian).eigenvalues.copy()
    rates = coefficient * energies
    energies.setflags(write=False)
    rates.setflags(write=False)
    rate_operator = coefficient * hamiltonian.entries
    rate_operator.setflags(write=False)
    return EntropyProductionReport(
        mode_energies=energies,
        rates=rates,
        coefficient=complex(coefficient),
        rate_operator=rate_operator,
    )


def entropy_production_via_chart(
    hamiltonian: HermitianOperator,
    wick: WickFactor,
    constants: Constants = NATURAL,
    *,
    probe_time: float = 1.0,
    step: float = 1e-4,
    first_order: bool = True,
) -> np.ndarray:
    """Independent route to the production rate: differentiate the chart.

    Along the time-temperature chart the generator is
    ``S(t) = (kB t / hbar) * (1/factor) * H``; this returns its central
    finite difference at ``probe_time``.  With ``first_order`` the inverse
    factor is truncated to 1 - i*epsilon (the convention in which the
    closed-form rate is stated); otherwise the exact unit-modulus inverse
    is used and the quadratic gap between the two becomes visible.
    """
    if not (np.isfinite(probe_time) and probe_time > 0.0):
        raise ValueError("probe_time must be positive")
    if not (np.isfinite(step) and 0.0 < step < probe_time):
        raise ValueError("step must be positive and smaller than probe_time")
    inverse_factor = (1.0 - 1j * wick.epsilon) if first_order else 1.0 / wick.factor

    def chart_generator(t: float) -> np.ndarray:
        return (constants.kB * t / constants.hbar) * inverse_factor * hamiltonian.entries

    return (chart_generator(probe_time + step) - chart_generator(probe_time - step)) / (2.0 * step)


@dataclass(frozen=True)
class UncertaintyProduct:
    """Spread of the generator times the probe-observable evolution time.

    ``delta_tau`` is the ratio (spread of A) / |d<A>/dtau| at the probe
    point; ``product = delta_s * delta_tau`` obeys the kB/2 bound in the
    unitary branch.  ``convention_product`` is delta_s times a unit
    interval of tau, reported for comparison against the kB threshold.
    """

    delta_s: float
    delta_tau: float
    product: float | None
    convention_product: float


def uncertainty_product(
    psi: StateVector,
    entropy_op: EntropyOperator,
    observable: HermitianOperator,
    tau_probe: float,
    constants: Constants = NATURAL,
) -> UncertaintyProduct:
    """Evaluate the generator-time uncertainty product on the unitary branch.

    The state is carried to ``tau_probe`` with epsilon = 0; the observable
    clock rate d<A>/dtau is computed exactly from the commutator, so the
    resulting product is the sharp two-spread bound, not a finite
    difference.  A stationary probe (rate below 1e-14) yields an infinite
    delta_tau and no product.
    """
    if not np.isfinite(tau_probe):
        raise ValueError("tau_probe must be finite")
    if psi.dim != entropy_op.dim or psi.dim != observable.dim:
        raise ValueError("state, generator and observable dimensions must agree")
    if psi.norm() == 0.0:
        raise ValueError("state must be nonzero")
    s_matrix = entropy_op.operator
    probe = apply_exponential(s_matrix, 1j * tau_probe / constants.kB, psi)
    delta_s = uncertainty(s_matrix, probe)
    delta_a = uncertainty(observable, probe)
    commutator = observable.entries @ s_matrix.entries - s_matrix.entries @ observable.entries
    clock_matrix = HermitianOperator((1j / constants.kB) * commutator, unit="dimensionless")
    rate = expectation(clock_matrix, probe)
    if abs(rate) < STATIONARY_DERIVATIVE:
        return UncertaintyProduct(
            delta_s=delta_s,
            delta_tau=math.inf,
            product=None,
            convention_product=delta_s,
        )
    delta_tau = delta_a / abs(rate)
    return UncertaintyProduct(
        delta_s=delta_s,
        delta_tau=delta_tau,
        product=delta_s * delta_tau,
        convention_product=delta_s,
    )


class SecondLawVerdict(enum.Enum):
    """Where an entropy spread lands relative to the kB-refined bound."""

    REFINED_LAW = "refined_law"          # delta_s >= kB
    SECOND_LAW_ONLY = "second_law_only"  # 0 <= delta_s < kB
    FLAGGED = "flagged"                  # delta_s < 0


def second_law_refinement(delta_s: float, constants: Constants = NATURAL) -> SecondLawVerdict:
    if not np.isfinite(delta_s):
        raise ValueError("delta_s must be finite")
    if delta_s < 0.0:
        return SecondLawVerdict.FLAGGED
    if delta_s >= constants.kB:
        return SecondLawVerdict.REFINED_LAW
    return SecondLawVerdict.SECOND_LAW_ONLY


def _closed_form_states(hamiltonian, psi0, phases):
    # sum of eigenmodes with per-mode complex weights, one state per row of phases
    decomposition = spectral_decompose(hamiltonian)
    coefficients = decomposition.eigenvectors.conj().T @ psi0.amplitudes
    return [
        StateVector(decomposition.eigenvectors @ (np.exp(row) * coefficients))
        for row in phases
    ]


def picture_consistency(
    psi0: StateVector,
    hamiltonian: HermitianOperator,
    reference_temperature: float,
    mode: str,
    tau_grid,
    epsilon: float,
    constants: Constants = NATURAL,
    *,
    rtol: float = 1e-8,
) -> float:
    """Largest state deviation between matched evolutions in the two charts.

    ``real_C``   -- epsilon = 0 only: laboratory-time evolution evaluated at
                    t(tau) = hbar / (kB T0 exp(tau)) against the adaptive
                    thermal-time integration driven by the chart generator
                    S(tau) = H exp(-tau) / T0.  The two integrations share
                    no code path beyond the eigensolver.
    ``frozen_S`` -- generator held at H / T0; integration against the
                    closed-form spectral solution exp[(i-eps) (h/T0) tau / kB].
    ``chart_S``  -- generator carrying the chart's tau dependence; adaptive
                    integration against the closed form with the integrated
                    exponent (i-eps)(h / (kB T0))(1 - exp(-tau)).
    """
    if not (np.isfinite(reference_temperature) and reference_temperature > 0.0):
        raise ValueError("reference_temperature must be positive")
    grid = evolution_grid(tau_grid, "tau_grid")
    if psi0.norm() == 0.0:
        raise ValueError("initial state must be nonzero")

    def chart_schedule(tau: float) -> EntropyOperator:
        return entropy_operator(hamiltonian, reference_temperature * math.exp(tau))

    if mode == "real_C":
        if epsilon != 0.0:
            raise ValueError("real_C mode is defined for epsilon = 0")
        s_side = evolve_s(psi0, chart_schedule, grid, 0.0, constants, rtol=rtol)
        t_of_tau = constants.hbar / (constants.kB * reference_temperature * np.exp(grid))
        t_states = [
            apply_exponential(hamiltonian, -1j * (t - t_of_tau[0]) / constants.hbar, psi0)
            for t in t_of_tau
        ]
        pairs = zip(s_side.states, t_states)
    elif mode == "frozen_S":
        frozen = entropy_operator(hamiltonian, reference_temperature)
        s_side = evolve_s(psi0, frozen, grid, epsilon, constants)
        eigenvalues = spectral_decompose(hamiltonian).eigenvalues
        phases = [
            (1j - epsilon) * (eigenvalues / reference_temperature) * tau / constants.kB
            for tau in grid
        ]
        pairs = zip(s_side.states, _closed_form_states(hamiltonian, psi0, phases))
    elif mode == "chart_S":
        s_side = evolve_s(psi0, chart_schedule, grid, epsilon, constants, rtol=rtol)
        eigenvalues = spectral_decompose(hamiltonian).eigenvalues
        phases = [
            (1j - epsilon)
            * (eigenvalues / (constants.kB * reference_temperature))
            * (1.0 - math.exp(-tau))
            for tau in grid
        ]
        pairs = zip(s_side.states, _closed_form_states(hamiltonian, psi0, phases))
    else:
        raise ValueError(f"unknown mode {mode!r}; expected real_C, frozen_S or chart_S")

    return max(float(np.linalg.norm(a.amplitudes - b.amplitudes)) for a, b in pairs)


def generator_reading_gap(
    psi0: StateVector,
    hamiltonian: HermitianOperator,
    reference_temperature: float,
    tau: float,
    epsilon: float,
    constants: Constants = NATURAL,
) -> float:
    """Distance at a single tau between the frozen-generator solution and the
    solution whose generator carries the chart's tau dependence.

    The two readings coincide at tau = 0 and to first order in tau; the gap
    at finite tau quantifies how much the choice matters for a given
    spectrum.  Both closed forms are evaluated exactly.
    """
    if not (np.isfinite(reference_temperature) and reference_temperature > 0.0):
        raise ValueError("reference_temperature must be positive")
    if not (np.isfinite(tau) and np.isfinite(epsilon)):
        raise ValueError("tau and epsilon must be finite")
    eigenvalues = spectral_decompose(hamiltonian).eigenvalues
    frozen_phase = (1j - epsilon) * (eigenvalues / reference_temperature) * tau / constants.kB
    chart_phase = (
        (1j - epsilon)
        * (eigenvalues / (constants.kB * reference_temperature))
        * (1.0 - math.exp(-tau))
    )
    frozen_state, chart_state = _closed_form_states(
        hamiltonian, psi0, [frozen_phase, chart_phase]
    )
    return float(np.linalg.norm(frozen_state.amplitudes - chart_state.amplitudes))
