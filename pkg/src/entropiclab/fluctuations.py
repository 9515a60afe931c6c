"""Gaussian near-equilibrium fluctuations of a (p, V, T, S) system.

The ensemble draws temperature and volume deviations independently with
the standard near-equilibrium variances and reconstructs entropy and
pressure deviations through the reference-state partial derivatives, so
every advertised cross-moment (entropy-temperature, pressure-volume) comes
out of one joint sampler.  Log coordinates turn the fluctuation exponent
into a sum of canonical products, and the quadrature routines check that
this exponent is the symplectic area of a bounded patch, equal to the
circulation of the canonical one-form around its boundary.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .constants import NATURAL, Constants
from .seeding import block_generator, block_ranges

__all__ = [
    "CanonicalPoint",
    "CovarianceReport",
    "FluctuationSample",
    "FluctuationSamples",
    "Statistic",
    "SymplecticPatch",
    "ThermoReference",
    "boundary_action",
    "covariance_report",
    "disk_patch",
    "fourier_patch",
    "gaussian_sample",
    "log_probability",
    "rectangle_patch",
    "symplectic_area",
    "to_canonical",
    "two_plane_patch",
    "write_samples_csv",
]


@dataclass(frozen=True)
class ThermoReference:
    """Reference state plus the response coefficients the sampler needs.

    ``compressibility_term`` is the isothermal volume response (dV/dp)_T,
    always negative for a stable system.  The ideal-gas preset ties the
    reference values together through p V = S0 T and defaults to the
    monatomic heat capacity 1.5 * S0.
    """

    pressure: float
    volume: float
    temperature: float
    entropy_scale: float
    heat_capacity_cv: float
    compressibility_term: float

    def __post_init__(self):
        positive = {
            "pressure": self.pressure,
            "volume": self.volume,
            "temperature": self.temperature,
            "entropy_scale": self.entropy_scale,
            "heat_capacity_cv": self.heat_capacity_cv,
        }
        for name, value in positive.items():
            if not (np.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be positive, got {value!r}")
        if not (np.isfinite(self.compressibility_term) and self.compressibility_term < 0.0):
            raise ValueError(
                f"compressibility_term must be negative, got {self.compressibility_term!r}"
            )

    @classmethod
    def ideal_gas(
        cls,
        pressure: float,
        volume: float,
        temperature: float,
        heat_capacity_cv: float | None = None,
    ) -> "ThermoReference":
        if not all(np.isfinite(v) and v > 0 for v in (pressure, volume, temperature)):
            raise ValueError("ideal-gas reference needs positive pressure, volume, temperature")
        entropy_scale = pressure * volume / temperature
        return cls(
            pressure=pressure,
            volume=volume,
            temperature=temperature,
            entropy_scale=entropy_scale,
            heat_capacity_cv=(
                1.5 * entropy_scale if heat_capacity_cv is None else heat_capacity_cv
            ),
            compressibility_term=-volume / pressure,
        )

    # ideal-gas equation-of-state slopes at the reference point
    def pressure_temperature_slope(self) -> float:
        return self.entropy_scale / self.volume

    def pressure_volume_slope(self) -> float:
        return -self.pressure / self.volume


@dataclass(frozen=True)
class FluctuationSample:
    """One joint deviation from the reference state, in physical units."""

    dp: float
    dV: float
    dT: float
    dS: float


class FluctuationSamples:
    """Array-backed ensemble of joint fluctuations (columns dp, dV, dT, dS)."""

    __slots__ = ("_dp", "_dV", "_dT", "_dS")

    def __init__(self, dp, dV, dT, dS):
        arrays = [np.asarray(a, dtype=float) for a in (dp, dV, dT, dS)]
        n = arrays[0].size
        if any(a.ndim != 1 or a.size != n for a in arrays):
            raise ValueError("sample columns must be 1-D and of equal length")
        if any(not np.all(np.isfinite(a)) for a in arrays):
            raise ValueError("samples must be finite")
        for a in arrays:
            a.setflags(write=False)
        self._dp, self._dV, self._dT, self._dS = arrays

    @property
    def dp(self) -> np.ndarray:
        return self._dp

    @property
    def dV(self) -> np.ndarray:
        return self._dV

    @property
    def dT(self) -> np.ndarray:
        return self._dT

    @property
    def dS(self) -> np.ndarray:
        return self._dS

    def __len__(self) -> int:
        return self._dp.size

    def __getitem__(self, i: int) -> FluctuationSample:
        return FluctuationSample(
            dp=float(self._dp[i]), dV=float(self._dV[i]),
            dT=float(self._dT[i]), dS=float(self._dS[i]),
        )


def _fill_block(ref, constants, seed, block, start, stop, dp, dV, dT, dS):
    rng = block_generator(seed, block)
    draws = rng.standard_normal((2, stop - start))
    sigma_t = math.sqrt(constants.kB * ref.temperature**2 / ref.heat_capacity_cv)
    sigma_v = math.sqrt(-constants.kB * ref.temperature * ref.compressibility_term)
    dt = sigma_t * draws[0]
    dv = sigma_v * draws[1]
    slope_t = ref.pressure_temperature_slope()
    slope_v = ref.pressure_volume_slope()
    dT[start:stop] = dt
    dV[start:stop] = dv
    dS[start:stop] = (ref.heat_capacity_cv / ref.temperature) * dt + slope_t * dv
    dp[start:stop] = slope_t * dt + slope_v * dv


def gaussian_sample(
    ref: ThermoReference,
    n: int,
    seed: int,
    constants: Constants = NATURAL,
    workers: int = 1,
) -> FluctuationSamples:
    """Draw n joint fluctuations around the reference state.

    Temperature and volume deviations are independent zero-mean Gaussians
    with variances kB T^2 / cv and -kB T (dV/dp)_T; entropy and pressure
    deviations follow from the equation-of-state slopes.  Sample block b
    depends only on (seed, b), so any worker count reproduces the same
    stream bit for bit and in the same order.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if not isinstance(workers, (int, np.integer)) or workers < 1:
        raise ValueError(f"workers must be a positive integer, got {workers!r}")
    dp = np.empty(n)
    dV = np.empty(n)
    dT = np.empty(n)
    dS = np.empty(n)
    blocks = list(block_ranges(n))
    if workers == 1 or len(blocks) == 1:
        for block, start, stop in blocks:
            _fill_block(ref, constants, seed, block, start, stop, dp, dV, dT, dS)
    else:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            futures = [
                pool.submit(_fill_block, ref, constants, seed, block, start, stop, dp, dV, dT, dS)
                for block, start, stop in blocks
            ]
            for future in futures:
                future.result()
    return FluctuationSamples(dp, dV, dT, dS)


@dataclass(frozen=True)
class Statistic:
    """Monte Carlo mean with its standard error."""

    mean: float
    stderr: float

    def standardized_deviation(self, target: float) -> float:
        return abs(self.mean - target) / self.stderr if self.stderr > 0 else math.inf


@dataclass(frozen=True)
class CovarianceReport:
    """Cross-moments of the ensemble in the combinations that have sharp
    near-equilibrium values: <dS dT>/(kB T) -> 1, <dp dV>/(kB T) -> -1,
    the dT-dV correlation -> 0, and <dS dtau>/kB -> 1 with dtau = dT/T to
    first order."""

    ds_dt_over_kBT: Statistic
    dp_dv_over_kBT: Statistic
    dt_dv_correlation: Statistic
    ds_dtau_over_kB: Statistic
    n: int

    def to_dict(self) -> dict:
        def stat(s: Statistic) -> dict:
            return {"mean": s.mean, "stderr": s.stderr}

        return {
            "n": self.n,
            "ds_dt_over_kBT": stat(self.ds_dt_over_kBT),
            "dp_dv_over_kBT": stat(self.dp_dv_over_kBT),
            "dt_dv_correlation": stat(self.dt_dv_correlation),
            "ds_dtau_over_kB": stat(self.ds_dtau_over_kB),
        }


def _statistic(values: np.ndarray) -> Statistic:
    n = values.size
    return Statistic(
        mean=float(values.mean()),
        stderr=float(values.std(ddof=1) / math.sqrt(n)),
    )


def covariance_report(
    samples: FluctuationSamples,
    ref: ThermoReference,
    constants: Constants = NATURAL,
) -> CovarianceReport:
    """Monte Carlo cross-moments with standard-error bars (needs >= 1000 samples)."""
    n = len(samples)
    if n < 1000:
        raise ValueError(f"need at least 1000 samples for a covariance report, got {n}")
    kbt = constants.kB * ref.temperature
    ds_dt = _statistic(samples.dS * samples.dT / kbt)
    dp_dv = _statistic(samples.dp * samples.dV / kbt)
    scale = float(samples.dT.std(ddof=1) * samples.dV.std(ddof=1))
    dt_dv = _statistic(samples.dT * samples.dV / scale)
    ds_dtau = _statistic(samples.dS * (samples.dT / ref.temperature) / constants.kB)
    return CovarianceReport(
        ds_dt_over_kBT=ds_dt,
        dp_dv_over_kBT=dp_dv,
        dt_dv_correlation=dt_dv,
        ds_dtau_over_kB=ds_dtau,
        n=n,
    )


@dataclass(frozen=True)
class CanonicalPoint:
    """Dimensionless canonical coordinates of a thermodynamic state:
    p1 = -ln(p/p0), q1 = ln(V/V0), p2 = ln(T/T0), q2 = S/S0.

    Also used as a tangent-space increment, in which case the fields hold
    the deltas of those coordinates.
    """

    p1: float
    q1: float
    p2: float
    q2: float


def to_canonical(
    pressure: float,
    volume: float,
    temperature: float,
    entropy: float,
    ref: ThermoReference,
) -> CanonicalPoint:
    """Map a physical state to canonical coordinates.  The reference state with
    entropy equal to the entropy scale maps to (0, 0, 0, 1)."""
    for name, value in (("pressure", pressure), ("volume", volume), ("temperature", temperature)):
        if not (np.isfinite(value) and value > 0.0):
            raise ValueError(f"{name} must be positive, got {value!r}")
    if not np.isfinite(entropy):
        raise ValueError("entropy must be finite")
    return CanonicalPoint(
        p1=float(-np.log(pressure / ref.pressure)),
        q1=float(np.log(volume / ref.volume)),
        p2=float(np.log(temperature / ref.temperature)),
        q2=float(entropy / ref.entropy_scale),
    )


def log_probability(
    delta: CanonicalPoint,
    ref: ThermoReference,
    constants: Constants = NATURAL,
) -> float:
    """Unnormalized log weight of a canonical increment:
    -(S0 / 2 kB) (dp1 dq1 + dp2 dq2).  The partition constant is never
    computed; only differences of this value are meaningful."""
    for value in (delta.p1, delta.q1, delta.p2, delta.q2):
        if not np.isfinite(value):
            raise ValueError("canonical increments must be finite")
    return float(
        -(ref.entropy_scale / (2.0 * constants.kB))
        * (delta.p1 * delta.q1 + delta.p2 * delta.q2)
    )


@dataclass(frozen=True)
class SymplecticPatch:
    """Smooth parametric surface in (q1, p1, q2, p2), mapped from the unit
    square.

    ``chart(u, v)`` must broadcast over arrays and return the four
    coordinates; when no analytic ``jacobian`` is supplied the derivatives
    are taken by central differences, so the chart must tolerate a halo of
    half a grid cell around the square.  ``boundary``, when given, replaces
    the default square-edge loop: it maps arc parameters s in [0, 1] to the
    four coordinates and must close (s = 0 and s = 1 coincide).
    """

    chart: Callable
    jacobian: Callable | None = None
    boundary: Callable | None = None

    def evaluate(self, u, v):
        q1, p1, q2, p2 = self.chart(u, v)
        return (np.asarray(q1, float), np.asarray(p1, float),
                np.asarray(q2, float), np.asarray(p2, float))

    def boundary_samples(self, segments_per_side: int):
        """Closed loop around the boundary, corner nodes included, traversed
        counterclockwise in (u, v)."""
        if segments_per_side < 1:
            raise ValueError("need at least one segment per side")
        if self.boundary is not None:
            s = np.linspace(0.0, 1.0, 4 * segments_per_side + 1)
            q1, p1, q2, p2 = self.boundary(s)
            return (np.asarray(q1, float), np.asarray(p1, float),
                    np.asarray(q2, float), np.asarray(p2, float))
        s = np.linspace(0.0, 1.0, segments_per_side + 1)
        u = np.concatenate([s, np.ones_like(s[1:]), s[::-1][1:], np.zeros_like(s[1:])])
        v = np.concatenate([np.zeros_like(s), s[1:], np.ones_like(s[1:]), s[::-1][1:]])
        return self.evaluate(u, v)


def rectangle_patch(q1_extent: float, p1_extent: float) -> SymplecticPatch:
    """Flat rectangle in the first canonical plane with positive orientation."""

    def chart(u, v):
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        return q1_extent * v, p1_extent * u, np.zeros_like(u), np.zeros_like(v)

    def jacobian(u, v):
        u = np.asarray(u, float)
        zero = np.zeros_like(u)
        d_du = (zero, np.full_like(u, p1_extent), zero, zero)
        d_dv = (np.full_like(u, q1_extent), zero, zero, zero)
        return d_du, d_dv

    return SymplecticPatch(chart=chart, jacobian=jacobian)


def disk_patch(radius: float, center=(0.0, 0.0)) -> SymplecticPatch:
    """Round disk of the given radius in the first canonical plane."""
    cx, cy = center

    def chart(u, v):
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        rho = radius * u
        angle = 2.0 * math.pi * v
        return cx + rho * np.sin(angle), cy + rho * np.cos(angle), np.zeros_like(u), np.zeros_like(v)

    return SymplecticPatch(chart=chart)


def two_plane_patch(area1: float, area2: float) -> SymplecticPatch:
    """Patch whose projected areas on the two canonical planes are area1 and
    area2; the symplectic area is their sum."""

    def chart(u, v):
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        return area1 * v, u, area2 * v, u

    return SymplecticPatch(chart=chart)


def fourier_patch(seed: int, modes: int = 2, amplitude: float = 0.08) -> SymplecticPatch:
    """Randomized smooth patch: a positively oriented base sheet plus a short
    trigonometric series in both parameters.  Deterministic in the seed."""
    rng = np.random.default_rng(seed)
    coeffs = amplitude * rng.standard_normal((4, modes, modes, 2))
    base = 0.5 + 0.5 * rng.random(2)

    def chart(u, v):
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        coords = [base[0] * v, base[0] * u, base[1] * v, base[1] * u]
        for c in range(4):
            for k in range(modes):
                for l in range(modes):
                    angle = math.pi * ((k + 1) * u + (l + 1) * v)
                    coords[c] = coords[c] + coeffs[c, k, l, 0] * np.sin(angle) \
                        + coeffs[c, k, l, 1] * np.cos(angle)
        return tuple(coords)

    return SymplecticPatch(chart=chart)


def symplectic_area(patch: SymplecticPatch, resolution: int) -> float:
    """Integral of dp1^dq1 + dp2^dq2 over the patch.

    Midpoint quadrature of the pulled-back two-form on a resolution^2 grid;
    derivatives come from the analytic jacobian when available, otherwise
    from central differences with a step of an eighth of a cell.  Either
    way the error is second order in the cell size.
    """
    if resolution < 1:
        raise ValueError("resolution must be a positive integer")
    mids = (np.arange(resolution) + 0.5) / resolution
    u, v = np.meshgrid(mids, mids, indexing="ij")
    if patch.jacobian is not None:
        d_du, d_dv = patch.jacobian(u, v)
        q1u, p1u, q2u, p2u = (np.asarray(a, float) for a in d_du)
        q1v, p1v, q2v, p2v = (np.asarray(a, float) for a in d_dv)
    else:
        h = 0.125 / resolution
        fup = patch.evaluate(u + h, v)
        fdn = patch.evaluate(u - h, v)
        gup = patch.evaluate(u, v + h)
        gdn = patch.evaluate(u, v - h)
        q1u, p1u, q2u, p2u = ((a - b) / (2 * h) for a, b in zip(fup, fdn))
        q1v, p1v, q2v, p2v = ((a - b) / (2 * h) for a, b in zip(gup, gdn))
    form = (p1u * q1v - p1v * q1u) + (p2u * q2v - p2v * q2u)
    if float(np.max(np.abs(form))) == 0.0:
        raise ValueError("degenerate parametrization: the pulled-back form vanishes everywhere")
    return float(form.mean())


def boundary_action(patch: SymplecticPatch, resolution: int) -> float:
    """Circulation of p1 dq1 + p2 dq2 around the patch boundary.

    Composite trapezoid rule with ``resolution`` segments per square side;
    corner nodes are included so each smooth side is integrated to second
    order.  The loop must close to within 1e-9.
    """
    if resolution < 1:
        raise ValueError("resolution must be a positive integer")
    q1, p1, q2, p2 = patch.boundary_samples(resolution)
    closure = math.hypot(
        q1[0] - q1[-1], p1[0] - p1[-1], q2[0] - q2[-1], p2[0] - p2[-1]
    )
    if closure > 1e-9:
        raise ValueError(f"open boundary: endpoints differ by {closure:.3e}")
    term1 = 0.5 * (p1[:-1] + p1[1:]) @ np.diff(q1)
    term2 = 0.5 * (p2[:-1] + p2[1:]) @ np.diff(q2)
    return float(term1 + term2)


def write_samples_csv(samples: FluctuationSamples, path) -> None:
    """Dump the ensemble as CSV with columns dp, dV, dT, dS."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["dp", "dV", "dT", "dS"])
        for i in range(len(samples)):
            writer.writerow([
                repr(float(samples.dp[i])), repr(float(samples.dV[i])),
                repr(float(samples.dT[i])), repr(float(samples.dS[i])),
            ])
