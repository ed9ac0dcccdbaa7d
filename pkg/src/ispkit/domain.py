"""Grids, measurement plans, and the value types shared by all pipeline stages.

Coordinate convention: the source lives on the square V0 = (-a/2, a/2)^2,
discretized as an n x n raster in image orientation.  Pixel (i, j) (row i
counted downward, column j rightward, both 0-based) has its center at

    x1 = -a/2 + (j + 0.5) * h,     x2 = a/2 - (i + 0.5) * h,     h = a / n,

so rasters written to image files display upright.

Measurement plans pair each Fourier index l = (l1, l2) with |l|_inf <= N
with one wavenumber and one observation direction:

    l != 0:  k_l = (2 pi / a) |l|_2,     x^_l = l / |l|_2
    l  = 0:  k_0 = (2 pi / a) lambda,    x^_0 = (1, 0)

where lambda is a small positive constant with (2 pi / a) lambda < 1/2.
Entries are ordered lexicographically by (l1, l2) so that serialized plans
and far-field vectors are deterministic.

All types here are immutable value objects; operations on them are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import ValidationError

MultiIndex = tuple[int, int]

DEFAULT_A = 1.0
DEFAULT_LAMBDA = 1e-3
DEFAULT_N_PIXELS = 64

_UNIT_NORM_TOL = 1e-12


def _frozen(values, dtype=float) -> np.ndarray:
    """Copy into a read-only array so dataclass fields stay immutable."""
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GridSpec:
    """Uniform n x n pixel grid over the square V0 = (-a/2, a/2)^2."""

    a: float = DEFAULT_A
    n: int = DEFAULT_N_PIXELS

    def __post_init__(self):
        if not (np.isfinite(self.a) and self.a > 0):
            raise ValidationError(f"grid edge length must be positive, got a={self.a}")
        if int(self.n) != self.n or self.n < 2:
            raise ValidationError(f"grid must have n >= 2 pixels per side, got n={self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "a", float(self.a))

    @property
    def h(self) -> float:
        """Pixel width."""
        return self.a / self.n

    def pixel_center(self, i: int, j: int) -> tuple[float, float]:
        """Center coordinates (x1, x2) of pixel (row i, column j)."""
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise ValidationError(
                f"pixel index ({i}, {j}) out of range for an {self.n}x{self.n} grid"
            )
        h = self.h
        return (-self.a / 2 + (j + 0.5) * h, self.a / 2 - (i + 0.5) * h)

    def pixel_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Arrays X1[i, j], X2[i, j] of all pixel-center coordinates."""
        return _pixel_center_arrays(self.a, self.n)


@lru_cache(maxsize=16)
def _pixel_center_arrays(a: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    h = a / n
    x1 = -a / 2 + (np.arange(n) + 0.5) * h
    x2 = a / 2 - (np.arange(n) + 0.5) * h
    X1, X2 = np.meshgrid(x1, x2)
    X1.setflags(write=False)
    X2.setflags(write=False)
    return X1, X2


@dataclass(frozen=True)
class PlanEntry:
    """One far-field measurement: Fourier index, wavenumber, direction."""

    l: MultiIndex
    k: float
    direction: tuple[float, float]


@dataclass(frozen=True)
class MeasurementPlan:
    """The ordered (2N+1)^2 measurement set for truncation frequency N."""

    N: int
    a: float
    lam: float
    entries: tuple[PlanEntry, ...]

    @cached_property
    def index_of(self) -> Mapping[MultiIndex, int]:
        """Position of each multi-index within the lexicographic ordering."""
        return MappingProxyType({e.l: p for p, e in enumerate(self.entries)})

    @cached_property
    def k_array(self) -> np.ndarray:
        return _frozen([e.k for e in self.entries])

    @cached_property
    def direction_array(self) -> np.ndarray:
        return _frozen([e.direction for e in self.entries])

    def cache_key(self) -> tuple:
        """Identity of the plan's numerical content (for kernel caching)."""
        return (self.N, self.a, self.lam)


def build_measurement_plan(
    N: int, a: float = DEFAULT_A, lam: float = DEFAULT_LAMBDA
) -> MeasurementPlan:
    """Construct the measurement plan for truncation frequency N.

    Raises ValidationError unless N >= 1, a > 0 and 0 < (2 pi / a) * lam < 1/2.
    """
    if int(N) != N or N < 1:
        raise ValidationError(f"truncation frequency N must be a positive integer, got {N}")
    if not (np.isfinite(a) and a > 0):
        raise ValidationError(f"domain edge a must be positive, got {a}")
    k0 = 2.0 * np.pi * lam / a
    if not (0.0 < k0 < 0.5):
        raise ValidationError(
            f"lambda={lam} violates the bound 0 < (2*pi/a)*lambda < 1/2 "
            f"(got (2*pi/a)*lambda = {k0:.6g})"
        )
    N = int(N)
    entries = []
    for l1 in range(-N, N + 1):
        for l2 in range(-N, N + 1):
            if l1 == 0 and l2 == 0:
                entries.append(PlanEntry((0, 0), k0, (1.0, 0.0)))
            else:
                r = float(np.hypot(l1, l2))
                entries.append(
                    PlanEntry((l1, l2), 2.0 * np.pi * r / a, (l1 / r, l2 / r))
                )
    return MeasurementPlan(N=N, a=float(a), lam=float(lam), entries=tuple(entries))


@dataclass(frozen=True)
class SourceRaster:
    """Real n x n source image S on the pixel grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.shape != (self.grid.n, self.grid.n):
            raise ValidationError(
                f"raster shape {vals.shape} does not match grid n={self.grid.n}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValidationError("source raster contains non-finite values")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class FarFieldSet:
    """Far-field values u_inf(x^_l; k_l) keyed by multi-index, plus noise metadata."""

    plan: MeasurementPlan
    values: Mapping[MultiIndex, complex]
    noise_delta: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        vals = dict(self.values)
        if vals.keys() != self.plan.index_of.keys():
            missing = self.plan.index_of.keys() - vals.keys()
            extra = vals.keys() - self.plan.index_of.keys()
            raise ValidationError(
                f"far-field keys do not match the plan (missing {sorted(missing)[:3]}, "
                f"extra {sorted(extra)[:3]})"
            )
        arr = np.array([vals[e.l] for e in self.plan.entries], dtype=complex)
        if not np.all(np.isfinite(arr)):
            raise ValidationError("far-field set contains non-finite values")
        if self.noise_delta < 0:
            raise ValidationError(f"noise level must be >= 0, got {self.noise_delta}")
        object.__setattr__(self, "values", MappingProxyType(vals))

    def as_array(self) -> np.ndarray:
        """Values as a complex vector in plan (lexicographic) order."""
        return np.array([self.values[e.l] for e in self.plan.entries], dtype=complex)


@dataclass(frozen=True)
class CoefficientSet:
    """Fourier coefficients s^_l for all |l|_inf <= N, tied to the domain edge a."""

    N: int
    a: float
    coefficients: Mapping[MultiIndex, complex]

    def __post_init__(self):
        coeffs = dict(self.coefficients)
        expected = {
            (l1, l2)
            for l1 in range(-self.N, self.N + 1)
            for l2 in range(-self.N, self.N + 1)
        }
        if coeffs.keys() != expected:
            raise ValidationError(
                f"coefficient set must contain exactly the (2N+1)^2 indices with "
                f"|l|_inf <= {self.N}; got {len(coeffs)} entries"
            )
        if not np.all(np.isfinite(np.array(list(coeffs.values()), dtype=complex))):
            raise ValidationError("coefficient set contains non-finite values")
        object.__setattr__(self, "coefficients", MappingProxyType(coeffs))

    def as_array(self) -> np.ndarray:
        """Dense (2N+1) x (2N+1) complex array, C[l1 + N, l2 + N] = s^_l."""
        N = self.N
        C = np.empty((2 * N + 1, 2 * N + 1), dtype=complex)
        for (l1, l2), v in self.coefficients.items():
            C[l1 + N, l2 + N] = v
        return C

    @classmethod
    def from_array(cls, N: int, a: float, C: np.ndarray) -> "CoefficientSet":
        if C.shape != (2 * N + 1, 2 * N + 1):
            raise ValidationError(
                f"coefficient array shape {C.shape} does not match N={N}"
            )
        coeffs = {
            (l1, l2): complex(C[l1 + N, l2 + N])
            for l1 in range(-N, N + 1)
            for l2 in range(-N, N + 1)
        }
        return cls(N=N, a=a, coefficients=coeffs)


@dataclass(frozen=True)
class ReconstructionRaster:
    """Real part of the truncated series on the grid, plus the imaginary residual.

    max_imag_residual is the largest |Im| discarded when realifying the
    complex series sum; it is a diagnostic for how far the coefficients are
    from Hermitian symmetry.
    """

    grid: GridSpec
    values: np.ndarray
    max_imag_residual: float = 0.0

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.shape != (self.grid.n, self.grid.n):
            raise ValidationError(
                f"raster shape {vals.shape} does not match grid n={self.grid.n}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValidationError("reconstruction raster contains non-finite values")
        if not (np.isfinite(self.max_imag_residual) and self.max_imag_residual >= 0):
            raise ValidationError("max_imag_residual must be a finite non-negative real")
        object.__setattr__(self, "values", vals)
