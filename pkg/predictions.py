"""
Hybrid-side measurement predictions: spectra of evaluated observables,
interval probabilities and the sandwich bounds on the full-quantum probability.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt
from typing import Union, Sequence

import numpy as np
from scipy import linalg

from constants import DEGENERACY_TOLERANCE, PROBABILITY_TOLERANCE
from hybrid_algebra import HybridObservable, PhasePoint, evaluate_classical, to_matrix
from utils import require_hermitian_matrix


class BoundPreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class SpectrumEntry:
    eigenvalue: float
    probability: float


@dataclass(frozen=True, eq=False)
class SpectrumTable:
    """
    Merged eigenvalues in ascending order with the probability of each.
    eigenspaces[k] holds the orthonormal eigenvectors (as columns) of entries[k].
    """

    entries: tuple[SpectrumEntry, ...]
    degeneracy_tolerance: float = DEGENERACY_TOLERANCE
    eigenspaces: tuple[np.ndarray, ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        total = sum(entry.probability for entry in self.entries)
        if self.entries and abs(total - 1) > PROBABILITY_TOLERANCE:
            raise ValueError(f"Spectrum probabilities sum to {total:.10f}, not 1")
        values = [entry.eigenvalue for entry in self.entries]
        if values != sorted(values):
            raise ValueError("Spectrum eigenvalues must be ascending")

    @property
    def eigenvalues(self) -> list[float]:
        return [entry.eigenvalue for entry in self.entries]

    def eigenvectors(self) -> list[np.ndarray]:
        return [space[:, j] for space in self.eigenspaces for j in range(space.shape[1])]


def spectrum_of(matrix: np.ndarray, state: Union[np.ndarray, Sequence[complex]],
                degeneracy_tolerance: float = DEGENERACY_TOLERANCE) -> SpectrumTable:
    """
    Diagonalize a Hermitian matrix and weigh each eigenvalue by the squared
    projection of state onto its eigenspace. Eigenvalues within
    degeneracy_tolerance * max(1, |lambda|) of a group's first value are merged.

    :raises utils.NonHermitianError: when the matrix is not Hermitian.
    """
    matrix = require_hermitian_matrix(matrix, "observable matrix")
    state = np.asarray(getattr(state, "amplitudes", state), dtype=complex)
    if state.size != matrix.shape[0]:
        raise ValueError(f"State of size {state.size} does not match a {matrix.shape[0]}-dimensional matrix")
    values, vectors = linalg.eigh(matrix)
    weights = np.abs(vectors.conj().T @ state) ** 2
    groups: list[list[int]] = []
    for k, value in enumerate(values):
        if groups and abs(value - values[groups[-1][0]]) <= degeneracy_tolerance * max(1.0, abs(value)):
            groups[-1].append(k)
        else:
            groups.append([k])
    entries = tuple(
        SpectrumEntry(float(np.mean(values[group])), float(np.sum(weights[group]))) for group in groups
    )
    spaces = tuple(vectors[:, group] for group in groups)
    return SpectrumTable(entries, degeneracy_tolerance, spaces)


def hybrid_spectrum(b_evolved: HybridObservable, centers: Union[PhasePoint, Sequence[float]], phi_q, dim: int,
                    degeneracy_tolerance: float = DEGENERACY_TOLERANCE) -> SpectrumTable:
    """Spectrum of b_evolved at the classical centers, weighted by the quantum-sector state phi_q."""
    amplitudes = np.asarray(getattr(phi_q, "amplitudes", phi_q), dtype=complex)
    if amplitudes.size != dim:
        raise ValueError(f"phi_q has dimension {amplitudes.size}, expected {dim}")
    matrix = to_matrix(evaluate_classical(b_evolved, centers), dim, b_evolved.n_classical)
    return spectrum_of(matrix, amplitudes, degeneracy_tolerance)


@dataclass(frozen=True)
class Interval:
    """The closed interval [center - half_width, center + half_width]."""

    center: float
    half_width: float

    def __post_init__(self) -> None:
        if not self.half_width > 0:
            raise ValueError(f"Interval half width must be positive, got {self.half_width!r}")

    @property
    def lower(self) -> float:
        return self.center - self.half_width

    @property
    def upper(self) -> float:
        return self.center + self.half_width

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def widened(self, amount: float) -> Interval:
        return Interval(self.center, self.half_width + amount)

    def narrowed(self, amount: float) -> Interval:
        return Interval(self.center, self.half_width - amount)


def interval_probability(s: SpectrumTable, i: Interval) -> float:
    return float(min(1.0, sum(entry.probability for entry in s.entries if i.contains(entry.eigenvalue))))


def additive_factor(p: float, order: int) -> float:
    """
    The additive correction in the sandwich bounds: (1-p)^(1/4) at order 1 and
    (1-p)^(3/8)/sqrt(3) at order 2.
    """
    if not 0 <= p < 1:
        raise ValueError(f"p must lie in [0, 1), got {p!r}")
    if order == 1:
        return (1 - p) ** 0.25
    if order == 2:
        return (1 - p) ** 0.375 / sqrt(3)
    raise ValueError(f"Sandwich bounds are derived for orders 1 and 2 only, got {order!r}")


def worst_case_error(factor: float) -> float:
    """Largest gap the additive factor f opens between bound and prediction: 2f + f^2."""
    return 2 * factor + factor ** 2


@dataclass(frozen=True)
class SandwichBounds:
    lower: float
    upper: float
    raw_lower: float
    raw_upper: float
    inner: Interval
    outer: Interval
    factor: float

    def contains(self, probability: float, tolerance: float = 0.0) -> bool:
        return self.lower - tolerance <= probability <= self.upper + tolerance


def sandwich_bounds(s: SpectrumTable, i0: Interval, delta: float, p: float, order: int) -> SandwichBounds:
    """
    lower = 1 - (P(b outside I_min)^(1/2) + f)^2 and upper = (P(b in I_max)^(1/2) + f)^2
    with I_min and I_max the interval narrowed and widened by 2 delta and f the
    additive factor; both clamped to [0, 1].

    :raises BoundPreconditionError: unless D > 2 delta.
    """
    if delta < 0:
        raise ValueError(f"Spread must be non-negative, got {delta!r}")
    if not i0.half_width > 2 * delta:
        raise BoundPreconditionError(
            f"Interval half width {i0.half_width:.6g} does not exceed twice the spread {2 * delta:.6g}"
        )
    factor = additive_factor(p, order)
    inner, outer = i0.narrowed(2 * delta), i0.widened(2 * delta)
    outside_inner = max(0.0, 1.0 - interval_probability(s, inner))
    inside_outer = interval_probability(s, outer)
    raw_lower = 1 - (sqrt(outside_inner) + factor) ** 2
    raw_upper = (sqrt(inside_outer) + factor) ** 2
    return SandwichBounds(
        lower=min(max(raw_lower, 0.0), 1.0),
        upper=min(max(raw_upper, 0.0), 1.0),
        raw_lower=raw_lower,
        raw_upper=raw_upper,
        inner=inner,
        outer=outer,
        factor=factor,
    )
