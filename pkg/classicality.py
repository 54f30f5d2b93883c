"""
Classical-sector initial data, error kets and the order-L classicality
criterion, plus the spread of an evolved observable.

State operations represent the single classical mode (N = 1) on a truncated
Fock basis; classical variable 1 is the position and 2 the momentum.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence as SequenceType

import numpy as np
from sympy.utilities.iterables import multiset_permutations

import fock
from constants import GeneratorKind, NORMALIZATION_TOLERANCE, VERDICT_TOLERANCE
from hybrid_algebra import (
    HybridObservable,
    PhasePoint,
    classical_derivative,
    evaluate_classical,
    to_matrix,
    variable_label,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClassicalData:
    """Initial values O_i^0 and strictly positive margins delta_i, both in phase-point order."""

    centers: tuple[float, ...]
    margins: tuple[float, ...]

    def __post_init__(self) -> None:
        centers = tuple(float(c) for c in self.centers)
        margins = tuple(float(m) for m in self.margins)
        if not centers or len(centers) % 2:
            raise ValueError(f"centers must hold 2N values, got {len(centers)}")
        if len(margins) != len(centers):
            raise ValueError(f"margins must hold {len(centers)} values, got {len(margins)}")
        if any(not m > 0 for m in margins):
            raise ValueError(f"margins must be strictly positive, got {margins}")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "margins", margins)

    @property
    def n_classical(self) -> int:
        return len(self.centers) // 2

    @property
    def point(self) -> PhasePoint:
        return PhasePoint(self.centers)


@dataclass(frozen=True, eq=False)
class SectorState:
    """A normalized amplitude vector on the truncated number basis of one mode."""

    amplitudes: np.ndarray
    hbar: float = 1.0

    def __post_init__(self) -> None:
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.size < 2:
            raise ValueError(f"A sector state needs dim >= 2, got {amplitudes.size}")
        norm = float(np.linalg.norm(amplitudes))
        if abs(norm ** 2 - 1) > NORMALIZATION_TOLERANCE:
            raise ValueError(f"Sector state is not normalized (norm^2 = {norm ** 2:.12f})")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "hbar", float(self.hbar))

    @classmethod
    def from_amplitudes(cls, amplitudes: SequenceType[complex], hbar: float = 1.0) -> SectorState:
        """Build a state from user amplitudes, renormalizing them with a warning when needed."""
        vector = np.array(amplitudes, dtype=complex).reshape(-1)
        norm = float(np.linalg.norm(vector))
        if norm == 0:
            raise ValueError("Amplitude vector is zero")
        if abs(norm ** 2 - 1) > NORMALIZATION_TOLERANCE:
            warnings.warn(f"Renormalizing amplitude vector with norm^2 = {norm ** 2:.6g}", RuntimeWarning)
            vector = vector / norm
        return cls(vector, hbar)

    @classmethod
    def number_state(cls, n: int, dim: int, hbar: float = 1.0) -> SectorState:
        if not 0 <= n < dim:
            raise ValueError(f"Number state {n} does not fit in dimension {dim}")
        vector = np.zeros(dim, dtype=complex)
        vector[n] = 1
        return cls(vector, hbar)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def expectation(self, matrix: np.ndarray) -> complex:
        return complex(np.vdot(self.amplitudes, matrix @ self.amplitudes))

    def with_phase(self, angle: float) -> SectorState:
        return SectorState(self.amplitudes * np.exp(1j * angle), self.hbar)


@dataclass(frozen=True)
class Sequence:
    """An ordered list of classical variable indices (i_1, ..., i_n), n >= 1."""

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        indices = tuple(int(i) for i in self.indices)
        if not indices or any(i < 1 for i in indices):
            raise ValueError(f"A sequence needs at least one index >= 1, got {indices}")
        object.__setattr__(self, "indices", indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __add__(self, other: Sequence) -> Sequence:
        return Sequence(self.indices + other.indices)

    def label(self, n_classical: int = 1) -> str:
        return "(" + ",".join(variable_label(i, n_classical) for i in self.indices) + ")"


def coherent_state(center_q: float, center_p: float, dim: int, hbar: float = 1.0) -> SectorState:
    """
    Coherent state centred at (center_q, center_p).

    :raises fock.TruncationError: if dim cannot hold the state.
    """
    return SectorState(fock.coherent_amplitudes(center_q, center_p, dim, hbar), hbar)


def _variable_matrix(i: int, dim: int, hbar: float) -> np.ndarray:
    if i not in (1, 2):
        raise ValueError(f"Classical variable {i} is not represented; state numerics cover one classical mode")
    return fock.quadrature(GeneratorKind.POSITION if i == 1 else GeneratorKind.MOMENTUM, dim, hbar)


def _require_single_mode(data: ClassicalData) -> None:
    if data.n_classical != 1:
        raise ValueError(f"State numerics support one classical mode, data has {data.n_classical}")


def error_ket(seq: Sequence, state: SectorState, data: ClassicalData) -> np.ndarray:
    """
    (O_i1 - O_i1^0) ... (O_in - O_in^0) |state>, unnormalized. The factor of
    i_n acts on the state first.
    """
    _require_single_mode(data)
    vector = np.array(state.amplitudes)
    identity = np.eye(state.dim)
    for i in reversed(seq.indices):
        shifted = _variable_matrix(i, state.dim, state.hbar) - data.centers[i - 1] * identity
        vector = shifted @ vector
    return vector


def margin_product(seq: Sequence, data: ClassicalData) -> float:
    return float(np.prod([data.margins[i - 1] for i in seq.indices]))


def _first_order_sequences(observables: Iterable[HybridObservable]) -> set[tuple[int, ...]]:
    """
    Orderings of every non-zero derivative multi-index beta <= alpha over
    all monomials x^alpha; each such mixed derivative is non-vanishing.
    """
    found: set[tuple[int, ...]] = set()
    for observable in observables:
        for alpha in observable.terms:
            for beta in product(*(range(power + 1) for power in alpha)):
                if not any(beta):
                    continue
                multiset = [i + 1 for i, power in enumerate(beta) for _ in range(power)]
                for ordering in multiset_permutations(multiset):
                    found.add(tuple(ordering))
    return found


def relevant_sequences(observables: Iterable[HybridObservable], order: int) -> list[Sequence]:
    """
    Sequences entering the order-L criterion for observables already evolved to
    every requested time. Order 1 takes each index sequence along which some
    mixed classical derivative is non-zero; order L concatenates L of them.
    """
    if not isinstance(order, int) or order < 1:
        raise ValueError(f"Classicality order must be an integer >= 1, got {order!r}")
    first = sorted(_first_order_sequences(observables), key=lambda s: (len(s), s))
    combined = {tuple(i for part in parts for i in part) for parts in product(first, repeat=order)} if first else set()
    return [Sequence(indices) for indices in sorted(combined, key=lambda s: (len(s), s))]


@dataclass(frozen=True)
class SequenceCheck:
    sequence: Sequence
    norm_squared: float
    bound: float
    passed: bool


@dataclass(frozen=True)
class ClassicalityReport:
    checks: tuple[SequenceCheck, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> list[SequenceCheck]:
        return [check for check in self.checks if not check.passed]


def check_classicality(state: SectorState, data: ClassicalData, seqs: Iterable[Sequence]) -> ClassicalityReport:
    """<E|E> <= delta_S^2 for every sequence; an empty list passes vacuously."""
    checks = []
    for seq in seqs:
        ket = error_ket(seq, state, data)
        norm_squared = float(np.vdot(ket, ket).real)
        bound = margin_product(seq, data) ** 2
        passed = norm_squared <= bound + VERDICT_TOLERANCE
        if not passed:
            logger.info("Sequence %s violates the classicality bound: %.6g > %.6g", seq.label(data.n_classical),
                        norm_squared, bound)
        checks.append(SequenceCheck(seq, norm_squared, bound, passed))
    return ClassicalityReport(tuple(checks))


def _derivative_matrices(b_evolved: HybridObservable, data: ClassicalData, dim: int) -> list[np.ndarray]:
    point = data.point
    return [
        to_matrix(evaluate_classical(classical_derivative(b_evolved, i), point), dim, b_evolved.n_classical)
        for i in range(1, 2 * b_evolved.n_classical + 1)
    ]


def _check_spread_arguments(p: float, order: int) -> None:
    if not 0 <= p < 1:
        raise ValueError(f"p must lie in [0, 1), got {p!r}")
    if not isinstance(order, int) or order < 1:
        raise ValueError(f"Classicality order must be an integer >= 1, got {order!r}")


def spread_factor(p: float, order: int) -> float:
    """(1 - p)^(1/(2L)), the divisor turning delta_B into the spread."""
    _check_spread_arguments(p, order)
    return (1 - p) ** (1 / (2 * order))


def spread_bound(b_evolved: HybridObservable, data: ClassicalData, eigvec: np.ndarray, p: float, order: int) -> float:
    """
    sum_i ||(dB/dO_i at the centers) eigvec|| delta_i / (1 - p)^(1/(2L)).

    :raises ValueError: for p outside [0, 1) or an order below 1.
    """
    _check_spread_arguments(p, order)
    if len(data.centers) != 2 * b_evolved.n_classical:
        raise ValueError("Classical data and observable disagree on N")
    eigvec = np.asarray(eigvec, dtype=complex)
    delta_b = sum(
        float(np.linalg.norm(matrix @ eigvec)) * margin
        for matrix, margin in zip(_derivative_matrices(b_evolved, data, eigvec.size), data.margins)
    )
    return delta_b / spread_factor(p, order)


def first_order_delta_b(b_evolved: HybridObservable, data: ClassicalData, eigvec: np.ndarray,
                        phi_c: SectorState) -> float:
    """
    Norm of the first-order error ket sum_i (O_i - O_i^0)|phi_c> (x) (dB/dO_i)|b>,
    ordered classical mode first. The triangle sum in spread_bound bounds it from above
    when the margins dominate the error-ket norms.
    """
    _require_single_mode(data)
    eigvec = np.asarray(eigvec, dtype=complex)
    total = np.zeros(phi_c.dim * eigvec.size, dtype=complex)
    for i, matrix in enumerate(_derivative_matrices(b_evolved, data, eigvec.size), start=1):
        total += np.kron(error_ket(Sequence((i,)), phi_c, data), matrix @ eigvec)
    return float(np.linalg.norm(total))
