"""
Hybrid observables: polynomials on the classical phase space whose
coefficients are operator polynomials of the quantum sector.

A classical multi-index lists 2N exponents in the order (q1..qN, p1..pN)
and classical variable i (1-based) refers to entry i of that vector.
Quantum coefficients use the global generator numbering of weyl_algebra,
so the first quantum position is generator 2N+1.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from math import exp, lgamma, log
from types import MappingProxyType
from typing import Iterator, Mapping, Sequence, Union

import numpy as np

import fock
from constants import GeneratorKind, Sector
from weyl_algebra import (
    GeneratorId,
    HbarMismatchError,
    IDENTITY_WORD,
    OperatorPolynomial,
    Scalar,
    Word,
    adjoint,
    commutator,
    contraction_weight,
    format_word,
    parse_generator,
    product_terms,
    symmetric_norm,
)

MultiIndex = tuple[int, ...]


class IncompatibleObservablesError(ValueError):
    pass


@dataclass(frozen=True)
class PhasePoint:
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        if not values or len(values) % 2:
            raise ValueError(f"A phase point needs 2N values, got {len(values)}")
        object.__setattr__(self, "values", values)

    @property
    def n_classical(self) -> int:
        return len(self.values) // 2

    def __getitem__(self, i: int) -> float:
        return self.values[i]

    def __len__(self) -> int:
        return len(self.values)


def variable_index(label: str, n_classical: int) -> int:
    """Classical variable number (1..2N) of a label such as "q1" or "p2"."""
    generator = parse_generator(label, n_classical)
    if generator.sector(n_classical) != Sector.CLASSICAL:
        raise ValueError(f"{label!r} is not a classical variable")
    return generator.mode if generator.kind == GeneratorKind.POSITION else n_classical + generator.mode


def variable_label(i: int, n_classical: int) -> str:
    if not 1 <= i <= 2 * n_classical:
        raise ValueError(f"Classical variable index {i} outside 1..{2 * n_classical}")
    return f"q{i}" if i <= n_classical else f"p{i - n_classical}"


@dataclass(frozen=True)
class HybridObservable:
    """
    sum over classical multi-indices alpha of x^alpha * A_alpha, with every
    A_alpha a non-zero OperatorPolynomial in quantum-sector generators only.
    """

    terms: Mapping[MultiIndex, OperatorPolynomial]
    n_classical: int = 1
    hbar: float = 1.0

    def __post_init__(self) -> None:
        if not isinstance(self.n_classical, int) or self.n_classical < 1:
            raise ValueError(f"n_classical must be a positive integer, got {self.n_classical!r}")
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar!r}")
        hbar = float(self.hbar)
        width = 2 * self.n_classical
        cleaned: dict[MultiIndex, OperatorPolynomial] = {}
        for exponents, coeff in dict(self.terms).items():
            exponents = tuple(int(e) for e in exponents)
            if len(exponents) != width or any(e < 0 for e in exponents):
                raise ValueError(f"Classical exponents {exponents} must be {width} non-negative integers")
            if not isinstance(coeff, OperatorPolynomial):
                coeff = OperatorPolynomial.scalar(coeff, hbar)
            if coeff.hbar != hbar:
                raise HbarMismatchError(f"Coefficient with hbar={coeff.hbar} in an observable with hbar={hbar}")
            if any(index <= width for index in coeff.generators()):
                raise ValueError(f"Coefficient of {exponents} contains classical-sector generators")
            if coeff.is_zero():
                continue
            cleaned[exponents] = coeff if exponents not in cleaned else cleaned[exponents] + coeff
            if cleaned[exponents].is_zero():
                del cleaned[exponents]
        object.__setattr__(self, "hbar", hbar)
        object.__setattr__(self, "terms", MappingProxyType(cleaned))

    @classmethod
    def zero(cls, n_classical: int = 1, hbar: float = 1.0) -> HybridObservable:
        return cls({}, n_classical, hbar)

    @classmethod
    def constant(cls, value: Scalar, n_classical: int = 1, hbar: float = 1.0) -> HybridObservable:
        return cls({(0,) * (2 * n_classical): OperatorPolynomial.scalar(value, hbar)}, n_classical, hbar)

    @classmethod
    def identity(cls, n_classical: int = 1, hbar: float = 1.0) -> HybridObservable:
        return cls.constant(1.0, n_classical, hbar)

    @classmethod
    def classical_monomial(cls, exponents: Sequence[int], coeff: Scalar = 1.0, n_classical: int = 1,
                           hbar: float = 1.0) -> HybridObservable:
        return cls({tuple(exponents): OperatorPolynomial.scalar(coeff, hbar)}, n_classical, hbar)

    @classmethod
    def classical_variable(cls, i: int, n_classical: int = 1, hbar: float = 1.0) -> HybridObservable:
        variable_label(i, n_classical)
        exponents = [0] * (2 * n_classical)
        exponents[i - 1] = 1
        return cls.classical_monomial(exponents, 1.0, n_classical, hbar)

    @classmethod
    def quantum(cls, op: OperatorPolynomial, n_classical: int = 1) -> HybridObservable:
        return cls({(0,) * (2 * n_classical): op}, n_classical, op.hbar)

    @classmethod
    def variable(cls, label: str, n_classical: int = 1, hbar: float = 1.0) -> HybridObservable:
        """The observable for one generator label: "q1"/"p1" classical, "Q1"/"P1" quantum."""
        generator = parse_generator(label, n_classical)
        if generator.sector(n_classical) == Sector.CLASSICAL:
            return cls.classical_variable(variable_index(label, n_classical), n_classical, hbar)
        return cls.quantum(OperatorPolynomial.generator(generator.index, hbar), n_classical)

    def __iter__(self) -> Iterator[tuple[MultiIndex, OperatorPolynomial]]:
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)

    def coefficient(self, exponents: Sequence[int]) -> OperatorPolynomial:
        return self.terms.get(tuple(exponents), OperatorPolynomial.zero(self.hbar))

    def is_zero(self) -> bool:
        return not self.terms

    def is_classical(self) -> bool:
        """True when every coefficient is a multiple of the identity."""
        return all(coeff.is_scalar() for coeff in self.terms.values())

    @property
    def classical_degree(self) -> int:
        return max((sum(exponents) for exponents in self.terms), default=0)

    def norm(self) -> float:
        """
        Coefficient norm: the sum over classical monomials of the symmetric-basis
        norm of each operator coefficient. Every residual check is taken in it.
        """
        return float(sum(symmetric_norm(coeff) for coeff in self.terms.values()))

    def truncate_degree(self, cap: int) -> tuple[HybridObservable, float]:
        """Drop classical monomials of total degree above cap; returns the kept part and the dropped norm."""
        kept = {e: c for e, c in self.terms.items() if sum(e) <= cap}
        dropped = sum(symmetric_norm(c) for e, c in self.terms.items() if sum(e) > cap)
        return HybridObservable(kept, self.n_classical, self.hbar), float(dropped)

    def pruned(self) -> HybridObservable:
        """The same observable with every coefficient re-pruned at the threshold now in force."""
        return HybridObservable({e: OperatorPolynomial(dict(c.terms), self.hbar) for e, c in self.terms.items()},
                                self.n_classical, self.hbar)

    def prune_by_weight(self, tolerance: float) -> HybridObservable:
        """
        Drop every term whose coefficient times the contraction weight of its
        classical monomial and quantum word is below tolerance.
        """
        buckets: dict[MultiIndex, dict[Word, complex]] = {}
        for exponents, coeff in self.terms.items():
            weight = _classical_weight(exponents, self.hbar)
            kept = {word: c for word, c in coeff.terms.items()
                    if abs(c) * weight * contraction_weight(word, self.hbar) >= tolerance}
            if kept:
                buckets[exponents] = kept
        return HybridObservable._from_buckets(buckets, self.n_classical, self.hbar)

    @classmethod
    def _from_buckets(cls, buckets: Mapping[MultiIndex, Mapping[Word, complex]], n_classical: int,
                      hbar: float) -> HybridObservable:
        return cls({gamma: OperatorPolynomial(bucket, hbar) for gamma, bucket in buckets.items()}, n_classical, hbar)

    def _check_compatible(self, other: HybridObservable) -> None:
        if self.n_classical != other.n_classical:
            raise IncompatibleObservablesError(
                f"Observables over {self.n_classical} and {other.n_classical} classical modes cannot be combined"
            )
        if self.hbar != other.hbar:
            raise HbarMismatchError(f"Cannot combine observables with hbar={self.hbar} and hbar={other.hbar}")

    def _lift(self, other: Union[HybridObservable, Scalar]) -> HybridObservable:
        if isinstance(other, HybridObservable):
            self._check_compatible(other)
            return other
        return HybridObservable.constant(other, self.n_classical, self.hbar)

    def __add__(self, other: Union[HybridObservable, Scalar]) -> HybridObservable:
        other = self._lift(other)
        terms = dict(self.terms)
        for exponents, coeff in other.terms.items():
            terms[exponents] = terms[exponents] + coeff if exponents in terms else coeff
        return HybridObservable(terms, self.n_classical, self.hbar)

    __radd__ = __add__

    def __neg__(self) -> HybridObservable:
        return HybridObservable({e: -c for e, c in self.terms.items()}, self.n_classical, self.hbar)

    def __sub__(self, other: Union[HybridObservable, Scalar]) -> HybridObservable:
        return self + (-self._lift(other))

    def __rsub__(self, other: Scalar) -> HybridObservable:
        return (-self) + other

    def __mul__(self, other: Scalar) -> HybridObservable:
        if isinstance(other, (HybridObservable, OperatorPolynomial)):
            return NotImplemented
        return HybridObservable({e: c * other for e, c in self.terms.items()}, self.n_classical, self.hbar)

    __rmul__ = __mul__

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exponents, coeff in sorted(self.terms.items()):
            monomial = "*".join(
                f"{variable_label(i + 1, self.n_classical)}^{e}" if e > 1 else variable_label(i + 1, self.n_classical)
                for i, e in enumerate(exponents) if e
            ) or "1"
            quantum = " + ".join(
                f"({c:.6g})*{format_word(word, self.n_classical)}" for word, c in sorted(coeff.terms.items())
            )
            parts.append(f"{monomial} [{quantum}]")
        return " + ".join(parts)


@lru_cache(maxsize=1 << 14)
def _classical_weight(exponents: MultiIndex, hbar: float) -> float:
    """sqrt(prod e!) (hbar/2)^(|e|/2), the classical counterpart of weyl_algebra.contraction_weight."""
    return exp(0.5 * (sum(lgamma(e + 1) for e in exponents) + sum(exponents) * log(hbar / 2)))


@lru_cache(maxsize=1 << 12)
def _contractions(left_power: int, right_power: int, scale: complex) -> np.ndarray:
    """z^i P(m, i) P(n, i) / i! for i = 0..min(m, n), with P the falling factorial."""
    values = np.ones(min(left_power, right_power) + 1, dtype=complex)
    for i in range(1, values.size):
        values[i] = values[i - 1] * scale * (left_power - i + 1) * (right_power - i + 1) / i
    values.setflags(write=False)
    return values


@lru_cache(maxsize=1 << 18)
def _moyal_monomial(left: MultiIndex, right: MultiIndex, n_classical: int, hbar: float) -> tuple[tuple[MultiIndex, complex], ...]:
    """
    Scalar part of x^left exp((i hbar / 2) J) x^right, one classical pair at a time.

    Inside a pair the n-th order term takes i derivatives in q from the left
    and in p from the right, and n - i the other way round, with weight
    (i hbar/2)^i (-i hbar/2)^(n-i) / (i! (n-i)!) times falling factorials.
    The weight factors, so the terms of every order come out of one convolution.
    """
    per_pair = []
    for j in range(n_classical):
        a_q, a_p = left[j], left[n_classical + j]
        b_q, b_p = right[j], right[n_classical + j]
        weights = np.convolve(_contractions(a_q, b_p, 0.5j * hbar), _contractions(a_p, b_q, -0.5j * hbar))
        per_pair.append([((a_q + b_q - n, a_p + b_p - n), complex(w)) for n, w in enumerate(weights)])
    result: dict[MultiIndex, complex] = {}
    for choice in product(*per_pair):
        exponents = [0] * (2 * n_classical)
        coeff = 1 + 0j
        for j, ((q_power, p_power), value) in enumerate(choice):
            exponents[j] = q_power
            exponents[n_classical + j] = p_power
            coeff *= value
        key = tuple(exponents)
        result[key] = result.get(key, 0) + coeff
    return tuple(result.items())


def star(a: HybridObservable, b: HybridObservable) -> HybridObservable:
    """
    Hybrid star product a exp((i hbar/2) J) b. The series over J terminates
    for polynomials; the coefficient of a always multiplies from the left.
    Coefficient products are accumulated unpruned and the threshold applies
    to the finished coefficients only.

    :raises IncompatibleObservablesError: for different N.
    :raises HbarMismatchError: for different hbar.
    """
    a._check_compatible(b)
    hbar, n_classical = a.hbar, a.n_classical
    buckets: dict[MultiIndex, dict[Word, complex]] = {}
    for alpha, a_coeff in a.terms.items():
        for beta, b_coeff in b.terms.items():
            quantum = product_terms(a_coeff.terms, b_coeff.terms, hbar)
            for gamma, scale in _moyal_monomial(alpha, beta, n_classical, hbar):
                bucket = buckets.setdefault(gamma, {})
                for word, c in quantum.items():
                    bucket[word] = bucket.get(word, 0) + scale * c
    return HybridObservable._from_buckets(buckets, n_classical, hbar)


def bracket(a: HybridObservable, b: HybridObservable) -> HybridObservable:
    return star(a, b) - star(b, a)


def pointwise_product(a: HybridObservable, b: HybridObservable) -> HybridObservable:
    """Ordinary product of symbols, a's coefficient on the left; the n = 0 term of star."""
    a._check_compatible(b)
    buckets: dict[MultiIndex, dict[Word, complex]] = {}
    for alpha, a_coeff in a.terms.items():
        for beta, b_coeff in b.terms.items():
            bucket = buckets.setdefault(tuple(x + y for x, y in zip(alpha, beta)), {})
            for word, c in product_terms(a_coeff.terms, b_coeff.terms, a.hbar).items():
                bucket[word] = bucket.get(word, 0) + c
    return HybridObservable._from_buckets(buckets, a.n_classical, a.hbar)


def classical_derivative(a: HybridObservable, i: int) -> HybridObservable:
    """
    Partial derivative with respect to classical variable i (1..2N).

    :raises ValueError: for an index outside 1..2N.
    """
    if not isinstance(i, (int, np.integer)) or not 1 <= i <= 2 * a.n_classical:
        raise ValueError(f"Classical variable index {i!r} outside 1..{2 * a.n_classical}")
    terms = {}
    for exponents, coeff in a.terms.items():
        power = exponents[i - 1]
        if power:
            lowered = list(exponents)
            lowered[i - 1] -= 1
            terms[tuple(lowered)] = coeff * power
    return HybridObservable(terms, a.n_classical, a.hbar)


def poisson_bracket_ordered(a: HybridObservable, b: HybridObservable) -> HybridObservable:
    """sum_j d_qj a * d_pj b - d_pj a * d_qj b with pointwise products that keep a on the left."""
    a._check_compatible(b)
    n = a.n_classical
    total = HybridObservable.zero(n, a.hbar)
    for j in range(1, n + 1):
        total = total + pointwise_product(classical_derivative(a, j), classical_derivative(b, n + j))
        total = total - pointwise_product(classical_derivative(a, n + j), classical_derivative(b, j))
    return total


def bt_bracket(a: HybridObservable, b: HybridObservable) -> HybridObservable:
    """
    First-order truncation of the hybrid bracket: the pointwise commutator of
    coefficients plus (i hbar/2)({a,b} - {b,a}) with ordered Poisson terms.
    Not a Lie bracket in general.
    """
    commutator_part = pointwise_product(a, b) - pointwise_product(b, a)
    poisson_part = poisson_bracket_ordered(a, b) - poisson_bracket_ordered(b, a)
    return commutator_part + poisson_part * (0.5j * a.hbar)


def dagger(a: HybridObservable) -> HybridObservable:
    return HybridObservable({e: adjoint(c) for e, c in a.terms.items()}, a.n_classical, a.hbar)


def hermiticity_residual(a: HybridObservable) -> float:
    return (dagger(a) - a).norm()


def quantum_commutator(a: OperatorPolynomial, b: OperatorPolynomial, n_classical: int = 1) -> HybridObservable:
    return HybridObservable.quantum(commutator(a, b), n_classical)


def evaluate_classical(a: HybridObservable, pt: Union[PhasePoint, Sequence[float]]) -> OperatorPolynomial:
    """Substitute classical values, leaving the quantum-sector operator polynomial."""
    if not isinstance(pt, PhasePoint):
        pt = PhasePoint(tuple(pt))
    if len(pt) != 2 * a.n_classical:
        raise ValueError(f"Phase point has {len(pt)} values, expected {2 * a.n_classical}")
    total = OperatorPolynomial.zero(a.hbar)
    for exponents, coeff in a.terms.items():
        weight = 1.0
        for value, power in zip(pt.values, exponents):
            weight *= value ** power
        total = total + coeff * weight
    return total


def to_matrix(op: OperatorPolynomial, dim: int, n_classical: int = 1) -> np.ndarray:
    """
    Dense dim x dim matrix of a single-mode quantum operator polynomial on the
    truncated number basis; each normal-ordered word Q^a P^b becomes Q^a @ P^b.

    :raises ValueError: when op has classical-sector generators or more than one quantum mode.
    """
    modes = op.modes()
    if any(mode <= n_classical for mode in modes):
        raise ValueError("to_matrix only represents quantum-sector generators")
    if len(modes) > 1:
        raise ValueError(f"to_matrix supports one quantum mode, got modes {sorted(modes)}")
    q_matrix, p_matrix = fock.position(dim, op.hbar), fock.momentum(dim, op.hbar)
    matrix = np.zeros((dim, dim), dtype=complex)
    for word, coeff in op.terms.items():
        if word == IDENTITY_WORD:
            matrix += coeff * np.eye(dim)
            continue
        q_power = sum(1 for index in word if GeneratorId(index).kind == GeneratorKind.POSITION)
        p_power = len(word) - q_power
        matrix += coeff * (np.linalg.matrix_power(q_matrix, q_power) @ np.linalg.matrix_power(p_matrix, p_power))
    return matrix
