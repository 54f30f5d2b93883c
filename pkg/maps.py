"""
Dequantization and symmetric quantization maps between the full quantum
algebra, the hybrid algebra and commutative phase-space polynomials.

Every map goes through weyl_algebra.to_symmetric_basis (or its inverse), so
quantize_hq composed with dequantize_total equals dequantize_hq by construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Optional

from hybrid_algebra import HybridObservable, MultiIndex
from weyl_algebra import (
    OperatorPolynomial,
    Word,
    from_symmetric_basis,
    multiply,
    prune_tolerance,
    symmetrize,
    to_symmetric_basis,
)

FullIndex = tuple[int, ...]


@dataclass(frozen=True)
class ClassicalPolynomial:
    """
    Commutative polynomial over all 2(N+M) phase-space variables. Exponent
    entry g-1 belongs to generator g, so quantum-sector symbols share the
    generator index space.
    """

    terms: Mapping[FullIndex, complex]
    n_classical: int = 1
    n_quantum: int = 1
    hbar: float = 1.0

    def __post_init__(self) -> None:
        width = 2 * (self.n_classical + self.n_quantum)
        cleaned: dict[FullIndex, complex] = {}
        for exponents, coeff in dict(self.terms).items():
            exponents = tuple(int(e) for e in exponents)
            if len(exponents) != width or any(e < 0 for e in exponents):
                raise ValueError(f"Exponents {exponents} must be {width} non-negative integers")
            cleaned[exponents] = cleaned.get(exponents, 0) + complex(coeff)
        tolerance = prune_tolerance()
        cleaned = {e: c for e, c in cleaned.items() if c != 0 and abs(c) >= tolerance}
        object.__setattr__(self, "hbar", float(self.hbar))
        object.__setattr__(self, "terms", MappingProxyType(cleaned))

    def coefficient(self, exponents: FullIndex) -> complex:
        return self.terms.get(tuple(exponents), 0j)

    def __add__(self, other: ClassicalPolynomial) -> ClassicalPolynomial:
        terms = dict(self.terms)
        for exponents, coeff in other.terms.items():
            terms[exponents] = terms.get(exponents, 0) + coeff
        return ClassicalPolynomial(terms, self.n_classical, self.n_quantum, self.hbar)


def _word_of(exponents: FullIndex) -> Word:
    return tuple(g + 1 for g, power in enumerate(exponents) for _ in range(power))


def _full_index(word: Word, width: int) -> FullIndex:
    exponents = [0] * width
    for index in word:
        exponents[index - 1] += 1
    return tuple(exponents)


def _split(word: Word, n_classical: int) -> tuple[MultiIndex, Word]:
    """Classical exponents in phase-point order and the quantum remainder of a sorted word."""
    exponents = [0] * (2 * n_classical)
    quantum = []
    for index in word:
        if index <= 2 * n_classical:
            mode = (index + 1) // 2
            exponents[mode - 1 if index % 2 else n_classical + mode - 1] += 1
        else:
            quantum.append(index)
    return tuple(exponents), tuple(quantum)


def _classical_word(exponents: MultiIndex, n_classical: int) -> Word:
    word = []
    for m in range(1, n_classical + 1):
        word.extend([2 * m - 1] * exponents[m - 1])
        word.extend([2 * m] * exponents[n_classical + m - 1])
    return tuple(word)


def dequantize_hq(a: OperatorPolynomial, n_classical: int = 1) -> HybridObservable:
    """
    Replace every classical-sector symmetric factor by its phase-space monomial
    and keep the quantum-sector symmetric factor as an operator.
    """
    terms: dict[MultiIndex, OperatorPolynomial] = {}
    for word, coeff in to_symmetric_basis(a).items():
        exponents, quantum = _split(word, n_classical)
        piece = symmetrize(quantum, a.hbar) * coeff
        terms[exponents] = terms[exponents] + piece if exponents in terms else piece
    return HybridObservable(terms, n_classical, a.hbar)


def quantize_hq(c: ClassicalPolynomial) -> HybridObservable:
    """Classical variables stay monomials; each quantum monomial becomes its Weyl-symmetrized word."""
    terms: dict[MultiIndex, OperatorPolynomial] = {}
    for full, coeff in c.terms.items():
        exponents, quantum = _split(_word_of(full), c.n_classical)
        piece = symmetrize(quantum, c.hbar) * coeff
        terms[exponents] = terms[exponents] + piece if exponents in terms else piece
    return HybridObservable(terms, c.n_classical, c.hbar)


def dequantize_total(a: OperatorPolynomial, n_classical: int = 1, n_quantum: Optional[int] = None) -> ClassicalPolynomial:
    if n_quantum is None:
        n_quantum = max(max(a.modes(), default=0) - n_classical, 1)
    width = 2 * (n_classical + n_quantum)
    if any(index > width for index in a.generators()):
        raise ValueError(f"Polynomial uses modes beyond N + M = {n_classical + n_quantum}")
    terms = {_full_index(word, width): coeff for word, coeff in to_symmetric_basis(a).items()}
    return ClassicalPolynomial(terms, n_classical, n_quantum, a.hbar)


def quantize_total(c: ClassicalPolynomial) -> OperatorPolynomial:
    return from_symmetric_basis({_word_of(full): coeff for full, coeff in c.terms.items()}, c.hbar)


def requantize(h: HybridObservable) -> OperatorPolynomial:
    """
    Lift a hybrid observable back to the full quantum algebra, the inverse of
    dequantize_hq. Classical monomials become symmetrized classical words; they
    commute with the quantum coefficients.
    """
    total = OperatorPolynomial.zero(h.hbar)
    for exponents, coeff in h.terms.items():
        total = total + multiply(symmetrize(_classical_word(exponents, h.n_classical), h.hbar), coeff)
    return total
