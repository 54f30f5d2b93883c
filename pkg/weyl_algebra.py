"""
Noncommuting polynomials in the canonical generators of an (N+M)-mode system.

Generator 2m-1 is q_m and generator 2m is p_m. A word is a tuple of generator
indices; a word is in normal order when its indices are non-decreasing, which
is the same as "modes ascending, positions before momenta inside a mode".
Every OperatorPolynomial stores only normal-ordered words.
"""
from __future__ import annotations

from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from math import comb, exp, factorial, lgamma, log, sqrt
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Union

from constants import GeneratorKind, PRUNE_TOLERANCE, Sector

Word = tuple[int, ...]
Scalar = Union[int, float, complex]

IDENTITY_WORD: Word = ()

_prune_tolerance: ContextVar[float] = ContextVar("prune_tolerance", default=PRUNE_TOLERANCE)


class HbarMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorId:
    """
    One canonical generator.

    Classical modes are labelled q1, p1, ... and quantum modes Q1, P1, ...
    with the quantum mode number counted inside the quantum sector.
    """

    index: int

    def __post_init__(self) -> None:
        if not isinstance(self.index, int) or self.index < 1:
            raise ValueError(f"Generator index must be a positive integer, got {self.index!r}")

    @classmethod
    def of(cls, kind: GeneratorKind, mode: int) -> GeneratorId:
        offset = 1 if kind == GeneratorKind.POSITION else 0
        return cls(2 * mode - offset)

    @property
    def mode(self) -> int:
        return (self.index + 1) // 2

    @property
    def kind(self) -> GeneratorKind:
        return GeneratorKind.POSITION if self.index % 2 == 1 else GeneratorKind.MOMENTUM

    def sector(self, n_classical: int) -> Sector:
        return Sector.CLASSICAL if self.mode <= n_classical else Sector.QUANTUM

    def label(self, n_classical: int) -> str:
        if self.sector(n_classical) == Sector.CLASSICAL:
            letter = "q" if self.kind == GeneratorKind.POSITION else "p"
            return f"{letter}{self.mode}"
        letter = "Q" if self.kind == GeneratorKind.POSITION else "P"
        return f"{letter}{self.mode - n_classical}"


def parse_generator(label: str, n_classical: int) -> GeneratorId:
    """
    Turn a label such as "q1", "p2", "Q", "P1" into a generator.
    Lowercase letters address classical modes, uppercase quantum modes;
    a missing mode number means mode 1 of that sector.

    :raises ValueError: for malformed labels or classical modes beyond N.
    """
    text = str(label).strip()
    if not text or text[0] not in "qpQP":
        raise ValueError(f"Unknown generator label {label!r}")
    digits = text[1:] or "1"
    if not digits.isdigit() or int(digits) < 1:
        raise ValueError(f"Unknown generator label {label!r}")
    mode = int(digits)
    kind = GeneratorKind.POSITION if text[0] in "qQ" else GeneratorKind.MOMENTUM
    if text[0].islower():
        if mode > n_classical:
            raise ValueError(f"Generator {label!r} refers to classical mode {mode} but N = {n_classical}")
        return GeneratorId.of(kind, mode)
    return GeneratorId.of(kind, n_classical + mode)


def format_word(word: Word, n_classical: int = 0) -> str:
    if not word:
        return "1"
    return " ".join(GeneratorId(index).label(n_classical) for index in word)


def is_normal_ordered(word: Word) -> bool:
    return all(word[i] <= word[i + 1] for i in range(len(word) - 1))


def _mode_powers(word: Word) -> dict[int, tuple[int, int]]:
    """Exponents (of q_m, of p_m) per mode of a normal-ordered word."""
    powers: dict[int, list[int]] = {}
    for index in word:
        entry = powers.setdefault((index + 1) // 2, [0, 0])
        entry[0 if index % 2 == 1 else 1] += 1
    return {mode: (qs, ps) for mode, (qs, ps) in powers.items()}


def _word_from_powers(powers: Mapping[int, tuple[int, int]]) -> Word:
    word: list[int] = []
    for mode in sorted(powers):
        qs, ps = powers[mode]
        word.extend([2 * mode - 1] * qs)
        word.extend([2 * mode] * ps)
    return tuple(word)


def _combine_modes(per_mode: list[tuple[int, list[tuple[tuple[int, int], complex]]]]) -> tuple[tuple[Word, complex], ...]:
    """Tensor the per-mode expansions of a product; distinct modes commute."""
    result: dict[Word, complex] = {}
    modes = [mode for mode, _ in per_mode]
    for choice in product(*(options for _, options in per_mode)):
        coeff = 1 + 0j
        powers = {}
        for mode, (exponents, value) in zip(modes, choice):
            coeff *= value
            powers[mode] = exponents
        word = _word_from_powers(powers)
        result[word] = result.get(word, 0) + coeff
    return tuple(result.items())


@lru_cache(maxsize=1 << 18)
def _monomial_product(left: Word, right: Word, hbar: float) -> tuple[tuple[Word, complex], ...]:
    """
    Normal-ordered expansion of left*right for two normal-ordered words.

    Inside one mode q^a p^b q^c p^d = sum_k k! C(b,k) C(c,k) (-i hbar)^k q^(a+c-k) p^(b+d-k).

    :complexity: O(prod over shared modes of min(b, c) + 1)
    """
    if not left:
        return ((right, 1 + 0j),)
    if not right:
        return ((left, 1 + 0j),)
    lp, rp = _mode_powers(left), _mode_powers(right)
    per_mode = []
    for mode in sorted(set(lp) | set(rp)):
        a, b = lp.get(mode, (0, 0))
        c, d = rp.get(mode, (0, 0))
        options = [
            ((a + c - k, b + d - k), factorial(k) * comb(b, k) * comb(c, k) * (-1j * hbar) ** k)
            for k in range(min(b, c) + 1)
        ]
        per_mode.append((mode, options))
    return _combine_modes(per_mode)


@lru_cache(maxsize=1 << 16)
def _weyl_word(word: Word, hbar: float) -> tuple[tuple[Word, complex], ...]:
    """
    Normal-ordered expansion of the Weyl-symmetrized word (average over all orderings).

    Modes commute, so the average factorizes per mode, and inside a mode
    (q^a p^b)_+ = sum_k k! C(a,k) C(b,k) (-i hbar / 2)^k q^(a-k) p^(b-k).
    """
    powers = _mode_powers(tuple(sorted(word)))
    per_mode = []
    for mode in sorted(powers):
        a, b = powers[mode]
        options = [
            ((a - k, b - k), factorial(k) * comb(a, k) * comb(b, k) * (-0.5j * hbar) ** k)
            for k in range(min(a, b) + 1)
        ]
        per_mode.append((mode, options))
    if not per_mode:
        return ((IDENTITY_WORD, 1 + 0j),)
    return _combine_modes(per_mode)


def prune_tolerance() -> float:
    return _prune_tolerance.get()


@contextmanager
def pruning(tolerance: float) -> Iterator[None]:
    """
    Set the coefficient threshold applied by every constructor inside the block.
    pruning(0.0) keeps everything but exact zeros. The setting is per thread.
    """
    if not tolerance >= 0:
        raise ValueError(f"Pruning tolerance must be non-negative, got {tolerance!r}")
    token = _prune_tolerance.set(float(tolerance))
    try:
        yield
    finally:
        _prune_tolerance.reset(token)


def _pruned(terms: Mapping[Word, complex]) -> dict[Word, complex]:
    tolerance = _prune_tolerance.get()
    return {word: complex(c) for word, c in terms.items() if c != 0 and abs(c) >= tolerance}


@lru_cache(maxsize=1 << 14)
def contraction_weight(word: Word, hbar: float) -> float:
    """
    sqrt(prod a! b!) hbar^(len/2) over the modes of q^a p^b: the size a word
    can reach once it is fully contracted against a partner in a product.
    """
    log_weight = 0.5 * len(word) * log(hbar)
    for qs, ps in _mode_powers(word).values():
        log_weight += 0.5 * (lgamma(qs + 1) + lgamma(ps + 1))
    return exp(log_weight)


@dataclass(frozen=True)
class OperatorPolynomial:
    """
    A complex-linear combination of normal-ordered words.

    Values are immutable; every operation returns a new polynomial.
    """

    terms: Mapping[Word, complex]
    hbar: float = 1.0

    def __post_init__(self) -> None:
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar!r}")
        cleaned = {}
        for word, coeff in _pruned(dict(self.terms)).items():
            word = tuple(word)
            if not is_normal_ordered(word):
                raise ValueError(f"Word {word} is not normal ordered; build it with OperatorPolynomial.from_words")
            if any(not isinstance(index, int) or index < 1 for index in word):
                raise ValueError(f"Word {word} has an invalid generator index")
            cleaned[word] = coeff
        object.__setattr__(self, "hbar", float(self.hbar))
        object.__setattr__(self, "terms", MappingProxyType(cleaned))

    @classmethod
    def zero(cls, hbar: float = 1.0) -> OperatorPolynomial:
        return cls({}, hbar)

    @classmethod
    def identity(cls, hbar: float = 1.0) -> OperatorPolynomial:
        return cls({IDENTITY_WORD: 1.0}, hbar)

    @classmethod
    def scalar(cls, value: Scalar, hbar: float = 1.0) -> OperatorPolynomial:
        return cls({IDENTITY_WORD: value}, hbar)

    @classmethod
    def generator(cls, index: int, hbar: float = 1.0) -> OperatorPolynomial:
        GeneratorId(index)
        return cls({(index,): 1.0}, hbar)

    @classmethod
    def from_words(cls, words: Iterable[tuple[Iterable[int], Scalar]], hbar: float = 1.0) -> OperatorPolynomial:
        """Sum of coefficient * word for arbitrary (not necessarily ordered) words."""
        total = cls.zero(hbar)
        for word, coeff in words:
            total = total + normal_order(tuple(word), hbar) * coeff
        return total

    def __iter__(self) -> Iterator[tuple[Word, complex]]:
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)

    def coefficient(self, word: Word) -> complex:
        return self.terms.get(tuple(word), 0j)

    def is_zero(self) -> bool:
        return not self.terms

    def is_scalar(self) -> bool:
        return all(word == IDENTITY_WORD for word in self.terms)

    @property
    def degree(self) -> int:
        return max((len(word) for word in self.terms), default=0)

    def generators(self) -> set[int]:
        return {index for word in self.terms for index in word}

    def modes(self) -> set[int]:
        return {(index + 1) // 2 for index in self.generators()}

    def _check_hbar(self, other: OperatorPolynomial) -> None:
        if self.hbar != other.hbar:
            raise HbarMismatchError(f"Cannot combine polynomials with hbar={self.hbar} and hbar={other.hbar}")

    def __add__(self, other: Union[OperatorPolynomial, Scalar]) -> OperatorPolynomial:
        if not isinstance(other, OperatorPolynomial):
            other = OperatorPolynomial.scalar(other, self.hbar)
        self._check_hbar(other)
        terms = dict(self.terms)
        for word, coeff in other.terms.items():
            terms[word] = terms.get(word, 0) + coeff
        return OperatorPolynomial(terms, self.hbar)

    __radd__ = __add__

    def __neg__(self) -> OperatorPolynomial:
        return OperatorPolynomial({word: -c for word, c in self.terms.items()}, self.hbar)

    def __sub__(self, other: Union[OperatorPolynomial, Scalar]) -> OperatorPolynomial:
        return self + (-other)

    def __rsub__(self, other: Scalar) -> OperatorPolynomial:
        return (-self) + other

    def __mul__(self, other: Union[OperatorPolynomial, Scalar]) -> OperatorPolynomial:
        if isinstance(other, OperatorPolynomial):
            return multiply(self, other)
        return OperatorPolynomial({word: c * other for word, c in self.terms.items()}, self.hbar)

    def __rmul__(self, other: Scalar) -> OperatorPolynomial:
        return OperatorPolynomial({word: other * c for word, c in self.terms.items()}, self.hbar)

    def max_abs_difference(self, other: OperatorPolynomial) -> float:
        """Largest coefficient-wise difference, the residual used by the identity checks."""
        difference = self - other
        return max((abs(c) for c in difference.terms.values()), default=0.0)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = [f"({coeff:.6g})*{format_word(word)}" for word, coeff in sorted(self.terms.items())]
        return " + ".join(parts)


def normal_order(w: Iterable[int], hbar: float = 1.0) -> OperatorPolynomial:
    """
    Rewrite an arbitrary word into normal form using p_m q_m = q_m p_m - i hbar.

    :complexity: O(len(w) * size of the intermediate normal form)
    """
    word = tuple(w)
    for index in word:
        GeneratorId(index)
    return OperatorPolynomial(_ordered_terms(word, float(hbar)), hbar)


def _ordered_terms(word: Word, hbar: float) -> dict[Word, complex]:
    terms: dict[Word, complex] = {IDENTITY_WORD: 1 + 0j}
    for index in word:
        terms = product_terms(terms, {(index,): 1 + 0j}, hbar)
    return terms


def product_terms(a: Mapping[Word, complex], b: Mapping[Word, complex], hbar: float) -> dict[Word, complex]:
    """
    Normal-ordered coefficients of a*b, unpruned. Callers that rescale the
    product before storing it prune afterwards.
    """
    terms: dict[Word, complex] = {}
    for left, ca in a.items():
        for right, cb in b.items():
            scale = ca * cb
            for word, c in _monomial_product(left, right, hbar):
                terms[word] = terms.get(word, 0) + scale * c
    return terms


def multiply(a: OperatorPolynomial, b: OperatorPolynomial) -> OperatorPolynomial:
    """
    Operator product a*b in normal form. Degree of the result is at most deg a + deg b.

    :raises HbarMismatchError: when a and b carry different hbar.
    :complexity: O(len(a) * len(b) * cost of one monomial product); monomial products are cached.
    """
    a._check_hbar(b)
    return OperatorPolynomial(product_terms(a.terms, b.terms, a.hbar), a.hbar)


def commutator(a: OperatorPolynomial, b: OperatorPolynomial) -> OperatorPolynomial:
    return multiply(a, b) - multiply(b, a)


def symmetrize(w: Iterable[int], hbar: float = 1.0) -> OperatorPolynomial:
    """
    Weyl-symmetrized word: the average over all orderings of its factors,
    returned in normal form.
    """
    word = tuple(w)
    for index in word:
        GeneratorId(index)
    return OperatorPolynomial(dict(_weyl_word(tuple(sorted(word)), float(hbar))), hbar)


@lru_cache(maxsize=1 << 16)
def _reversed_word(word: Word, hbar: float) -> tuple[tuple[Word, complex], ...]:
    return tuple(_ordered_terms(tuple(reversed(word)), hbar).items())


def adjoint(a: OperatorPolynomial) -> OperatorPolynomial:
    """
    Hermitian conjugate. The generators are Hermitian, so each word is reversed
    and re-ordered, and each coefficient conjugated.
    """
    terms: dict[Word, complex] = {}
    for word, coeff in a.terms.items():
        conj = complex(coeff).conjugate()
        for w, c in _reversed_word(word, a.hbar):
            terms[w] = terms.get(w, 0) + conj * c
    return OperatorPolynomial(terms, a.hbar)


def to_symmetric_basis(a: OperatorPolynomial) -> dict[Word, complex]:
    """
    Expansion of a in the basis of Weyl-symmetrized words, keyed by sorted word.

    The highest-degree normal-ordered term is peeled off with its symmetrized
    counterpart until nothing is left. symmetrize(w) has leading term w with
    coefficient exactly 1 and otherwise only lower degrees, so the loop terminates.
    """
    tolerance = _prune_tolerance.get()
    remainder = dict(a.terms)
    basis: dict[Word, complex] = {}
    while remainder:
        top = max(remainder, key=lambda word: (len(word), word))
        coeff = remainder[top]
        basis[top] = basis.get(top, 0) + coeff
        for word, c in _weyl_word(top, a.hbar):
            value = remainder.get(word, 0) - coeff * c
            if word == top or value == 0 or abs(value) < tolerance:
                remainder.pop(word, None)
            else:
                remainder[word] = value
    return _pruned(basis)


def from_symmetric_basis(basis: Mapping[Word, Scalar], hbar: float = 1.0) -> OperatorPolynomial:
    terms: dict[Word, complex] = {}
    for key, coeff in basis.items():
        for word, c in _weyl_word(tuple(sorted(key)), float(hbar)):
            terms[word] = terms.get(word, 0) + coeff * c
    return OperatorPolynomial(terms, hbar)


def symmetric_norm(a: OperatorPolynomial) -> float:
    """Square root of the summed squared moduli of the symmetric-basis coefficients."""
    return sqrt(sum(abs(c) ** 2 for c in to_symmetric_basis(a).values()))
