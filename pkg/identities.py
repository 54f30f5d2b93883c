"""
Randomized checks of the algebraic identities the library relies on, run
with a fixed seed so that a report can be reproduced exactly.

Residuals are absolute coefficient norms of the difference between the two
sides, and every threshold applies to them. The same norm divided by
max(1, norm of the reference side) is reported alongside for comparison.
The classical (Moyal) limit is compared with an independent sympy evaluation
that applies the Poisson bidifferential operator to a product of two
functions of separate variables before restricting to the diagonal.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
import sympy

from dynamics import EvolutionConfig, check_canonical, propagator_series
from hybrid_algebra import HybridObservable, bracket, dagger, quantum_commutator, star
from maps import dequantize_hq
from weyl_algebra import (
    OperatorPolynomial,
    adjoint,
    commutator,
    from_symmetric_basis,
    multiply,
    to_symmetric_basis,
)

logger = logging.getLogger(__name__)

# Generator indices of the two-mode (N = M = 1) system: q, p classical and Q, P quantum.
CLASSICAL_GENERATORS = (1, 2)
QUANTUM_GENERATORS = (3, 4)
CANONICAL_TRIALS = 5


@dataclass(frozen=True)
class IdentityResidual:
    name: str
    max_residual: float
    max_relative: float
    threshold: float
    trials: int

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.threshold


@dataclass(frozen=True)
class IdentityReport:
    seed: int
    trials: int
    residuals: tuple[IdentityResidual, ...]

    @property
    def passed(self) -> bool:
        return all(residual.passed for residual in self.residuals)

    def residual(self, name: str) -> IdentityResidual:
        for residual in self.residuals:
            if residual.name == name:
                return residual
        raise KeyError(name)


def _coefficient(rng: np.random.Generator) -> complex:
    return complex(rng.uniform(-1, 1), rng.uniform(-1, 1))


def random_word(rng: np.random.Generator, generators: tuple[int, ...], max_length: int) -> tuple[int, ...]:
    length = int(rng.integers(0, max_length + 1))
    return tuple(int(g) for g in rng.choice(generators, size=length))


def random_operator(rng: np.random.Generator, generators: tuple[int, ...] = CLASSICAL_GENERATORS + QUANTUM_GENERATORS,
                    max_length: int = 4, max_terms: int = 3, hbar: float = 1.0) -> OperatorPolynomial:
    """A sum of up to max_terms random (unordered) words with complex coefficients."""
    words = [(random_word(rng, generators, max_length), _coefficient(rng))
             for _ in range(int(rng.integers(1, max_terms + 1)))]
    return OperatorPolynomial.from_words(words, hbar)


def random_hybrid(rng: np.random.Generator, max_degree: int = 3, max_word: int = 2, max_terms: int = 3,
                  classical_only: bool = False, quantum_only: bool = False, hbar: float = 1.0) -> HybridObservable:
    """Random N = M = 1 observable with classical degree <= max_degree and quantum words of length <= max_word."""
    terms = {}
    for _ in range(int(rng.integers(1, max_terms + 1))):
        if quantum_only:
            exponents = (0, 0)
        else:
            degree = int(rng.integers(0, max_degree + 1))
            q_power = int(rng.integers(0, degree + 1))
            exponents = (q_power, degree - q_power)
        word = () if classical_only else random_word(rng, QUANTUM_GENERATORS, max_word)
        coeff = OperatorPolynomial.from_words([(word, _coefficient(rng))], hbar)
        terms[exponents] = terms[exponents] + coeff if exponents in terms else coeff
    return HybridObservable(terms, 1, hbar)


def random_hermitian(rng: np.random.Generator, max_degree: int = 2, hbar: float = 1.0) -> HybridObservable:
    """(r + dagger(r)) / 2 for a random r whose quantum part is built from Q alone."""
    terms = {}
    for _ in range(int(rng.integers(1, 4))):
        degree = int(rng.integers(0, max_degree + 1))
        q_power = int(rng.integers(0, degree + 1))
        exponents = (q_power, degree - q_power)
        coeff = OperatorPolynomial.from_words([((3,) * int(rng.integers(0, 2)), _coefficient(rng))], hbar)
        terms[exponents] = terms[exponents] + coeff if exponents in terms else coeff
    r = HybridObservable(terms, 1, hbar)
    return (r + dagger(r)) * 0.5


Residual = tuple[float, float]


def _residual(difference: float, scale: float) -> Residual:
    """(absolute, relative) pair for a difference measured against a reference of the given size."""
    return float(difference), float(difference) / max(1.0, scale)


def _max_coefficient(a: OperatorPolynomial) -> float:
    return max((abs(c) for c in a.terms.values()), default=0.0)


def _hybrid_residual(actual: HybridObservable, expected: HybridObservable) -> Residual:
    return _residual((actual - expected).norm(), expected.norm())


def _operator_residual(actual: OperatorPolynomial, expected: OperatorPolynomial) -> Residual:
    return _residual(actual.max_abs_difference(expected), _max_coefficient(expected))


Q, P = sympy.symbols("q p")
_Q1, _P1, _Q2, _P2 = sympy.symbols("q_1 p_1 q_2 p_2")


def to_sympy(a: HybridObservable) -> sympy.Expr:
    """Classical observable (identity coefficients only) as a sympy polynomial in q, p."""
    if not a.is_classical():
        raise ValueError("Only classical observables have a sympy form")
    expr = sympy.Integer(0)
    for (q_power, p_power), coeff in a.terms.items():
        value = complex(coeff.coefficient(()))
        expr += (sympy.Float(value.real) + sympy.I * sympy.Float(value.imag)) * Q ** q_power * P ** p_power
    return sympy.expand(expr)


def direct_moyal_bracket(f: sympy.Expr, g: sympy.Expr, hbar: float) -> sympy.Expr:
    """
    f*g - g*f with f*g = sum_n (i hbar/2)^n / n! J^n [f(q1,p1) g(q2,p2)] at q1=q2=q, p1=p2=p,
    J = d_q1 d_p2 - d_p1 d_q2.
    """
    def product(left, right):
        joint = left.subs({Q: _Q1, P: _P1}) * right.subs({Q: _Q2, P: _P2})
        total = sympy.Integer(0)
        n = 0
        term = joint
        while term != 0:
            total += (sympy.I * hbar / 2) ** n / sympy.factorial(n) * term
            n += 1
            term = sympy.expand(sympy.diff(term, _Q1, _P2) - sympy.diff(term, _P1, _Q2))
        return sympy.expand(total.subs({_Q1: Q, _P1: P, _Q2: Q, _P2: P}))

    return sympy.expand(product(f, g) - product(g, f))


def _sympy_residual(actual: sympy.Expr, expected: sympy.Expr) -> Residual:
    difference = sympy.Poly(sympy.expand(actual - expected), Q, P)
    scale = max([abs(complex(c)) for c in sympy.Poly(expected, Q, P).coeffs()] + [1.0]) if expected != 0 else 1.0
    return _residual(max([abs(complex(c)) for c in difference.coeffs()] + [0.0]), scale)


def _suites(hbar: float) -> dict[str, tuple[float, Callable[[np.random.Generator], Residual]]]:
    def star_associativity(rng):
        a, b, c = (random_hybrid(rng, hbar=hbar) for _ in range(3))
        return _hybrid_residual(star(star(a, b), c), star(a, star(b, c)))

    def star_identity(rng):
        a = random_hybrid(rng, hbar=hbar)
        one = HybridObservable.identity(1, hbar)
        left, right = _hybrid_residual(star(one, a), a), _hybrid_residual(star(a, one), a)
        return max(left[0], right[0]), max(left[1], right[1])

    def bracket_antisymmetry(rng):
        a, b = random_hybrid(rng, hbar=hbar), random_hybrid(rng, hbar=hbar)
        return _hybrid_residual(bracket(a, b), -bracket(b, a))

    def bracket_jacobi(rng):
        a, b, c = (random_hybrid(rng, hbar=hbar) for _ in range(3))
        cyclic = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b))
        return _residual(cyclic.norm(), bracket(a, bracket(b, c)).norm())

    def dagger_antihomomorphism(rng):
        a, b = random_hybrid(rng, hbar=hbar), random_hybrid(rng, hbar=hbar)
        return _hybrid_residual(dagger(star(a, b)), star(dagger(b), dagger(a)))

    def multiply_associativity(rng):
        a, b, c = (random_operator(rng, max_length=3, hbar=hbar) for _ in range(3))
        return _operator_residual(multiply(multiply(a, b), c), multiply(a, multiply(b, c)))

    def commutator_jacobi(rng):
        a, b, c = (random_operator(rng, max_length=3, hbar=hbar) for _ in range(3))
        nested = commutator(a, commutator(b, c))
        cyclic = nested + commutator(b, commutator(c, a)) + commutator(c, commutator(a, b))
        return _residual(_max_coefficient(cyclic), _max_coefficient(nested))

    def adjoint_antihomomorphism(rng):
        a, b = random_operator(rng, hbar=hbar), random_operator(rng, hbar=hbar)
        return _operator_residual(adjoint(multiply(a, b)), multiply(adjoint(b), adjoint(a)))

    def symmetric_round_trip(rng):
        a = random_operator(rng, hbar=hbar)
        return _operator_residual(from_symmetric_basis(to_symmetric_basis(a), hbar), a)

    def product_isomorphism(rng):
        a, b = random_operator(rng, hbar=hbar), random_operator(rng, hbar=hbar)
        return _hybrid_residual(dequantize_hq(multiply(a, b)), star(dequantize_hq(a), dequantize_hq(b)))

    def bracket_isomorphism(rng):
        a, b = random_operator(rng, hbar=hbar), random_operator(rng, hbar=hbar)
        return _hybrid_residual(dequantize_hq(commutator(a, b)), bracket(dequantize_hq(a), dequantize_hq(b)))

    def dagger_intertwining(rng):
        a = random_operator(rng, hbar=hbar)
        return _hybrid_residual(dequantize_hq(adjoint(a)), dagger(dequantize_hq(a)))

    def moyal_limit(rng):
        a = random_hybrid(rng, classical_only=True, hbar=hbar)
        b = random_hybrid(rng, classical_only=True, hbar=hbar)
        return _sympy_residual(to_sympy(bracket(a, b)), direct_moyal_bracket(to_sympy(a), to_sympy(b), hbar))

    def commutator_limit(rng):
        a = random_hybrid(rng, quantum_only=True, hbar=hbar)
        b = random_hybrid(rng, quantum_only=True, hbar=hbar)
        expected = quantum_commutator(a.coefficient((0, 0)), b.coefficient((0, 0)))
        return _hybrid_residual(bracket(a, b), expected)

    return {
        "star_associativity": (1e-12, star_associativity),
        "star_identity": (1e-12, star_identity),
        "bracket_antisymmetry": (1e-12, bracket_antisymmetry),
        "bracket_jacobi": (1e-10, bracket_jacobi),
        "dagger_antihomomorphism": (1e-12, dagger_antihomomorphism),
        "multiply_associativity": (1e-12, multiply_associativity),
        "commutator_jacobi": (1e-12, commutator_jacobi),
        "adjoint_antihomomorphism": (1e-12, adjoint_antihomomorphism),
        "symmetric_round_trip": (1e-12, symmetric_round_trip),
        "product_isomorphism": (1e-10, product_isomorphism),
        "bracket_isomorphism": (1e-10, bracket_isomorphism),
        "dagger_intertwining": (1e-12, dagger_intertwining),
        "moyal_limit": (1e-12, moyal_limit),
        "commutator_limit": (1e-12, commutator_limit),
    }


def _canonicality(rng: np.random.Generator, hbar: float) -> Residual:
    """Canonicality of a short, low-order propagator of a random Hermitian Hamiltonian."""
    h = random_hermitian(rng, hbar=hbar)
    u = propagator_series(h, EvolutionConfig(time=0.01, max_order=3)).observable
    a = random_hybrid(rng, max_degree=1, max_word=1, max_terms=2, hbar=hbar)
    b = random_hybrid(rng, max_degree=1, max_word=1, max_terms=2, hbar=hbar)
    return _residual(check_canonical(u, a, b), bracket(a, b).norm())


def check_identities(seed: int = 0, trials: int = 100, hbar: float = 1.0) -> IdentityReport:
    """
    Run every identity suite for the given number of trials. Each suite draws
    from its own generator seeded from seed, so suites are independent of one
    another and of the trial count of earlier suites.

    :raises ValueError: when trials < 1.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    residuals = []
    suites = _suites(hbar)
    for offset, (name, (threshold, check)) in enumerate(suites.items()):
        rng = np.random.default_rng([seed, offset])
        outcomes = [check(rng) for _ in range(trials)]
        worst, worst_relative = max(a for a, _ in outcomes), max(r for _, r in outcomes)
        logger.info("%-26s max residual %.3e (relative %.3e, threshold %.0e)", name, worst, worst_relative,
                    threshold)
        residuals.append(IdentityResidual(name, worst, worst_relative, threshold, trials))
    rng = np.random.default_rng([seed, len(suites)])
    canonical_trials = min(trials, CANONICAL_TRIALS)
    outcomes = [_canonicality(rng, hbar) for _ in range(canonical_trials)]
    residuals.append(IdentityResidual("canonicality", max(a for a, _ in outcomes), max(r for _, r in outcomes), 1e-6,
                                      canonical_trials))
    return IdentityReport(seed, trials, tuple(residuals))
