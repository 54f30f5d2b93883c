import unittest
from ed_utils.decorators import number

from hypothesis import given, settings

from constants import GeneratorKind, Sector
from tests.strategies import operators
from weyl_algebra import (
    GeneratorId,
    HbarMismatchError,
    OperatorPolynomial,
    adjoint,
    commutator,
    contraction_weight,
    format_word,
    from_symmetric_basis,
    multiply,
    normal_order,
    parse_generator,
    prune_tolerance,
    pruning,
    symmetric_norm,
    symmetrize,
    to_symmetric_basis,
)

Q1, P1, Q2, P2 = 1, 2, 3, 4


def op(*words, hbar=1.0):
    return OperatorPolynomial.from_words(words, hbar)


class TestWeylAlgebra(unittest.TestCase):

    def assertOperatorEqual(self, actual, expected, tolerance=1e-12):
        self.assertLessEqual(actual.max_abs_difference(expected), tolerance, f"{actual} != {expected}")

    @number("1.1")
    def test_normal_order(self):
        self.assertOperatorEqual(normal_order([P1, Q1]), op(((Q1, P1), 1), ((), -1j)))
        self.assertOperatorEqual(normal_order([Q1]), op(((Q1,), 1)))
        self.assertOperatorEqual(normal_order([P1, Q1, Q1]), op(((Q1, Q1, P1), 1), ((Q1,), -2j)))
        # Distinct modes commute.
        self.assertOperatorEqual(normal_order([Q2, P1]), op(((P1, Q2), 1)))
        self.assertOperatorEqual(normal_order([P1, Q1], hbar=0.5), op(((Q1, P1), 1), ((), -0.5j), hbar=0.5))

    @number("1.2")
    def test_normal_order_is_idempotent(self):
        a = normal_order([P1, P2, Q1, Q2, Q1])
        again = OperatorPolynomial.zero()
        for word, coeff in a.terms.items():
            again = again + normal_order(word) * coeff
        self.assertEqual(dict(again.terms), dict(a.terms))

    @number("1.3")
    def test_multiply(self):
        q, p = OperatorPolynomial.generator(Q1), OperatorPolynomial.generator(P1)
        self.assertOperatorEqual(multiply(q, p), op(((Q1, P1), 1)))
        self.assertOperatorEqual(multiply(p, q), op(((Q1, P1), 1), ((), -1j)))
        self.assertOperatorEqual(multiply(q + p, q - p), op(((Q1, Q1), 1), ((P1, P1), -1), ((), -1j)))
        self.assertOperatorEqual(q * p, multiply(q, p))

    @number("1.4")
    def test_multiply_rejects_mismatched_hbar(self):
        with self.assertRaises(HbarMismatchError):
            multiply(OperatorPolynomial.generator(Q1, 1.0), OperatorPolynomial.generator(P1, 0.5))
        with self.assertRaises(HbarMismatchError):
            OperatorPolynomial.identity(1.0) + OperatorPolynomial.identity(2.0)

    @number("1.5")
    def test_commutator(self):
        q, p = OperatorPolynomial.generator(Q1), OperatorPolynomial.generator(P1)
        self.assertOperatorEqual(commutator(q, p), OperatorPolynomial.scalar(1j))
        self.assertTrue(commutator(q, OperatorPolynomial.generator(Q2)).is_zero())
        self.assertOperatorEqual(commutator(q * q, p), op(((Q1,), 2j)))
        hbar = 0.01
        self.assertOperatorEqual(
            commutator(OperatorPolynomial.generator(Q2, hbar), OperatorPolynomial.generator(P2, hbar)),
            OperatorPolynomial.scalar(1j * hbar, hbar),
        )

    @number("1.6")
    def test_symmetrize(self):
        self.assertOperatorEqual(symmetrize([Q1, P1]), op(((Q1, P1), 1), ((), -0.5j)))
        self.assertOperatorEqual(symmetrize([P1, Q1]), symmetrize([Q1, P1]))
        self.assertOperatorEqual(symmetrize([Q1]), op(((Q1,), 1)))
        self.assertOperatorEqual(symmetrize([Q1, Q1]), op(((Q1, Q1), 1)))
        # (q^2 p)_+ = (qqp + qpq + pqq) / 3
        average = (normal_order([Q1, Q1, P1]) + normal_order([Q1, P1, Q1]) + normal_order([P1, Q1, Q1])) * (1 / 3)
        self.assertOperatorEqual(symmetrize([Q1, Q1, P1]), average)

    @number("1.7")
    def test_adjoint(self):
        self.assertOperatorEqual(adjoint(op(((Q1,), 1j))), op(((Q1,), -1j)))
        self.assertOperatorEqual(adjoint(op(((Q1, P1), 1))), op(((Q1, P1), 1), ((), -1j)))
        self.assertOperatorEqual(adjoint(symmetrize([Q1, P1])), symmetrize([Q1, P1]))
        a = op(((P1, Q1, Q2), 0.3 + 1j), ((P2,), 2))
        self.assertOperatorEqual(adjoint(adjoint(a)), a)

    @number("1.8")
    def test_to_symmetric_basis(self):
        basis = to_symmetric_basis(op(((Q1, P1), 1), ((), -0.5j)))
        self.assertEqual(set(basis), {(Q1, P1)})
        self.assertAlmostEqual(basis[(Q1, P1)], 1)
        self.assertEqual(to_symmetric_basis(op(((Q1,), 1))), {(Q1,): 1})
        basis = to_symmetric_basis(op(((Q1, P1), 1)))
        self.assertAlmostEqual(basis[(Q1, P1)], 1)
        self.assertAlmostEqual(basis[()], 0.5j)
        self.assertEqual(to_symmetric_basis(OperatorPolynomial.zero()), {})

    @number("1.9")
    def test_symmetric_norm(self):
        self.assertAlmostEqual(symmetric_norm(symmetrize([Q1, P1]) * 3), 3)
        self.assertAlmostEqual(symmetric_norm(op(((Q1, P1), 1))), (1 + 0.25) ** 0.5)

    @number("1.10")
    @settings(max_examples=50, deadline=None)
    @given(operators(), operators(), operators())
    def test_multiply_associativity(self, a, b, c):
        self.assertOperatorEqual(multiply(multiply(a, b), c), multiply(a, multiply(b, c)), 1e-11)

    @number("1.11")
    @settings(max_examples=50, deadline=None)
    @given(operators(), operators(), operators())
    def test_commutator_jacobi(self, a, b, c):
        cyclic = commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) + commutator(c, commutator(a, b))
        self.assertOperatorEqual(cyclic, OperatorPolynomial.zero(), 1e-10)

    @number("1.12")
    @settings(max_examples=50, deadline=None)
    @given(operators(max_word=4))
    def test_symmetric_round_trip(self, a):
        self.assertOperatorEqual(from_symmetric_basis(to_symmetric_basis(a)), a)

    @number("1.13")
    @settings(max_examples=50, deadline=None)
    @given(operators(), operators())
    def test_adjoint_anti_homomorphism(self, a, b):
        self.assertOperatorEqual(adjoint(multiply(a, b)), multiply(adjoint(b), adjoint(a)), 1e-11)

    @number("1.14")
    def test_generator_labels(self):
        self.assertEqual(GeneratorId.of(GeneratorKind.MOMENTUM, 2).index, 4)
        self.assertEqual(GeneratorId(3).kind, GeneratorKind.POSITION)
        self.assertEqual(GeneratorId(3).sector(1), Sector.QUANTUM)
        self.assertEqual(GeneratorId(3).label(1), "Q1")
        self.assertEqual(GeneratorId(2).label(1), "p1")
        self.assertEqual(parse_generator("Q", 1).index, 3)
        self.assertEqual(parse_generator("P1", 2).index, 6)
        self.assertEqual(parse_generator("p1", 1).index, 2)
        self.assertEqual(format_word((1, 2, 3), 1), "q1 p1 Q1")
        with self.assertRaises(ValueError):
            parse_generator("q2", 1)
        with self.assertRaises(ValueError):
            parse_generator("x1", 1)
        with self.assertRaises(ValueError):
            GeneratorId(0)

    @number("1.15")
    def test_construction_rejects_unordered_words(self):
        with self.assertRaises(ValueError):
            OperatorPolynomial({(P1, Q1): 1.0})
        with self.assertRaises(ValueError):
            OperatorPolynomial({(): 1.0}, hbar=0)
        self.assertTrue(OperatorPolynomial({(Q1,): 1e-15}).is_zero())

    @number("1.16")
    def test_pruning_threshold_is_scoped(self):
        self.assertEqual(prune_tolerance(), 1e-14)
        with pruning(0.0):
            tiny = OperatorPolynomial({(Q1,): 1e-20, (P1,): 0.0})
            self.assertEqual(dict(tiny.terms), {(Q1,): 1e-20})
            squared = multiply(tiny, tiny)
            self.assertEqual(set(squared.terms), {(Q1, Q1)})
            self.assertAlmostEqual(abs(squared.coefficient((Q1, Q1))), 1e-40, delta=1e-54)
        self.assertEqual(prune_tolerance(), 1e-14)
        self.assertTrue(OperatorPolynomial(dict(tiny.terms)).is_zero())
        with self.assertRaises(ValueError):
            with pruning(-1.0):
                pass

    @number("1.17")
    def test_contraction_weight(self):
        self.assertEqual(contraction_weight((), 1.0), 1.0)
        # Q1^2 P1^3 Q2: sqrt(2! 3! 1!) hbar^3
        self.assertAlmostEqual(contraction_weight((Q1, Q1, P1, P1, P1, Q2), 0.5), 12 ** 0.5 * 0.125, delta=1e-14)
