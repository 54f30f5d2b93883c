import unittest
from ed_utils.decorators import number

from hypothesis import given, settings

from hybrid_algebra import HybridObservable, bracket, dagger, hermiticity_residual, star, to_matrix
from maps import ClassicalPolynomial, dequantize_hq, dequantize_total, quantize_hq, quantize_total, requantize
from tests.strategies import operators
from utils import hermiticity_residual as matrix_hermiticity_residual
from weyl_algebra import OperatorPolynomial, adjoint, commutator, multiply, symmetrize

q, p, Q, P = 1, 2, 3, 4


def op(*words, hbar=1.0):
    return OperatorPolynomial.from_words(words, hbar)


def coupled_oscillator_symbol(k):
    """(q^2 + x^2)/2 + k x Q over exponents (q, x, Q, P)."""
    return ClassicalPolynomial({(2, 0, 0, 0): 0.5, (0, 2, 0, 0): 0.5, (0, 1, 1, 0): k})


class TestMaps(unittest.TestCase):

    def assertObservableEqual(self, actual, expected, tolerance=1e-12):
        self.assertLessEqual((actual - expected).norm(), tolerance, f"{actual} != {expected}")

    @number("3.1")
    def test_dequantize_hq(self):
        self.assertObservableEqual(dequantize_hq(symmetrize([q, p])), HybridObservable.classical_monomial((1, 1)))
        self.assertObservableEqual(dequantize_hq(op(((q, p), 1))), HybridObservable.classical_monomial((1, 1)) + 0.5j)
        self.assertObservableEqual(dequantize_hq(OperatorPolynomial.identity()), HybridObservable.identity())
        # Quantum factors stay operators, classical factors become monomials.
        expected = HybridObservable({(1, 0): symmetrize([Q, P])})
        self.assertObservableEqual(dequantize_hq(symmetrize([q, Q, P])), expected)

    @number("3.2")
    def test_quantize_hq(self):
        self.assertObservableEqual(quantize_hq(ClassicalPolynomial({(1, 0, 1, 0): 1})),
                                   HybridObservable({(1, 0): op(((Q,), 1))}))
        half = (op(((Q, P), 1)) + op(((P, Q), 1))) * 0.5
        self.assertObservableEqual(quantize_hq(ClassicalPolynomial({(0, 0, 1, 1): 1})), HybridObservable.quantum(half))

    @number("3.3")
    def test_quantize_coupled_oscillator(self):
        h = quantize_hq(coupled_oscillator_symbol(0.1))
        expected = HybridObservable({(2, 0): 0.5, (0, 2): 0.5, (0, 1): op(((Q,), 0.1))})
        self.assertObservableEqual(h, expected)
        self.assertLess(hermiticity_residual(h), 1e-12)
        quantum_part = to_matrix(h.coefficient((0, 1)), 30)
        self.assertLess(matrix_hermiticity_residual(quantum_part), 1e-12)

    @number("3.4")
    def test_dequantize_total(self):
        self.assertEqual(dict(dequantize_total(symmetrize([Q, P])).terms), {(0, 0, 1, 1): 1})
        self.assertEqual(dict(dequantize_total(OperatorPolynomial.identity()).terms), {(0, 0, 0, 0): 1})
        c = dequantize_total(op(((q, p), 1)))
        self.assertAlmostEqual(c.coefficient((1, 1, 0, 0)), 1)
        self.assertAlmostEqual(c.coefficient((0, 0, 0, 0)), 0.5j)
        with self.assertRaises(ValueError):
            dequantize_total(op(((5,), 1)), 1, 1)

    @number("3.5")
    def test_quantize_total_inverts_dequantize_total(self):
        a = op(((P, q, Q, p), 1.5), ((p, p, Q), -1j), ((), 2))
        self.assertLessEqual(quantize_total(dequantize_total(a)).max_abs_difference(a), 1e-12)

    @number("3.6")
    def test_requantize(self):
        a = op(((p, q, Q), 1), ((P, P), 0.25j), ((q,), 3))
        self.assertLessEqual(requantize(dequantize_hq(a)).max_abs_difference(a), 1e-12)
        self.assertLessEqual(requantize(HybridObservable.classical_monomial((1, 1))).max_abs_difference(
            symmetrize([q, p])), 1e-12)

    @number("3.7")
    @settings(max_examples=50, deadline=None)
    @given(operators(max_word=4), operators(max_word=4))
    def test_product_isomorphism(self, a, b):
        expected = star(dequantize_hq(a), dequantize_hq(b))
        self.assertLessEqual((dequantize_hq(multiply(a, b)) - expected).norm(), 1e-10 * max(1.0, expected.norm()))

    @number("3.8")
    @settings(max_examples=50, deadline=None)
    @given(operators(max_word=4), operators(max_word=4))
    def test_bracket_isomorphism(self, a, b):
        expected = bracket(dequantize_hq(a), dequantize_hq(b))
        self.assertLessEqual((dequantize_hq(commutator(a, b)) - expected).norm(), 1e-10 * max(1.0, expected.norm()))

    @number("3.9")
    @settings(max_examples=50, deadline=None)
    @given(operators(max_word=4))
    def test_dagger_intertwining(self, a):
        self.assertObservableEqual(dequantize_hq(adjoint(a)), dagger(dequantize_hq(a)), 1e-11)

    @number("3.10")
    @settings(max_examples=50, deadline=None)
    @given(operators(max_word=4))
    def test_half_quantization_factorizes(self, a):
        self.assertObservableEqual(quantize_hq(dequantize_total(a)), dequantize_hq(a), 1e-11)
