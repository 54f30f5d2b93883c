import unittest
from ed_utils.decorators import number

import numpy as np
from scipy import linalg

from dynamics import (
    ConvergenceError,
    EvolutionConfig,
    check_canonical,
    conjugate_by,
    evolve_series,
    propagator_series,
    unitarity_residual,
)
from hybrid_algebra import HybridObservable, bracket, hermiticity_residual, to_matrix
from utils import NonHermitianError
from weyl_algebra import OperatorPolynomial

Q_OP, P_OP = 3, 4


def coupled_oscillator(k, hbar=1.0):
    """(q^2 + x^2)/2 + k x Q, with x the classical momentum."""
    return HybridObservable({
        (2, 0): 0.5,
        (0, 2): 0.5,
        (0, 1): OperatorPolynomial.from_words([((Q_OP,), k)], hbar),
    }, hbar=hbar)


class TestDynamics(unittest.TestCase):

    def load_example(self, k=0.1):
        self.k = k
        self.h = coupled_oscillator(k)
        self.q = HybridObservable.variable("q1")
        self.x = HybridObservable.variable("p1")
        self.Q = HybridObservable.variable("Q1")
        self.P = HybridObservable.variable("P1")

    def assertObservableEqual(self, actual, expected, tolerance=1e-12):
        self.assertLessEqual((actual - expected).norm(), tolerance, f"{actual} != {expected}")

    def closed_form(self, t):
        k, q, x, Q, P = self.k, self.q, self.x, self.Q, self.P
        return {
            "q": q * np.cos(t) + (x + Q * k) * np.sin(t),
            "x": q * -np.sin(t) + x * np.cos(t) + Q * (k * (np.cos(t) - 1)),
            "Q": Q,
            "P": P - (q * (np.cos(t) - 1) + x * np.sin(t)) * k - Q * (k ** 2 * (np.sin(t) - t)),
        }

    @number("4.1")
    def test_evolve_position(self):
        self.load_example(k=1.0)
        q_t = evolve_series(self.q, self.h, EvolutionConfig(time=1.0, max_order=25)).observable
        self.assertAlmostEqual(q_t.coefficient((1, 0)).coefficient(()), np.cos(1), delta=1e-8)
        self.assertAlmostEqual(q_t.coefficient((0, 1)).coefficient(()), np.sin(1), delta=1e-8)
        self.assertAlmostEqual(q_t.coefficient((0, 0)).coefficient((Q_OP,)), np.sin(1), delta=1e-8)

    @number("4.2")
    def test_closed_form_evolution(self):
        for k in (0.0, 0.1, 1.0):
            self.load_example(k)
            for t in (0.25, 0.5, 1.0):
                expected = self.closed_form(t)
                for name, a in (("q", self.q), ("x", self.x), ("Q", self.Q), ("P", self.P)):
                    with self.subTest(k=k, t=t, observable=name):
                        evolved = evolve_series(a, self.h, EvolutionConfig(time=t)).observable
                        self.assertObservableEqual(evolved, expected[name], 1e-8)

    @number("4.3")
    def test_quantum_position_is_conserved(self):
        self.load_example()
        result = evolve_series(self.Q, self.h, EvolutionConfig(time=2.0))
        self.assertObservableEqual(result.observable, self.Q, 0.0)
        self.assertEqual(result.tail_norm, 0.0)
        self.assertEqual(result.order, 1)

    @number("4.4")
    def test_zero_time(self):
        self.load_example()
        a = self.q * 2 + self.P
        self.assertIs(evolve_series(a, self.h, EvolutionConfig(time=0.0)).observable, a)
        self.assertObservableEqual(propagator_series(self.h, EvolutionConfig(time=0.0)).observable,
                                   HybridObservable.identity())

    @number("4.5")
    def test_non_hermitian_hamiltonian(self):
        self.load_example()
        with self.assertRaises(NonHermitianError):
            evolve_series(self.q, self.h + self.x * 1j, EvolutionConfig(time=1.0))
        with self.assertRaises(NonHermitianError):
            propagator_series(self.Q * 1j, EvolutionConfig(time=1.0))

    @number("4.6")
    def test_convergence_error(self):
        self.load_example()
        with self.assertRaises(ConvergenceError) as ctx:
            evolve_series(self.q, self.h, EvolutionConfig(time=1.0, max_order=2, tail_tolerance=1e-12))
        self.assertGreater(ctx.exception.tail_norm, 1e-12)
        self.assertEqual(ctx.exception.order, 2)
        with self.assertRaises(ValueError):
            EvolutionConfig(time=1.0, max_order=0)
        with self.assertRaises(ValueError):
            EvolutionConfig(time=1.0, tail_tolerance=-1)

    @number("4.7")
    def test_degree_cap(self):
        self.load_example()
        anharmonic = HybridObservable({(0, 2): 0.5, (4, 0): 0.25})
        result = evolve_series(self.q, anharmonic, EvolutionConfig(time=0.1, max_order=6, degree_cap=3))
        self.assertLessEqual(result.observable.classical_degree, 3)
        self.assertGreater(result.discarded_norm, 0)

    @number("4.8")
    def test_linearity(self):
        self.load_example()
        cfg = EvolutionConfig(time=0.7)
        combined = evolve_series(self.q * 2 + self.P * -3j, self.h, cfg).observable
        separate = evolve_series(self.q, self.h, cfg).observable * 2 + evolve_series(self.P, self.h, cfg).observable * -3j
        self.assertObservableEqual(combined, separate, 1e-12)

    @number("4.9")
    def test_evolution_preserves_brackets_and_hermiticity(self):
        self.load_example()
        for t in (0.5, 1.0):
            cfg = EvolutionConfig(time=t)
            q_t = evolve_series(self.q, self.h, cfg).observable
            x_t = evolve_series(self.x, self.h, cfg).observable
            self.assertObservableEqual(bracket(q_t, x_t), HybridObservable.identity() * 1j, 1e-6)
            self.assertLess(hermiticity_residual(q_t), 1e-10)
            self.assertLess(hermiticity_residual(evolve_series(self.P, self.h, cfg).observable), 1e-10)

    @number("4.10")
    def test_quantum_propagator_matches_matrix_exponential(self):
        dim = 5
        q_op = OperatorPolynomial.generator(Q_OP)
        u = propagator_series(HybridObservable.quantum(q_op), EvolutionConfig(time=1.0, max_order=30)).observable
        self.assertEqual(set(u.terms), {(0, 0)})
        expected = linalg.expm(-1j * to_matrix(q_op, dim))
        residual = np.linalg.norm(to_matrix(u.coefficient((0, 0)), dim) - expected)
        self.assertLess(residual, 1e-8)

    @number("4.11")
    def test_unitarity_residual_falls_with_order(self):
        self.load_example()
        residuals = [
            unitarity_residual(propagator_series(self.h, EvolutionConfig(time=0.5, max_order=n)).observable)
            for n in range(5, 15)
        ]
        for before, after in zip(residuals, residuals[1:]):
            self.assertLess(after, before)

    @number("4.12")
    def test_conjugate_by_identity(self):
        self.load_example()
        one = HybridObservable.identity()
        a = self.q * self.k + self.P
        self.assertObservableEqual(conjugate_by(one, a), a)
        self.assertEqual(check_canonical(one, self.q, self.x), 0.0)
        u = propagator_series(self.h, EvolutionConfig(time=0.1, max_order=4)).observable
        self.assertObservableEqual(conjugate_by(u, one), one, 1e-5)

    @number("4.13")
    def test_two_routes_agree_at_moderate_order(self):
        self.load_example()
        cfg = EvolutionConfig(time=0.5, max_order=14)
        u = propagator_series(self.h, cfg).observable
        for a in (self.q, self.Q):
            heisenberg = evolve_series(a, self.h, cfg).observable
            self.assertObservableEqual(conjugate_by(u, a), heisenberg, 1e-6)
        self.assertLess(check_canonical(u, self.q, self.x), 1e-6)
        self.assertLess(check_canonical(u, self.q, self.Q), 1e-6)
