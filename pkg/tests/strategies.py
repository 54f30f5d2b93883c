from hypothesis.strategies import builds, composite, floats, integers, lists, sampled_from, tuples

from hybrid_algebra import HybridObservable
from weyl_algebra import OperatorPolynomial

# One classical and one quantum mode: q, p are generators 1, 2 and Q, P are 3, 4.
ALL_GENERATORS = (1, 2, 3, 4)
QUANTUM_GENERATORS = (3, 4)


def coefficients():
    part = floats(min_value=-2, max_value=2, allow_nan=False, allow_infinity=False)
    return builds(complex, part, part)


def words(generators=ALL_GENERATORS, max_size=3):
    return lists(sampled_from(generators), max_size=max_size).map(tuple)


def operators(generators=ALL_GENERATORS, max_word=3, max_terms=3):
    return lists(tuples(words(generators, max_word), coefficients()), min_size=1, max_size=max_terms).map(
        OperatorPolynomial.from_words
    )


@composite
def hybrids(draw, max_degree=2, max_word=2, max_terms=3, classical_only=False):
    terms = {}
    for _ in range(draw(integers(min_value=1, max_value=max_terms))):
        q_power = draw(integers(min_value=0, max_value=max_degree))
        p_power = draw(integers(min_value=0, max_value=max_degree - q_power))
        word = () if classical_only else draw(words(QUANTUM_GENERATORS, max_word))
        coeff = OperatorPolynomial.from_words([(word, draw(coefficients()))])
        terms[(q_power, p_power)] = terms[(q_power, p_power)] + coeff if (q_power, p_power) in terms else coeff
    return HybridObservable(terms)
