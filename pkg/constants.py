from base_enum import BaseEnum

# Coefficients smaller than this are dropped after every algebraic operation.
PRUNE_TOLERANCE = 1e-14

HERMITIAN_TOLERANCE = 1e-10
NORMALIZATION_TOLERANCE = 1e-10
PROBABILITY_TOLERANCE = 1e-8
DEGENERACY_TOLERANCE = 1e-9
CONVERGENCE_TOLERANCE = 1e-6
VERDICT_TOLERANCE = 1e-12

# A truncated coherent state must keep at least this much probability.
TRUNCATION_WEIGHT = 1 - 1e-8


class GeneratorKind(BaseEnum):
    POSITION = "position"
    MOMENTUM = "momentum"


class Sector(BaseEnum):
    CLASSICAL = "classical"
    QUANTUM = "quantum"


class StateKind(BaseEnum):
    COHERENT = "coherent"
    FOCK = "fock"
    AMPLITUDES = "amplitudes"


class Verdict(BaseEnum):
    PASS = "pass"
    FAIL = "fail"
    SKIPPED = "skipped"
