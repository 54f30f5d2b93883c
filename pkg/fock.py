"""
Truncated Fock-space matrices of a single bosonic mode.

Convention: a|n> = sqrt(n)|n-1>, Q = sqrt(hbar/2)(a + a^dagger),
P = i sqrt(hbar/2)(a^dagger - a). The commutator [Q, P] equals i hbar
everywhere except the last diagonal entry, where truncation leaves
-i hbar (dim - 1).
"""
from functools import lru_cache

import numpy as np

from constants import GeneratorKind, TRUNCATION_WEIGHT


class TruncationError(ValueError):
    pass


def _frozen(matrix: np.ndarray) -> np.ndarray:
    matrix.setflags(write=False)
    return matrix


def _check_dim(dim: int) -> None:
    if not isinstance(dim, (int, np.integer)) or dim < 2:
        raise ValueError(f"Fock dimension must be an integer >= 2, got {dim!r}")


@lru_cache(maxsize=64)
def annihilation(dim: int) -> np.ndarray:
    _check_dim(dim)
    return _frozen(np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex))


@lru_cache(maxsize=64)
def creation(dim: int) -> np.ndarray:
    return _frozen(annihilation(dim).conj().T.copy())


@lru_cache(maxsize=64)
def number(dim: int) -> np.ndarray:
    _check_dim(dim)
    return _frozen(np.diag(np.arange(dim, dtype=float)).astype(complex))


@lru_cache(maxsize=128)
def position(dim: int, hbar: float = 1.0) -> np.ndarray:
    return _frozen(np.sqrt(hbar / 2) * (annihilation(dim) + creation(dim)))


@lru_cache(maxsize=128)
def momentum(dim: int, hbar: float = 1.0) -> np.ndarray:
    return _frozen(1j * np.sqrt(hbar / 2) * (creation(dim) - annihilation(dim)))


def quadrature(kind: GeneratorKind, dim: int, hbar: float = 1.0) -> np.ndarray:
    if kind == GeneratorKind.POSITION:
        return position(dim, float(hbar))
    return momentum(dim, float(hbar))


def coherent_amplitudes(center_q: float, center_p: float, dim: int, hbar: float = 1.0) -> np.ndarray:
    """
    Number-basis amplitudes of the coherent state centred at (center_q, center_p),
    alpha = (q + i p) / sqrt(2 hbar), renormalized after truncation.

    :raises TruncationError: when the first dim levels hold less than TRUNCATION_WEIGHT of the state.
    """
    _check_dim(dim)
    alpha = (center_q + 1j * center_p) / np.sqrt(2 * hbar)
    ratios = np.ones(dim, dtype=complex)
    ratios[1:] = alpha / np.sqrt(np.arange(1, dim))
    amplitudes = np.exp(-abs(alpha) ** 2 / 2) * np.cumprod(ratios)
    weight = float(np.vdot(amplitudes, amplitudes).real)
    if weight < TRUNCATION_WEIGHT:
        raise TruncationError(
            f"Coherent state with |alpha| = {abs(alpha):.3f} keeps only {weight:.10f} of its norm in {dim} levels"
        )
    return amplitudes / np.sqrt(weight)
