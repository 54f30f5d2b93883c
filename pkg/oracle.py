"""
Brute-force full-quantum simulator on the truncated two-mode Fock space
(classical mode first, then quantum mode). It is the reference the hybrid
sandwich bounds are checked against.
"""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass

import numpy as np
from scipy import linalg, sparse
from scipy.sparse import linalg as sparse_linalg

import fock
from classicality import SectorState
from constants import NORMALIZATION_TOLERANCE
from hybrid_algebra import HybridObservable, PhasePoint, evaluate_classical, to_matrix
from predictions import Interval
from utils import require_hermitian_matrix
from weyl_algebra import GeneratorId, OperatorPolynomial

logger = logging.getLogger(__name__)

Dims = tuple[int, int]


class UnsupportedModesError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FullState:
    amplitudes: np.ndarray
    dims: Dims
    hbar: float = 1.0

    def __post_init__(self) -> None:
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        dims = (int(self.dims[0]), int(self.dims[1]))
        if amplitudes.size != dims[0] * dims[1]:
            raise ValueError(f"State of size {amplitudes.size} does not match dims {dims}")
        norm_squared = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm_squared - 1) > NORMALIZATION_TOLERANCE:
            raise ValueError(f"Full state is not normalized (norm^2 = {norm_squared:.12f})")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "hbar", float(self.hbar))

    @classmethod
    def product(cls, phi_c: SectorState, phi_q: SectorState) -> FullState:
        if phi_c.hbar != phi_q.hbar:
            raise ValueError("Sector states carry different hbar")
        return cls(np.kron(phi_c.amplitudes, phi_q.amplitudes), (phi_c.dim, phi_q.dim), phi_c.hbar)

    def expectation(self, matrix: np.ndarray) -> complex:
        return complex(np.vdot(self.amplitudes, matrix @ self.amplitudes))

    def overlap(self, other: FullState) -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _mode_matrix(word: tuple[int, ...], dim: int, hbar: float) -> sparse.csr_matrix:
    matrix = sparse.identity(dim, dtype=complex, format="csr")
    for index in word:
        matrix = matrix @ sparse.csr_matrix(fock.quadrature(GeneratorId(index).kind, dim, hbar))
    return matrix


def _check_modes(a: OperatorPolynomial) -> None:
    extra = sorted(a.modes() - {1, 2})
    if extra:
        raise UnsupportedModesError(f"The oracle represents one classical and one quantum mode, got modes {extra}")


def sparse_operator(a: OperatorPolynomial, dims: Dims) -> sparse.csr_matrix:
    """
    Sparse matrix of a two-mode operator polynomial: generators 1, 2 act on the
    classical mode and 3, 4 on the quantum mode.

    :raises UnsupportedModesError: when a involves any other mode.
    """
    _check_modes(a)
    dim_c, dim_q = dims
    matrix = sparse.csr_matrix((dim_c * dim_q, dim_c * dim_q), dtype=complex)
    for word, coeff in a.terms.items():
        classical = tuple(index for index in word if index <= 2)
        quantum = tuple(index for index in word if index > 2)
        matrix = matrix + coeff * sparse.kron(_mode_matrix(classical, dim_c, a.hbar),
                                              _mode_matrix(quantum, dim_q, a.hbar), format="csr")
    return matrix.tocsr()


def full_operator(a: OperatorPolynomial, dims: Dims) -> np.ndarray:
    """Dense form of sparse_operator."""
    return sparse_operator(a, dims).toarray()


def mode_operator(a: OperatorPolynomial, mode: int, dim: int) -> np.ndarray:
    """
    Single-mode matrix of a polynomial acting on mode 1 (classical) or mode 2
    (quantum) alone.

    :raises UnsupportedModesError: when a touches any other mode.
    """
    extra = sorted(a.modes() - {mode})
    if extra:
        raise UnsupportedModesError(f"Operator acts on modes {extra} besides mode {mode}")
    matrix = sparse.csr_matrix((dim, dim), dtype=complex)
    for word, coeff in a.terms.items():
        matrix = matrix + coeff * _mode_matrix(word, dim, a.hbar)
    return matrix.toarray()


class Propagator:
    """exp(-i h t / hbar) from one eigendecomposition of h, reused for every t."""

    def __init__(self, h: np.ndarray, hbar: float = 1.0) -> None:
        self.hbar = float(hbar)
        self.matrix = require_hermitian_matrix(np.asarray(h), "Hamiltonian matrix")
        logger.debug("Diagonalizing %d-dimensional Hamiltonian", self.matrix.shape[0])
        self._values, self._vectors = linalg.eigh(self.matrix)

    def unitary(self, t: float) -> np.ndarray:
        return (self._vectors * np.exp(-1j * self._values * t / self.hbar)) @ self._vectors.conj().T

    def evolve(self, state: FullState, t: float) -> FullState:
        if t == 0:
            return state
        rotated = np.exp(-1j * self._values * t / self.hbar) * (self._vectors.conj().T @ state.amplitudes)
        return FullState(self._vectors @ rotated, state.dims, state.hbar)

    def heisenberg(self, op: np.ndarray, t: float) -> np.ndarray:
        u = self.unitary(t)
        return u.conj().T @ op @ u


def propagate(state: FullState, h: np.ndarray, t: float) -> FullState:
    """
    :raises utils.NonHermitianError: when h is not Hermitian.
    """
    return Propagator(h, state.hbar).evolve(state, t)


class SpectralMeasurement:
    """Cached eigendecomposition of a static Hermitian observable."""

    def __init__(self, op: np.ndarray) -> None:
        matrix = require_hermitian_matrix(op, "observable matrix")
        self.eigenvalues, self.eigenvectors = linalg.eigh(matrix)

    def weights(self, state: FullState) -> np.ndarray:
        return np.abs(self.eigenvectors.conj().T @ state.amplitudes) ** 2

    def probability(self, state: FullState, i: Interval) -> float:
        inside = (self.eigenvalues >= i.lower) & (self.eigenvalues <= i.upper)
        return float(min(1.0, max(0.0, np.sum(self.weights(state)[inside]))))


class ModeMeasurement(SpectralMeasurement):
    """
    Measurement of an observable acting on one mode only. Each single-mode
    eigenvalue stands for a degenerate block of the full space, whose weight
    is the squared norm of the state's component along that eigenvector.
    """

    def __init__(self, op: np.ndarray, axis: int) -> None:
        super().__init__(op)
        self.axis = axis

    def weights(self, state: FullState) -> np.ndarray:
        psi = state.amplitudes.reshape(state.dims)
        if psi.shape[self.axis] != self.eigenvalues.size:
            raise ValueError(f"Mode of dimension {psi.shape[self.axis]} measured with a "
                             f"{self.eigenvalues.size}-dimensional observable")
        if self.axis == 0:
            return np.sum(np.abs(self.eigenvectors.conj().T @ psi) ** 2, axis=1)
        return np.sum(np.abs(psi @ self.eigenvectors.conj()) ** 2, axis=0)


def measure_interval(state: FullState, op: np.ndarray, i: Interval) -> float:
    return SpectralMeasurement(op).probability(state, i)


def exact_delta_b(b_evolved: HybridObservable, a_full: np.ndarray, centers, eigvec: np.ndarray,
                  phi_c: SectorState) -> float:
    """
    ||(A - B)|b>|phi_c>|| with A the full-space observable and B the hybrid
    observable evaluated at the classical centers (identity on the classical mode).
    """
    eigvec = np.asarray(eigvec, dtype=complex)
    point = centers if isinstance(centers, PhasePoint) else PhasePoint(tuple(centers))
    quantum = to_matrix(evaluate_classical(b_evolved, point), eigvec.size, b_evolved.n_classical)
    b_full = np.kron(np.eye(phi_c.dim), quantum)
    if a_full.shape != b_full.shape:
        raise ValueError(f"Full observable of shape {a_full.shape} does not match dims ({phi_c.dim}, {eigvec.size})")
    psi = np.kron(phi_c.amplitudes, eigvec)
    return float(np.linalg.norm((a_full - b_full) @ psi))


class FullQuantumModel:
    """
    One Hamiltonian on fixed dims with cached evolved states and measurements,
    so every (time, observable, interval) query reuses the same work. States
    are evolved with the sparse matrix exponential; observables on a single
    mode are diagonalized on that mode alone. The caches may be filled from
    several threads.
    """

    def __init__(self, hamiltonian: OperatorPolynomial, dims: Dims) -> None:
        self.dims = (int(dims[0]), int(dims[1]))
        self.hbar = hamiltonian.hbar
        self.hamiltonian = require_hermitian_matrix(sparse_operator(hamiltonian, self.dims), "Hamiltonian matrix")
        self._lock = threading.Lock()
        self._measurements: dict[tuple, SpectralMeasurement] = {}
        self._states: dict[tuple[FullState, float], FullState] = {}

    def _cached(self, cache: dict, key, build):
        with self._lock:
            if key in cache:
                return cache[key]
        value = build()
        with self._lock:
            return cache.setdefault(key, value)

    def _build_measurement(self, op: OperatorPolynomial) -> SpectralMeasurement:
        _check_modes(op)
        modes = op.modes()
        if len(modes) > 1:
            return SpectralMeasurement(full_operator(op, self.dims))
        axis = 1 if modes == {2} else 0
        return ModeMeasurement(mode_operator(op, axis + 1, self.dims[axis]), axis)

    def measurement(self, op: OperatorPolynomial) -> SpectralMeasurement:
        key = tuple(sorted(op.terms.items()))
        return self._cached(self._measurements, key, lambda: self._build_measurement(op))

    def _evolve(self, initial: FullState, t: float) -> FullState:
        if initial.dims != self.dims:
            raise ValueError(f"State on dims {initial.dims} evolved by a model on dims {self.dims}")
        if t == 0:
            return initial
        logger.debug("Evolving a %d-dimensional state to t = %g", self.hamiltonian.shape[0], t)
        amplitudes = sparse_linalg.expm_multiply(self.hamiltonian * (-1j * t / self.hbar), initial.amplitudes)
        return FullState(amplitudes, self.dims, self.hbar)

    def state_at(self, initial: FullState, t: float) -> FullState:
        return self._cached(self._states, (initial, float(t)), lambda: self._evolve(initial, t))

    def probability(self, initial: FullState, t: float, op: OperatorPolynomial, i: Interval) -> float:
        return self.measurement(op).probability(self.state_at(initial, t), i)


def oscillator_hamiltonian(dim_c: int, dim_q: int, omega: float = 1.0, hbar: float = 1.0) -> np.ndarray:
    """hbar omega (N + 1/2) on the classical mode, identity on the quantum mode."""
    single = hbar * omega * (fock.number(dim_c) + 0.5 * np.eye(dim_c))
    return np.kron(single, np.eye(dim_q))
