"""
Time evolution of hybrid observables by truncated bracket series and
star-exponential propagators, with the canonicality and unitarity checks
that go with them.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

from constants import HERMITIAN_TOLERANCE, PRUNE_TOLERANCE
from hybrid_algebra import HybridObservable, bracket, dagger, hermiticity_residual, star
from utils import NonHermitianError
from weyl_algebra import pruning

logger = logging.getLogger(__name__)


class ConvergenceError(ArithmeticError):
    def __init__(self, message: str, tail_norm: float, order: int) -> None:
        super().__init__(message)
        self.tail_norm = tail_norm
        self.order = order


@dataclass(frozen=True)
class EvolutionConfig:
    time: float
    max_order: int = 25
    degree_cap: Optional[int] = None
    tail_tolerance: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.max_order, int) or self.max_order < 1:
            raise ValueError(f"max_order must be an integer >= 1, got {self.max_order!r}")
        if self.tail_tolerance < 0:
            raise ValueError(f"tail_tolerance must be non-negative, got {self.tail_tolerance!r}")
        if self.degree_cap is not None and self.degree_cap < 0:
            raise ValueError(f"degree_cap must be non-negative, got {self.degree_cap!r}")


@dataclass(frozen=True)
class EvolutionResult:
    """
    A truncated series together with its diagnostics.

    tail_norm is the coefficient norm of the last retained term; discarded_norm
    is the total norm removed by the degree cap.
    """

    observable: HybridObservable
    tail_norm: float
    discarded_norm: float
    order: int


def _require_hermitian(h: HybridObservable) -> None:
    residual = hermiticity_residual(h)
    if residual > HERMITIAN_TOLERANCE:
        raise NonHermitianError(f"Hamiltonian is not Hermitian (dagger residual {residual:.3e})")


def _sum_series(seed: HybridObservable, step, cfg: EvolutionConfig, what: str) -> EvolutionResult:
    """
    seed + sum_{n=1}^{max_order} term_n with term_n = step(term_{n-1}, n).

    :raises ConvergenceError: when the last term's norm exceeds a positive tail_tolerance.
    """
    total = seed
    term = seed
    discarded = 0.0
    tail = seed.norm()
    order = 0
    for n in range(1, cfg.max_order + 1):
        order = n
        term = step(term, n)
        if cfg.degree_cap is not None:
            term, dropped = term.truncate_degree(cfg.degree_cap)
            discarded += dropped
        total = total + term
        tail = term.norm()
        logger.debug("%s order %d: term norm %.3e", what, n, tail)
        if term.is_zero():
            break
    if cfg.tail_tolerance > 0 and tail > cfg.tail_tolerance:
        raise ConvergenceError(
            f"{what} at t={cfg.time} did not converge: tail norm {tail:.3e} > {cfg.tail_tolerance:.1e} "
            f"after {cfg.max_order} orders",
            tail,
            cfg.max_order,
        )
    return EvolutionResult(total, tail, discarded, order)


def evolve_series(a: HybridObservable, h: HybridObservable, cfg: EvolutionConfig) -> EvolutionResult:
    """
    Heisenberg evolution sum_n (1/n!)(i t / hbar)^n [[h, [[h, ... [[h, a]] ...]]]].

    :raises NonHermitianError: if h is not Hermitian.
    :raises ConvergenceError: see _sum_series.
    :complexity: max_order bracket evaluations; for quadratic h the nested brackets keep the degree of a.
    """
    _require_hermitian(h)
    factor = 1j * cfg.time / h.hbar
    if cfg.time == 0:
        return EvolutionResult(a, 0.0, 0.0, cfg.max_order)
    return _sum_series(a, lambda term, n: bracket(h, term) * (factor / n), cfg, "evolve_series")


def propagator_series(h: HybridObservable, cfg: EvolutionConfig) -> EvolutionResult:
    """
    Star exponential sum_n (1/n!)(-i t / hbar)^n h*h*...*h, with U(0) the identity.

    The terms are pruned by contraction weight (HybridObservable.prune_by_weight)
    rather than by raw coefficient size, so the returned series keeps high-degree
    coefficients below the absolute threshold. Pass it to conjugate_by,
    check_canonical and unitarity_residual, which multiply it on the same footing.
    """
    _require_hermitian(h)
    identity = HybridObservable.identity(h.n_classical, h.hbar)
    if cfg.time == 0:
        return EvolutionResult(identity, 0.0, 0.0, cfg.max_order)
    factor = -1j * cfg.time / h.hbar

    def step(term: HybridObservable, n: int) -> HybridObservable:
        return (star(h, term) * (factor / n)).prune_by_weight(PRUNE_TOLERANCE)

    with pruning(0.0):
        return _sum_series(identity, step, cfg, "propagator_series")


def conjugate_by(u: HybridObservable, a: HybridObservable) -> HybridObservable:
    """dagger(u) * a * u, using dagger(u) as the inverse of u. Only the result is pruned."""
    with pruning(0.0):
        inner = star(a, u).prune_by_weight(PRUNE_TOLERANCE)
        transformed = star(dagger(u), inner)
    return transformed.pruned()


def check_canonical(u: HybridObservable, a: HybridObservable, b: HybridObservable) -> float:
    """Norm of u^-1 [[a, b]] u - [[u^-1 a u, u^-1 b u]]."""
    transformed_bracket = conjugate_by(u, bracket(a, b))
    bracket_of_transformed = bracket(conjugate_by(u, a), conjugate_by(u, b))
    return (transformed_bracket - bracket_of_transformed).norm()


def unitarity_residual(u: HybridObservable) -> float:
    with pruning(0.0):
        product = star(dagger(u), u)
    return (product.pruned() - HybridObservable.identity(u.n_classical, u.hbar)).norm()
