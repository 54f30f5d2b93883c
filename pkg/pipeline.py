"""
The prediction and consistency pipeline behind `hybrid run`:
classicality of the initial data, series evolution, hybrid spectra and
spreads, sandwich bounds, full-quantum oracle probabilities and verdicts.
"""
from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from classicality import check_classicality, relevant_sequences, spread_bound
from constants import CONVERGENCE_TOLERANCE, VERDICT_TOLERANCE, Verdict
from dynamics import ConvergenceError, evolve_series
from hybrid_algebra import HybridObservable
from maps import requantize
from oracle import FullQuantumModel, FullState
from predictions import BoundPreconditionError, SpectrumTable, hybrid_spectrum, interval_probability, sandwich_bounds
from scenario import DimsSpec, Scenario
from utils import NonHermitianError
from weyl_algebra import format_word

logger = logging.getLogger(__name__)

INCONSISTENT_INITIAL_DATA = "inconsistent initial data"


@dataclass(frozen=True)
class TermRecord:
    classical_exponents: tuple[int, ...]
    quantum_word: str
    re: float
    im: float


@dataclass(frozen=True)
class ObservableRecord:
    name: str
    time: float
    terms: tuple[TermRecord, ...]
    tail_norm: float
    discarded_norm: float
    status: str


@dataclass(frozen=True)
class SpectrumRecord:
    name: str
    time: float
    eigenvalues: tuple[float, ...]
    probabilities: tuple[float, ...]


@dataclass(frozen=True)
class SequenceRecord:
    sequence: str
    norm_squared: float
    bound: float
    passed: bool


@dataclass(frozen=True)
class ClassicalityRecord:
    order: int
    passed: bool
    checks: tuple[SequenceRecord, ...]


@dataclass(frozen=True)
class SpreadRecord:
    time: float
    observable: str
    p: float
    order: int
    spread: float


@dataclass(frozen=True)
class BoundRecord:
    time: float
    observable: str
    p: float
    order: int
    interval_center: float
    half_width: float
    lower: Optional[float]
    upper: Optional[float]
    hybrid: Optional[float]
    oracle: Optional[float]
    oracle_drift: Optional[float]
    converged: bool
    verdict: Verdict
    status: str


@dataclass(frozen=True)
class ResultBundle:
    seed: int
    hbar: float
    classicality: tuple[ClassicalityRecord, ...]
    observables: tuple[ObservableRecord, ...]
    spectra: tuple[SpectrumRecord, ...]
    spreads: tuple[SpreadRecord, ...]
    bounds: tuple[BoundRecord, ...]
    warnings: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return all(bound.verdict != Verdict.FAIL for bound in self.bounds)

    def count(self, verdict: Verdict) -> int:
        return sum(1 for bound in self.bounds if bound.verdict == verdict)


def _term_records(observable: HybridObservable) -> tuple[TermRecord, ...]:
    records = []
    for exponents, coeff in sorted(observable.terms.items()):
        for word, value in sorted(coeff.terms.items()):
            records.append(TermRecord(exponents, format_word(word, observable.n_classical), value.real, value.imag))
    return tuple(records)


class _Oracle:
    """The full-quantum model at the scenario dims and, when asked for, at doubled dims."""

    def __init__(self, scenario: Scenario, hamiltonian: HybridObservable) -> None:
        full_h = requantize(hamiltonian)
        self.levels = [self._level(scenario, full_h, scenario.dims)]
        if scenario.dims.check_doubling:
            self.levels.append(self._level(scenario, full_h, scenario.dims.doubled()))

    @staticmethod
    def _level(scenario: Scenario, full_h, dims: DimsSpec) -> tuple[FullQuantumModel, FullState]:
        initial = FullState.product(scenario.phi_c.build(dims.classical, scenario.hbar),
                                    scenario.phi_q.build(dims.quantum, scenario.hbar))
        return FullQuantumModel(full_h, dims.pair), initial

    def probability(self, t: float, op, interval) -> tuple[float, Optional[float]]:
        values = [model.probability(initial, t, op, interval) for model, initial in self.levels]
        drift = abs(values[1] - values[0]) if len(values) > 1 else None
        return values[0], drift


def run(scenario: Scenario, threads: int = 1, seed: int = 0) -> ResultBundle:
    """
    Run every stage of the scenario. Stage failures (non-convergence, a
    non-Hermitian evaluated observable, D <= 2 delta) are recorded in the
    bundle instead of aborting the run.
    """
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    notes: list[str] = []
    hamiltonian = scenario.hybrid_hamiltonian()
    data = scenario.classical_data
    phi_c = scenario.phi_c.build(scenario.dims.classical, scenario.hbar)
    phi_q = scenario.phi_q.build(scenario.dims.quantum, scenario.hbar)

    grid = [(spec, t) for t in scenario.times for spec in scenario.observables]

    def evolve(task):
        spec, t = task
        try:
            result = evolve_series(scenario.observable(spec), hamiltonian, scenario.evolution.config(t))
            return result.observable, result.tail_norm, result.discarded_norm, "ok"
        except ConvergenceError as e:
            return None, e.tail_norm, 0.0, f"not converged: {e}"

    with ThreadPoolExecutor(max_workers=threads) as pool:
        evolved = list(pool.map(evolve, grid))
    logger.info("Evolved %d observable/time pairs", len(grid))

    observable_records = []
    for (spec, t), (observable, tail, discarded, status) in zip(grid, evolved):
        if observable is None:
            notes.append(f"evolution of {spec.name} at t={t}: {status}")
        observable_records.append(ObservableRecord(
            spec.name, t, _term_records(observable) if observable is not None else (), tail, discarded, status
        ))

    available = [observable for observable, *_ in evolved if observable is not None]
    classicality_records = []
    for order in scenario.orders:
        report = check_classicality(phi_c, data, relevant_sequences(available, order))
        classicality_records.append(ClassicalityRecord(order, report.passed, tuple(
            SequenceRecord(check.sequence.label(data.n_classical), check.norm_squared, check.bound, check.passed)
            for check in report.checks
        )))
        if not report.passed:
            notes.append(f"{INCONSISTENT_INITIAL_DATA}: order {order} classicality criterion fails for "
                         + ", ".join(check.sequence.label(data.n_classical) for check in report.failures()))
            logger.warning("Initial data fail the order-%d classicality criterion", order)

    oracle = _Oracle(scenario, hamiltonian)

    def predict(task):
        (spec, t), (observable, *_rest) = task
        if observable is None:
            return None, [], []
        try:
            spectrum = hybrid_spectrum(observable, data.point, phi_q, scenario.dims.quantum)
        except NonHermitianError as e:
            return None, [], [f"spectrum of {spec.name} at t={t}: {e}"]
        spreads, bounds = _spreads_and_bounds(scenario, spec, t, observable, spectrum, oracle)
        return spectrum, spreads, bounds

    with ThreadPoolExecutor(max_workers=threads) as pool:
        predicted = list(pool.map(predict, zip(grid, evolved)))

    spectra, spreads, bounds = [], [], []
    for (spec, t), (spectrum, spread_records, bound_records) in zip(grid, predicted):
        if spectrum is None:
            notes.extend(bound_records)
            continue
        spectra.append(SpectrumRecord(spec.name, t, tuple(spectrum.eigenvalues),
                                      tuple(entry.probability for entry in spectrum.entries)))
        spreads.extend(spread_records)
        bounds.extend(bound_records)

    unconverged = sum(1 for bound in bounds if not bound.converged)
    if unconverged:
        message = (f"{unconverged} oracle probabilities drift by more than {CONVERGENCE_TOLERANCE:.0e} "
                   f"when the dimensions are doubled")
        warnings.warn(message, RuntimeWarning)
        notes.append(message)
    failed = sum(1 for bound in bounds if bound.verdict == Verdict.FAIL)
    logger.info("%d bounds evaluated, %d failed", len(bounds), failed)
    return ResultBundle(seed, scenario.hbar, tuple(classicality_records), tuple(observable_records),
                        tuple(spectra), tuple(spreads), tuple(bounds), tuple(notes))


def _spreads_and_bounds(scenario: Scenario, spec, t: float, observable: HybridObservable, spectrum: SpectrumTable,
                        oracle: _Oracle) -> tuple[list[SpreadRecord], list[BoundRecord]]:
    data = scenario.classical_data
    eigenvectors = spectrum.eigenvectors()
    static_op = requantize(scenario.observable(spec))
    spreads, bounds = [], []
    for p in scenario.p_values:
        for order in scenario.orders:
            delta = max(spread_bound(observable, data, v, p, order) for v in eigenvectors)
            spreads.append(SpreadRecord(t, spec.name, p, order, delta))
            for interval_spec in scenario.intervals.get(spec.name, ()):
                interval = interval_spec.resolve(delta)
                oracle_p, drift = oracle.probability(t, static_op, interval)
                converged = drift is None or drift < CONVERGENCE_TOLERANCE
                hybrid_p = interval_probability(spectrum, interval)
                try:
                    sandwich = sandwich_bounds(spectrum, interval, delta, p, order)
                except BoundPreconditionError as e:
                    bounds.append(BoundRecord(t, spec.name, p, order, interval.center, interval.half_width,
                                              None, None, hybrid_p, oracle_p, drift, converged, Verdict.SKIPPED,
                                              str(e)))
                    continue
                verdict = Verdict.PASS if sandwich.contains(oracle_p, VERDICT_TOLERANCE) else Verdict.FAIL
                if verdict == Verdict.FAIL:
                    logger.warning("Bound violated for %s at t=%s, p=%s, L=%d, interval %s: %.6g not in [%.6g, %.6g]",
                                   spec.name, t, p, order, interval, oracle_p, sandwich.lower, sandwich.upper)
                bounds.append(BoundRecord(t, spec.name, p, order, interval.center, interval.half_width,
                                          sandwich.lower, sandwich.upper, hybrid_p, oracle_p, drift, converged,
                                          verdict, "ok" if converged else "oracle not converged"))
    return spreads, bounds
