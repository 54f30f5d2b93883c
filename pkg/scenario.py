"""
Scenario documents: one JSON file describes a complete experiment (Hamiltonian,
classical data, sector states, observables, interval grids, oracle settings).
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

import fock
from classicality import ClassicalData, SectorState, coherent_state
from constants import HERMITIAN_TOLERANCE, Sector, StateKind
from dynamics import EvolutionConfig
from hybrid_algebra import HybridObservable, hermiticity_residual
from maps import ClassicalPolynomial, quantize_hq
from predictions import Interval
from weyl_algebra import parse_generator

logger = logging.getLogger(__name__)

STORES = Path(__file__).resolve().parent / "stores"
EXAMPLES = {"coupled-oscillator": "coupled_oscillator.json"}


class ScenarioError(ValueError):
    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class HamiltonianTerm:
    coefficient: complex
    classical_exponents: tuple[int, ...]
    quantum_word: tuple[str, ...]


@dataclass(frozen=True)
class StateSpec:
    """A sector state description that can be rebuilt at any truncation dimension."""

    kind: StateKind
    center: tuple[float, float] = (0.0, 0.0)
    level: int = 0
    amplitudes: tuple[complex, ...] = ()

    def build(self, dim: int, hbar: float) -> SectorState:
        if self.kind == StateKind.COHERENT:
            return coherent_state(self.center[0], self.center[1], dim, hbar)
        if self.kind == StateKind.FOCK:
            return SectorState.number_state(self.level, dim, hbar)
        if len(self.amplitudes) > dim:
            raise fock.TruncationError(f"{len(self.amplitudes)} amplitudes do not fit in dimension {dim}")
        padded = np.zeros(dim, dtype=complex)
        padded[:len(self.amplitudes)] = self.amplitudes
        return SectorState.from_amplitudes(padded, hbar)


@dataclass(frozen=True)
class ObservableSpec:
    name: str
    generator: str


@dataclass(frozen=True)
class IntervalSpec:
    """
    Either an absolute half width D, or an extra width e meaning D = 2 delta + e
    once the spread delta is known.
    """

    center: float
    half_width: Optional[float] = None
    extra_width: Optional[float] = None

    def resolve(self, delta: float) -> Interval:
        if self.half_width is not None:
            return Interval(self.center, self.half_width)
        return Interval(self.center, 2 * delta + self.extra_width)


@dataclass(frozen=True)
class DimsSpec:
    classical: int = 40
    quantum: int = 40
    check_doubling: bool = True

    @property
    def pair(self) -> tuple[int, int]:
        return self.classical, self.quantum

    def doubled(self) -> DimsSpec:
        return DimsSpec(2 * self.classical, 2 * self.quantum, False)


@dataclass(frozen=True)
class EvolutionSpec:
    max_order: int = 25
    degree_cap: Optional[int] = None
    tail_tolerance: float = 0.0

    def config(self, time: float) -> EvolutionConfig:
        return EvolutionConfig(time, self.max_order, self.degree_cap, self.tail_tolerance)


@dataclass(frozen=True)
class Scenario:
    hamiltonian: tuple[HamiltonianTerm, ...]
    classical_data: ClassicalData
    phi_c: StateSpec
    phi_q: StateSpec
    times: tuple[float, ...]
    observables: tuple[ObservableSpec, ...]
    intervals: dict[str, tuple[IntervalSpec, ...]] = field(hash=False)
    p_values: tuple[float, ...]
    orders: tuple[int, ...] = (1,)
    hbar: float = 1.0
    dims: DimsSpec = DimsSpec()
    evolution: EvolutionSpec = EvolutionSpec()

    @property
    def n_classical(self) -> int:
        return self.classical_data.n_classical

    def hamiltonian_symbol(self) -> ClassicalPolynomial:
        n = self.n_classical
        n_quantum = max([1] + [parse_generator(label, n).mode - n for term in self.hamiltonian
                               for label in term.quantum_word])
        terms: dict[tuple[int, ...], complex] = {}
        for term in self.hamiltonian:
            full = [0] * (2 * (n + n_quantum))
            for m in range(1, n + 1):
                full[2 * m - 2] = term.classical_exponents[m - 1]
                full[2 * m - 1] = term.classical_exponents[n + m - 1]
            for label in term.quantum_word:
                full[parse_generator(label, n).index - 1] += 1
            key = tuple(full)
            terms[key] = terms.get(key, 0) + term.coefficient
        return ClassicalPolynomial(terms, n, n_quantum, self.hbar)

    def hybrid_hamiltonian(self) -> HybridObservable:
        """
        The symmetric quantization of the Hamiltonian symbol.

        :raises ScenarioError: if the result is not Hermitian.
        """
        h = quantize_hq(self.hamiltonian_symbol())
        residual = hermiticity_residual(h)
        if residual > HERMITIAN_TOLERANCE:
            raise ScenarioError("hamiltonian", f"quantized Hamiltonian is not Hermitian (residual {residual:.3e})")
        return h

    def observable(self, spec: ObservableSpec) -> HybridObservable:
        return HybridObservable.variable(spec.generator, self.n_classical, self.hbar)


def _require(doc: dict, key: str, path: str) -> Any:
    if not isinstance(doc, dict):
        raise ScenarioError(path or "<root>", "expected an object")
    if key not in doc:
        raise ScenarioError(f"{path}.{key}" if path else key, "required field missing")
    return doc[key]


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(path, f"expected a number, got {value!r}")
    return float(value)


def _integer(value: Any, path: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ScenarioError(path, f"expected an integer >= {minimum}, got {value!r}")
    return value


def _list(value: Any, path: str, allow_empty: bool = False) -> list:
    if not isinstance(value, list) or (not value and not allow_empty):
        raise ScenarioError(path, "expected a non-empty list" if not allow_empty else "expected a list")
    return value


def _object(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise ScenarioError(path, "expected an object")
    return value


def _numbers(value: Any, path: str) -> tuple[float, ...]:
    return tuple(_number(v, f"{path}[{k}]") for k, v in enumerate(_list(value, path)))


def _parse_term(doc: Any, path: str, n_classical: int) -> HamiltonianTerm:
    coefficient = complex(_number(_require(doc, "coeff_re", path), f"{path}.coeff_re"),
                          _number(doc.get("coeff_im", 0.0), f"{path}.coeff_im"))
    exponents = tuple(
        _integer(e, f"{path}.classical_exponents[{k}]")
        for k, e in enumerate(_list(_require(doc, "classical_exponents", path), f"{path}.classical_exponents",
                                    allow_empty=True))
    )
    if len(exponents) != 2 * n_classical:
        raise ScenarioError(f"{path}.classical_exponents", f"expected {2 * n_classical} exponents, got {len(exponents)}")
    word = tuple(_list(doc.get("quantum_word", []), f"{path}.quantum_word", allow_empty=True))
    for k, label in enumerate(word):
        try:
            generator = parse_generator(str(label), n_classical)
        except ValueError as e:
            raise ScenarioError(f"{path}.quantum_word[{k}]", str(e)) from e
        if generator.sector(n_classical) != Sector.QUANTUM:
            raise ScenarioError(f"{path}.quantum_word[{k}]", f"{label!r} is not a quantum generator")
    return HamiltonianTerm(coefficient, exponents, tuple(str(label) for label in word))


def _parse_state(doc: Any, path: str) -> StateSpec:
    if not isinstance(doc, dict) or len(doc) != 1:
        raise ScenarioError(path, "expected exactly one of 'coherent', 'fock', 'amplitudes'")
    (key, value), = doc.items()
    try:
        kind = StateKind.parse(key)
    except ValueError as e:
        raise ScenarioError(path, str(e)) from e
    if kind == StateKind.COHERENT:
        center = (_number(_require(value, "q", f"{path}.coherent"), f"{path}.coherent.q"),
                  _number(_require(value, "p", f"{path}.coherent"), f"{path}.coherent.p"))
        return StateSpec(kind, center=center)
    if kind == StateKind.FOCK:
        return StateSpec(kind, level=_integer(value, f"{path}.fock"))
    amplitudes = []
    for k, pair in enumerate(_list(value, f"{path}.amplitudes")):
        pair = _list(pair, f"{path}.amplitudes[{k}]")
        if len(pair) != 2:
            raise ScenarioError(f"{path}.amplitudes[{k}]", "expected [re, im]")
        amplitudes.append(complex(_number(pair[0], f"{path}.amplitudes[{k}][0]"),
                                  _number(pair[1], f"{path}.amplitudes[{k}][1]")))
    return StateSpec(kind, amplitudes=tuple(amplitudes))


def _parse_interval(doc: Any, path: str) -> IntervalSpec:
    center = _number(_require(doc, "center", path), f"{path}.center")
    if ("half_width" in doc) == ("extra_width" in doc):
        raise ScenarioError(path, "give exactly one of 'half_width' and 'extra_width'")
    key = "half_width" if "half_width" in doc else "extra_width"
    width = _number(doc[key], f"{path}.{key}")
    if not width > 0:
        raise ScenarioError(f"{path}.{key}", f"must be positive, got {width}")
    return IntervalSpec(center, **{key: width})


def parse_scenario(doc: Any) -> Scenario:
    """
    Validate a decoded scenario document.

    :raises ScenarioError: naming the first offending field.
    """
    if not isinstance(doc, dict):
        raise ScenarioError("<root>", "expected an object")
    hbar = _number(doc.get("hbar", 1.0), "hbar")
    if not hbar > 0:
        raise ScenarioError("hbar", f"must be positive, got {hbar}")

    data_doc = _require(doc, "classical_data", "")
    centers = _numbers(_require(data_doc, "centers", "classical_data"), "classical_data.centers")
    margins = _numbers(_require(data_doc, "margins", "classical_data"), "classical_data.margins")
    for k, margin in enumerate(margins):
        if not margin > 0:
            raise ScenarioError(f"classical_data.margins[{k}]", f"must be positive, got {margin}")
    try:
        data = ClassicalData(centers, margins)
    except ValueError as e:
        raise ScenarioError("classical_data", str(e)) from e
    n = data.n_classical

    hamiltonian = tuple(_parse_term(term, f"hamiltonian[{k}]", n)
                        for k, term in enumerate(_list(_require(doc, "hamiltonian", ""), "hamiltonian")))
    phi_c = _parse_state(_require(doc, "phi_c", ""), "phi_c")
    phi_q = _parse_state(_require(doc, "phi_q", ""), "phi_q")
    times = _numbers(_require(doc, "times", ""), "times")

    observables = []
    for k, entry in enumerate(_list(_require(doc, "observables", ""), "observables")):
        path = f"observables[{k}]"
        name = str(_require(entry, "name", path))
        generator = str(_require(entry, "generator", path))
        try:
            parse_generator(generator, n)
        except ValueError as e:
            raise ScenarioError(f"{path}.generator", str(e)) from e
        observables.append(ObservableSpec(name, generator))
    names = [spec.name for spec in observables]
    if len(set(names)) != len(names):
        raise ScenarioError("observables", "observable names must be unique")

    interval_doc = _require(doc, "intervals", "")
    if not isinstance(interval_doc, dict):
        raise ScenarioError("intervals", "expected an object keyed by observable name")
    intervals = {}
    for name, entries in interval_doc.items():
        if name not in names:
            raise ScenarioError(f"intervals.{name}", "no observable with this name")
        intervals[name] = tuple(_parse_interval(entry, f"intervals.{name}[{k}]")
                                for k, entry in enumerate(_list(entries, f"intervals.{name}")))

    p_values = _numbers(_require(doc, "p_values", ""), "p_values")
    for k, p in enumerate(p_values):
        if not 0 <= p < 1:
            raise ScenarioError(f"p_values[{k}]", f"must lie in [0, 1), got {p}")

    raw_orders = doc.get("order_L", 1)
    raw_orders = raw_orders if isinstance(raw_orders, list) else [raw_orders]
    orders = tuple(_integer(order, f"order_L[{k}]" if len(raw_orders) > 1 else "order_L", 1)
                   for k, order in enumerate(raw_orders))
    for order in orders:
        if order > 2:
            raise ScenarioError("order_L", f"sandwich bounds are available for orders 1 and 2, got {order}")

    dims_doc = _object(doc.get("dims", {}), "dims")
    dims = DimsSpec(
        _integer(dims_doc.get("classical", 40), "dims.classical", 2),
        _integer(dims_doc.get("quantum", 40), "dims.quantum", 2),
        bool(dims_doc.get("check_doubling", True)),
    )

    evolution_doc = _object(doc.get("evolution", {}), "evolution")
    degree_cap = evolution_doc.get("degree_cap")
    evolution = EvolutionSpec(
        _integer(evolution_doc.get("max_order", 25), "evolution.max_order", 1),
        None if degree_cap is None else _integer(degree_cap, "evolution.degree_cap"),
        _number(evolution_doc.get("tail_tolerance", 0.0), "evolution.tail_tolerance"),
    )
    if evolution.tail_tolerance < 0:
        raise ScenarioError("evolution.tail_tolerance", "must be non-negative")

    scenario = Scenario(hamiltonian, data, phi_c, phi_q, times, tuple(observables), intervals, p_values,
                        orders, hbar, dims, evolution)
    scenario.hybrid_hamiltonian()
    logger.info("Loaded scenario with %d Hamiltonian terms, %d observables and %d times",
                len(hamiltonian), len(observables), len(times))
    return scenario


def load_scenario(path: Union[str, Path]) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ScenarioError("<root>", f"invalid JSON: {e}") from e
    return parse_scenario(doc)


def example_text(name: str) -> str:
    """The bundled scenario document registered under name."""
    if name not in EXAMPLES:
        raise ValueError(f"Unknown example {name!r} (available: {', '.join(sorted(EXAMPLES))})")
    return (STORES / EXAMPLES[name]).read_text()
