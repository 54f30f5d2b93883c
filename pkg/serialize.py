"""
Result files: results.json holds the whole bundle, bounds.csv and
spreads.csv hold long-format tables for plotting.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Union

import serpy

from constants import Verdict
from pipeline import (
    BoundRecord,
    ClassicalityRecord,
    ObservableRecord,
    ResultBundle,
    SequenceRecord,
    SpectrumRecord,
    SpreadRecord,
    TermRecord,
)

RESULTS_FILE = "results.json"
BOUNDS_FILE = "bounds.csv"
SPREADS_FILE = "spreads.csv"

BOUND_COLUMNS = ["time", "observable", "p", "L", "interval_center", "half_width", "lower", "oracle", "upper",
                 "verdict"]
SPREAD_COLUMNS = ["time", "observable", "p", "L", "spread"]


class TermSerializer(serpy.Serializer):
    classical_exponents = serpy.MethodField()
    quantum_word = serpy.StrField()
    re = serpy.FloatField()
    im = serpy.FloatField()

    def get_classical_exponents(self, obj: TermRecord) -> list[int]:
        return list(obj.classical_exponents)


class ObservableSerializer(serpy.Serializer):
    name = serpy.StrField()
    time = serpy.FloatField()
    terms = TermSerializer(many=True)
    tail_norm = serpy.FloatField()
    discarded_norm = serpy.FloatField()
    status = serpy.StrField()


class SpectrumSerializer(serpy.Serializer):
    name = serpy.StrField()
    time = serpy.FloatField()
    eigenvalues = serpy.MethodField()
    probabilities = serpy.MethodField()

    def get_eigenvalues(self, obj: SpectrumRecord) -> list[float]:
        return list(obj.eigenvalues)

    def get_probabilities(self, obj: SpectrumRecord) -> list[float]:
        return list(obj.probabilities)


class SequenceSerializer(serpy.Serializer):
    sequence = serpy.StrField()
    norm_squared = serpy.FloatField()
    bound = serpy.FloatField()
    passed = serpy.BoolField()


class ClassicalitySerializer(serpy.Serializer):
    order = serpy.IntField()
    passed = serpy.BoolField()
    checks = SequenceSerializer(many=True)


class SpreadSerializer(serpy.Serializer):
    time = serpy.FloatField()
    observable = serpy.StrField()
    p = serpy.FloatField()
    order = serpy.IntField()
    spread = serpy.FloatField()


class BoundSerializer(serpy.Serializer):
    time = serpy.FloatField()
    observable = serpy.StrField()
    p = serpy.FloatField()
    order = serpy.IntField()
    interval_center = serpy.FloatField()
    half_width = serpy.FloatField()
    lower = serpy.FloatField(required=False)
    upper = serpy.FloatField(required=False)
    hybrid = serpy.FloatField(required=False)
    oracle = serpy.FloatField(required=False)
    oracle_drift = serpy.FloatField(required=False)
    converged = serpy.BoolField()
    verdict = serpy.MethodField()
    status = serpy.StrField()

    def get_verdict(self, obj: BoundRecord) -> str:
        return obj.verdict.value


class ResultBundleSerializer(serpy.Serializer):
    seed = serpy.IntField()
    hbar = serpy.FloatField()
    passed = serpy.BoolField()
    classicality = ClassicalitySerializer(many=True)
    observables = ObservableSerializer(many=True)
    spectra = SpectrumSerializer(many=True)
    spreads = SpreadSerializer(many=True)
    bounds = BoundSerializer(many=True)
    warnings = serpy.MethodField()

    def get_warnings(self, obj: ResultBundle) -> list[str]:
        return list(obj.warnings)


def serialize(bundle: ResultBundle) -> str:
    return json.dumps(ResultBundleSerializer(bundle).data, sort_keys=True, indent=2)


def deserialize(obj: dict) -> ResultBundle:
    return ResultBundle(
        seed=obj["seed"],
        hbar=obj["hbar"],
        classicality=tuple(
            ClassicalityRecord(entry["order"], entry["passed"], tuple(SequenceRecord(**check) for check in entry["checks"]))
            for entry in obj["classicality"]
        ),
        observables=tuple(
            ObservableRecord(
                entry["name"], entry["time"],
                tuple(TermRecord(tuple(term["classical_exponents"]), term["quantum_word"], term["re"], term["im"])
                      for term in entry["terms"]),
                entry["tail_norm"], entry["discarded_norm"], entry["status"],
            )
            for entry in obj["observables"]
        ),
        spectra=tuple(
            SpectrumRecord(entry["name"], entry["time"], tuple(entry["eigenvalues"]), tuple(entry["probabilities"]))
            for entry in obj["spectra"]
        ),
        spreads=tuple(SpreadRecord(**entry) for entry in obj["spreads"]),
        bounds=tuple(BoundRecord(**{**entry, "verdict": Verdict.parse(entry["verdict"])}) for entry in obj["bounds"]),
        warnings=tuple(obj["warnings"]),
    )


def _write_csv(path: Path, columns: list[str], rows: list[list]) -> None:
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)


def _cell(value) -> str:
    return "" if value is None else repr(value) if isinstance(value, float) else str(value)


def dump_results(bundle: ResultBundle, out_dir: Union[str, Path]) -> Path:
    """Write results.json, bounds.csv and spreads.csv into out_dir (created if needed)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / RESULTS_FILE).write_text(serialize(bundle) + "\n")
    _write_csv(out / BOUNDS_FILE, BOUND_COLUMNS, [
        [_cell(v) for v in (b.time, b.observable, b.p, b.order, b.interval_center, b.half_width, b.lower, b.oracle,
                            b.upper, b.verdict.value)]
        for b in bundle.bounds
    ])
    _write_csv(out / SPREADS_FILE, SPREAD_COLUMNS, [
        [_cell(v) for v in (s.time, s.observable, s.p, s.order, s.spread)] for s in bundle.spreads
    ])
    return out


def load_results(out_dir: Union[str, Path]) -> ResultBundle:
    return deserialize(json.loads((Path(out_dir) / RESULTS_FILE).read_text()))
