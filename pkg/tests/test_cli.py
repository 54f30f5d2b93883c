import copy
import csv
import io
import json
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from ed_utils.decorators import number

from constants import StateKind, Verdict
from main import EXIT_OK, EXIT_USAGE, main
from pipeline import run
from scenario import EXAMPLES, ScenarioError, example_text, load_scenario, parse_scenario
from serialize import BOUND_COLUMNS, BOUNDS_FILE, RESULTS_FILE, SPREAD_COLUMNS, SPREADS_FILE, dump_results, load_results


def example_doc():
    return json.loads(example_text("coupled-oscillator"))


def small_doc():
    """The bundled scenario cut down to two observables, one time and small dims."""
    doc = example_doc()
    doc["times"] = [0.5]
    doc["observables"] = [{"name": "q", "generator": "q1"}, {"name": "Q", "generator": "Q1"}]
    doc["intervals"] = {
        "q": [{"center": 1.0, "extra_width": 0.5}, {"center": 0.0, "half_width": 0.05}],
        "Q": [{"center": 0.0, "extra_width": 0.5}],
    }
    doc["order_L"] = 1
    doc["dims"] = {"classical": 12, "quantum": 12, "check_doubling": False}
    return doc


class TestCli(unittest.TestCase):

    def assertScenarioError(self, doc, path):
        with self.assertRaises(ScenarioError) as ctx:
            parse_scenario(doc)
        self.assertEqual(ctx.exception.path, path, str(ctx.exception))

    def call(self, *argv):
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = main(list(argv))
        return code, out.getvalue(), err.getvalue()

    @number("8.1")
    def test_bundled_example_parses(self):
        self.assertIn("coupled-oscillator", EXAMPLES)
        scenario = parse_scenario(example_doc())
        self.assertEqual(scenario.times, (0.5, 1.0, 2.0))
        self.assertEqual([spec.name for spec in scenario.observables], ["q", "x", "Q", "P"])
        self.assertEqual(scenario.orders, (1, 2))
        self.assertEqual(scenario.phi_c.kind, StateKind.COHERENT)
        self.assertEqual(scenario.dims.pair, (40, 40))
        self.assertEqual(scenario.dims.doubled().pair, (80, 80))
        h = scenario.hybrid_hamiltonian()
        self.assertAlmostEqual(h.coefficient((2, 0)).coefficient(()), 0.5)
        self.assertAlmostEqual(h.coefficient((0, 1)).coefficient((3,)), 0.1)
        with self.assertRaises(ValueError):
            example_text("no-such-example")

    @number("8.2")
    def test_scenario_errors_name_the_field(self):
        cases = [
            (lambda doc: doc["classical_data"].update(margins=[0.0, 1.0]), "classical_data.margins[0]"),
            (lambda doc: doc.update(p_values=[1.0]), "p_values[0]"),
            (lambda doc: doc.update(order_L=3), "order_L"),
            (lambda doc: doc.update(order_L=[1, 0]), "order_L[1]"),
            (lambda doc: doc.pop("times"), "times"),
            (lambda doc: doc["observables"][0].update(generator="x1"), "observables[0].generator"),
            (lambda doc: doc["hamiltonian"][2].update(quantum_word=["q1"]), "hamiltonian[2].quantum_word[0]"),
            (lambda doc: doc["hamiltonian"][0].update(classical_exponents=[2]), "hamiltonian[0].classical_exponents"),
            (lambda doc: doc["hamiltonian"][0].update(coeff_im=0.5), "hamiltonian"),
            (lambda doc: doc["intervals"].update(z=[]), "intervals.z"),
            (lambda doc: doc["intervals"]["q"][0].update(half_width=1.0), "intervals.q[0]"),
            (lambda doc: doc.update(phi_q={"squeezed": 1}), "phi_q"),
            (lambda doc: doc.update(hbar=0), "hbar"),
            (lambda doc: doc.update(dims={"classical": 1}), "dims.classical"),
        ]
        for mutate, path in cases:
            with self.subTest(path=path):
                doc = copy.deepcopy(example_doc())
                mutate(doc)
                self.assertScenarioError(doc, path)
        self.assertScenarioError([], "<root>")

    @number("8.3")
    def test_load_scenario(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "scenario.json"
            path.write_text("{not json")
            with self.assertRaises(ScenarioError):
                load_scenario(path)
            path.write_text(json.dumps(small_doc()))
            self.assertEqual(load_scenario(path).times, (0.5,))

    @number("8.4")
    def test_example_command(self):
        code, out, _ = self.call("example")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out), example_doc())
        with tempfile.TemporaryDirectory() as tmp:
            target = Path(tmp) / "scenario.json"
            code, out, _ = self.call("example", "--name", "coupled-oscillator", "--out", str(target))
            self.assertEqual(code, EXIT_OK)
            self.assertEqual(out, "")
            self.assertEqual(target.read_text(), example_text("coupled-oscillator"))

    @number("8.5")
    def test_usage_errors(self):
        for argv in ([], ["run"], ["check-identities", "--trials", "0"], ["example", "--name", "pendulum"],
                     ["run", "s.json", "--out", "x", "--threads", "zero"]):
            with self.subTest(argv=argv):
                with self.assertRaises(SystemExit) as ctx:
                    self.call(*argv)
                self.assertEqual(ctx.exception.code, EXIT_USAGE)

    @number("8.6")
    def test_run_rejects_bad_scenarios(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / "out"
            code, _, err = self.call("run", str(Path(tmp) / "missing.json"), "--out", str(out))
            self.assertEqual(code, EXIT_USAGE)
            self.assertIn("cannot read", err)
            doc = small_doc()
            doc["p_values"] = [1.5]
            bad = Path(tmp) / "bad.json"
            bad.write_text(json.dumps(doc))
            code, _, err = self.call("run", str(bad), "--out", str(out))
            self.assertEqual(code, EXIT_USAGE)
            self.assertIn("p_values[0]", err)
            self.assertFalse(out.exists())

    @number("8.7")
    def test_check_identities_command(self):
        code, out, _ = self.call("check-identities", "--seed", "4", "--trials", "3")
        self.assertEqual(code, EXIT_OK)
        self.assertIn("star_associativity", out)
        self.assertIn("canonicality", out)
        self.assertIn("relative", out)
        self.assertNotIn("FAILED", out)

    @number("8.8")
    def test_pipeline_bundle(self):
        scenario = parse_scenario(small_doc())
        bundle = run(scenario, threads=2, seed=5)
        self.assertEqual(bundle.seed, 5)
        self.assertEqual(len(bundle.observables), 2)
        self.assertEqual(len(bundle.spectra), 2)
        self.assertEqual(len(bundle.spreads), 2)
        self.assertEqual(len(bundle.bounds), 3)
        self.assertTrue(all(record.passed for record in bundle.classicality))
        # Q is conserved, so its spread vanishes.
        q_spread = next(s for s in bundle.spreads if s.observable == "Q")
        self.assertAlmostEqual(q_spread.spread, 0.0, delta=1e-12)
        narrow = next(b for b in bundle.bounds if b.observable == "q" and b.half_width == 0.05)
        self.assertEqual(narrow.verdict, Verdict.SKIPPED)
        self.assertIsNone(narrow.lower)
        for bound in bundle.bounds:
            self.assertIsNone(bound.oracle_drift)
            if bound.verdict != Verdict.SKIPPED:
                self.assertLessEqual(bound.lower, bound.upper)
        self.assertEqual(bundle.count(Verdict.PASS) + bundle.count(Verdict.FAIL) + bundle.count(Verdict.SKIPPED), 3)
        with self.assertRaises(ValueError):
            run(scenario, threads=0)

    @number("8.9")
    def test_results_round_trip(self):
        bundle = run(parse_scenario(small_doc()), seed=1)
        with tempfile.TemporaryDirectory() as tmp:
            out = dump_results(bundle, Path(tmp) / "results")
            self.assertEqual(load_results(out), bundle)
            self.assertEqual(json.loads((out / RESULTS_FILE).read_text())["passed"], bundle.passed)
            with (out / BOUNDS_FILE).open() as handle:
                rows = list(csv.reader(handle))
            self.assertEqual(rows[0], BOUND_COLUMNS)
            self.assertEqual(len(rows), 1 + len(bundle.bounds))
            skipped = [row for row in rows[1:] if row[-1] == Verdict.SKIPPED.value]
            self.assertTrue(skipped)
            self.assertEqual(skipped[0][BOUND_COLUMNS.index("lower")], "")
            with (out / SPREADS_FILE).open() as handle:
                self.assertEqual(next(csv.reader(handle)), SPREAD_COLUMNS)

    @number("8.10")
    def test_run_command(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "scenario.json"
            path.write_text(json.dumps(small_doc()))
            out = Path(tmp) / "out"
            code, stdout, _ = self.call("run", str(path), "--out", str(out), "--seed", "3")
            bundle = load_results(out)
            self.assertEqual(code, EXIT_OK if bundle.passed else 1)
            self.assertEqual(bundle.seed, 3)
            self.assertIn("skipped", stdout)
