from unittest import skipUnless

from django.test import override_settings

from django_etale_homology.decorators import register_suite
from django_etale_homology.exceptions import ExitCodes
from django_etale_homology.registry import suites_registry
from django_etale_homology.suite import CaseResult

from .base import EtaleHomologyTestCase
from .utils import is_slow


class TestSuites(EtaleHomologyTestCase):
    def test_autodiscovered(self):
        for name in ["zmat.snf", "sft.full_shift", "sft.index_homomorphism", "af.transport", "towers.cpthopf", "zn.ratios"]:
            self.assertIn(name, suites_registry)
        self.assertEqual(
            sorted(s.name for s in suites_registry.for_module(modules=["af"])),
            ["af.h1", "af.riesz", "af.transport"],
        )
        self.assertNotIn("af.h1", [s.name for s in suites_registry.for_module(excluded_modules=["af"])])

    def test_registered_suites_pass(self):
        cases = {"zmat.snf": 10, "sft.full_shift": 2, "sft.index_homomorphism": 10, "af.h1": 5, "af.transport": 10, "af.riesz": 5}
        for suite in suites_registry.values():
            if suite.slow:
                continue
            result = suite.run(seed=3, cases=cases.get(suite.name))
            self.assertTrue(result.ok, result.to_dict())
            self.assertGreater(result.passed, 0)

    @skipUnless(is_slow(), "slow")
    def test_slow_suites_pass(self):
        for name in ["sft.oracle", "towers.cpthopf"]:
            result = suites_registry[name].run(seed=3)
            self.assertTrue(result.ok, result.to_dict())

    def test_register_suite(self):
        @register_suite(module="tests", cases=4)
        def draws(rng, cases):
            for case in range(cases):
                yield CaseResult(f"#{case}", True, str(int(rng.integers(0, 10**6))))

        name = f"{__name__}.TestSuites.test_register_suite.<locals>.draws"
        self.assertIn(name, suites_registry)
        self.assertIs(draws._suite, suites_registry[name])

        first, second = draws.run(seed=11), draws.run(seed=11)
        self.assertEqual(len(first.cases), 4)
        self.assertEqual([c.detail for c in first.cases], [c.detail for c in second.cases])
        self.assertNotEqual([c.detail for c in first.cases], [c.detail for c in draws.run(seed=12).cases])
        self.assertEqual(len(draws.run(cases=2).cases), 2)

    def test_failing_suite(self):
        @register_suite(name="failing", module="tests", cases=3)
        def failing(rng, cases):
            for case in range(cases):
                yield CaseResult(f"#{case}", case != 1, "odd one out")

        result = failing.run()
        self.assertFalse(result.ok)
        self.assertEqual(result.to_dict()["failures"], [{"label": "#1", "detail": "odd one out"}])
        self.assertEqual(str(result), "Suite 'failing' ❌ 2/3 cases passed")

        report = self.assertExitCode(ExitCodes.SUITE_FAILED, "check", "failing")
        self.assertFalse(report.payload["ok"])
        self.assertEqual(report.payload["suites"][0]["failed"], 1)

    @override_settings(ETALE_SLOW_SUITES=False)
    def test_check_all(self):
        suites_registry.clear()

        @register_suite(name="quick", module="tests", cases=2)
        def quick(rng, cases):
            for case in range(cases):
                yield CaseResult(f"#{case}", True)

        @register_suite(name="slow", module="tests", cases=2, slow=True)
        def slow(rng, cases):
            for case in range(cases):
                yield CaseResult(f"#{case}", True)

        report = self.groupoid("check", "all")
        self.assertEqual([s["name"] for s in report.payload["suites"]], ["quick"])

        report = self.groupoid("check", "all", "--slow")
        self.assertEqual([s["name"] for s in report.payload["suites"]], ["quick", "slow"])
