import datetime
from fractions import Fraction

from django.utils import timezone
from freezegun import freeze_time

from django_etale_homology.exceptions import ExitCodes
from django_etale_homology.models import ComputationReport
from django_etale_homology.report import Report

from .base import EtaleHomologyTestCase


class TestReports(EtaleHomologyTestCase):
    def test_report_json(self):
        """Timing is not part of the comparison"""

        report = Report("zn bound", {"m": 16}, {"bound": "1445/64"}, "matrix", 0, {"seconds": 0.5})
        same = Report.from_json(report.to_json())
        self.assertEqual(same, report)
        self.assertEqual(same.timing, {"seconds": 0.5})
        self.assertEqual(Report("zn bound", {"m": 16}, {"bound": "1445/64"}, "matrix", 0, {"seconds": 3}), report)

        self.assertIn("bound: 1445/64", report.to_text())
        self.assertIn("(0.500s)", report.to_text())

    @freeze_time("2026-03-01 12:00", tick=True)
    def test_save(self):
        self.groupoid("zn", "bound", "--m", "16", "--save")

        saved = ComputationReport.objects.get()
        self.assertEqual(saved.computation, "zn bound")
        self.assertEqual(saved.state, ComputationReport.States.SUCCEEDED)
        self.assertEqual(saved.icon, "✔️")
        self.assertEqual(saved.result, Fraction(1445, 64))
        self.assertEqual(saved.result_preview, "1445/64")
        self.assertEqual(saved.created.date(), datetime.date(2026, 3, 1))
        self.assertIsNotNone(saved.duration)
        self.assertEqual(saved.to_report().payload["bound"], "1445/64")

    def test_save_failures(self):
        self.assertExitCode(
            ExitCodes.CLASSES_DIFFER,
            "af", "transport", "--diagram", "uhf2.json", "--from", "uhf2_U.json", "--to", "uhf2_W.json", "--save",
        )  # fmt: skip
        saved = ComputationReport.objects.get()
        self.assertEqual(saved.state, ComputationReport.States.FAILED)
        self.assertEqual(saved.exit_code, ExitCodes.CLASSES_DIFFER)
        self.assertIsNone(saved.result)

        self.assertExitCode(ExitCodes.NOT_FOUND, "sft", "find-index", "--matrix", "designated.json", "--target", "5", "--budget", "10", "--save")
        self.assertEqual(ComputationReport.objects.get(computation="sft find-index").state, ComputationReport.States.UNDECIDED)

    def test_round_trip(self):
        report = Report("towers extend", {"towers": "towers.json"}, {"towers": []}, "construction", 0, {"seconds": 2.0})
        with freeze_time("2026-03-01"):
            saved = ComputationReport.from_report(report, result={"a": 8})
            self.assertEqual(saved.created, timezone.now())

        saved.refresh_from_db()
        self.assertEqual(saved.to_report(), report)
        self.assertEqual(saved.to_report().timing, {"seconds": 2.0})
        self.assertEqual(saved.result, {"a": 8})
        self.assertEqual(str(saved), f"Report 'towers extend' ✔️ [{saved.pk}]")

    def test_states(self):
        States = ComputationReport.States
        self.assertEqual(States.from_exit_code(ExitCodes.SUCCESS), States.SUCCEEDED)
        self.assertEqual(States.from_exit_code(ExitCodes.UNSTABILIZED), States.UNDECIDED)
        self.assertEqual(States.from_exit_code(ExitCodes.CRASHED), States.FAILED)
        self.assertEqual(States.icon(States.UNDECIDED), "❓")
        with self.assertRaises(NotImplementedError):
            States.icon("unknown")
