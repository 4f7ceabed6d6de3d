from datetime import timedelta

from django.db import models
from django.template.defaultfilters import truncatechars
from django.utils.timezone import now
from django.utils.translation import gettext_lazy as _
from picklefield.fields import PickledObjectField

from .exceptions import ExitCodes
from .report import Report


class ComputationReport(models.Model):
    """A persisted command outcome, created by `groupoid ... --save`."""

    class Meta:
        verbose_name = "Computation Report"

    class States(models.TextChoices):
        SUCCEEDED = "SUCCEEDED", _("Succeeded")
        UNDECIDED = "UNDECIDED", _("Undecided")
        FAILED = "FAILED", _("Failed")

        @classmethod
        def icon(cls, state):
            if state == cls.SUCCEEDED:
                return "✔️"
            elif state == cls.UNDECIDED:
                return "❓"
            elif state == cls.FAILED:
                return "❌"
            raise NotImplementedError(f"Unknown state: {state}")

        @classmethod
        def from_exit_code(cls, exit_code):
            if exit_code == ExitCodes.SUCCESS:
                return cls.SUCCEEDED
            elif exit_code in (ExitCodes.UNDECIDED, ExitCodes.NOT_FOUND, ExitCodes.UNSTABILIZED):
                return cls.UNDECIDED
            return cls.FAILED

    class Provenance(models.TextChoices):
        MATRIX = "matrix", _("Matrix formula")
        TRUNCATION = "truncation", _("Truncation")
        BOTH = "both", _("Matrix formula and truncation")
        CONSTRUCTION = "construction", _("Construction")
        SEARCH = "search", _("Search")
        SUITE = "suite", _("Property suite")

    id = models.BigAutoField(primary_key=True)
    computation = models.CharField(max_length=255)
    inputs = models.JSONField(default=dict)
    payload = models.JSONField(default=dict)
    provenance = models.CharField(max_length=32, choices=Provenance.choices, default=Provenance.MATRIX)
    exit_code = models.IntegerField(choices=ExitCodes.choices, default=ExitCodes.SUCCESS)
    state = models.CharField(max_length=32, choices=States.choices, default=States.SUCCEEDED)
    result = PickledObjectField(blank=True, null=True)
    result_preview = models.CharField(max_length=255, blank=True, null=True, editable=False)
    created = models.DateTimeField(default=now)
    duration = models.DurationField(null=True, blank=True)

    def __str__(self):
        return f"Report '{self.computation}' {self.icon} [{self.id}]"

    @property
    def icon(self):
        return ComputationReport.States.icon(self.state)

    @classmethod
    def from_report(cls, report: Report, result=None) -> "ComputationReport":
        seconds = report.timing.get("seconds")
        return cls.objects.create(
            computation=report.computation,
            inputs=report.inputs,
            payload=report.payload,
            provenance=report.provenance,
            exit_code=report.exit_code,
            state=cls.States.from_exit_code(report.exit_code),
            result=result,
            result_preview=truncatechars(str(result), 255) if result is not None else None,
            duration=timedelta(seconds=seconds) if seconds is not None else None,
        )

    def to_report(self) -> Report:
        timing = {"seconds": self.duration.total_seconds()} if self.duration is not None else {}
        return Report(
            computation=self.computation,
            inputs=self.inputs,
            payload=self.payload,
            provenance=self.provenance,
            exit_code=self.exit_code,
            timing=timing,
        )
