import django.utils.timezone
import picklefield.fields
from django.db import migrations, models


class Migration(migrations.Migration):
    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="ComputationReport",
            fields=[
                ("id", models.BigAutoField(primary_key=True, serialize=False)),
                ("computation", models.CharField(max_length=255)),
                ("inputs", models.JSONField(default=dict)),
                ("payload", models.JSONField(default=dict)),
                (
                    "provenance",
                    models.CharField(
                        choices=[
                            ("matrix", "Matrix formula"),
                            ("truncation", "Truncation"),
                            ("both", "Matrix formula and truncation"),
                            ("construction", "Construction"),
                            ("search", "Search"),
                            ("suite", "Property suite"),
                        ],
                        default="matrix",
                        max_length=32,
                    ),
                ),
                (
                    "exit_code",
                    models.IntegerField(
                        choices=[
                            (0, "Success"),
                            (65, "Validation error"),
                            (66, "Document error"),
                            (75, "Undecided"),
                            (76, "Not found"),
                            (77, "Classes differ"),
                            (78, "Unstabilized"),
                            (79, "Suite failed"),
                            (99, "Crashed"),
                        ],
                        default=0,
                    ),
                ),
                (
                    "state",
                    models.CharField(
                        choices=[
                            ("SUCCEEDED", "Succeeded"),
                            ("UNDECIDED", "Undecided"),
                            ("FAILED", "Failed"),
                        ],
                        default="SUCCEEDED",
                        max_length=32,
                    ),
                ),
                (
                    "result",
                    picklefield.fields.PickledObjectField(blank=True, editable=False, null=True),
                ),
                (
                    "result_preview",
                    models.CharField(blank=True, editable=False, max_length=255, null=True),
                ),
                ("created", models.DateTimeField(default=django.utils.timezone.now)),
                ("duration", models.DurationField(blank=True, null=True)),
            ],
            options={
                "verbose_name": "Computation Report",
            },
        ),
    ]
