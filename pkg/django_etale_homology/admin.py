import json

from django.contrib import admin
from django.template.defaultfilters import truncatechars
from django.utils.formats import date_format
from django.utils.html import format_html
from django.utils.timesince import timesince

from .models import ComputationReport


class ReadOnlyAdmin(admin.ModelAdmin):
    def has_change_permission(self, request, obj=None):
        return False

    def has_add_permission(self, request):
        return False


@admin.register(ComputationReport)
class ComputationReportAdmin(ReadOnlyAdmin):
    list_display = [
        "icon",
        "computation",
        "inputs_",
        "provenance",
        "created_",
        "duration_",
        "result_preview",
    ]
    list_display_links = ["computation"]
    list_filter = ["computation", "provenance", "state"]
    ordering = ["-created"]
    readonly_fields = ["payload_"]
    fieldsets = [
        (
            None,
            {"fields": ["icon", "computation", "state", "exit_code"]},
        ),
        (
            "Inputs",
            {"fields": ["inputs", "provenance"]},
        ),
        (
            "Time",
            {"fields": ["created_", "duration_"]},
        ),
        (
            "Output",
            {"fields": ["payload_", "result_preview"]},
        ),
    ]

    def get_queryset(self, request):
        # the pickled result may be large
        return super().get_queryset(request).defer("result")

    def inputs_(self, obj):
        return truncatechars(json.dumps(obj.inputs, ensure_ascii=False), 48)

    def payload_(self, obj):
        return format_html("<pre>{}</pre>", json.dumps(obj.payload, indent=2, ensure_ascii=False))

    @admin.display(ordering="created")
    def created_(self, obj):
        longtime = date_format(obj.created, format="DATETIME_FORMAT", use_l10n=True)
        return format_html('<span title="{}">{}&nbsp;ago</span>', longtime, timesince(obj.created, depth=1))

    @admin.display(ordering="duration")
    def duration_(self, obj):
        if obj.duration is None:
            return None
        return format_seconds(obj.duration.total_seconds())


def format_seconds(seconds):
    """Computations mostly last under a second, so milliseconds are shown first"""
    if seconds < 1:
        return f"{seconds * 1000:.0f} ms"
    if seconds < 60:
        return f"{seconds:.1f} s"
    minutes, seconds = divmod(int(seconds), 60)
    hours, minutes = divmod(minutes, 60)
    if hours:
        return f"{hours} h {minutes} min"
    return f"{minutes} min {seconds} s"
