from django.contrib import admin

from .models import LatencyMeasurement, ToolRun


class LatencyMeasurementInline(admin.TabularInline):
    model = LatencyMeasurement
    extra = 0
    fields = ('source', 'mean_ms', 'sd_ms', 'n_events', 'bimodal', 'lofap_ms')
    readonly_fields = fields
    show_change_link = True


@admin.register(ToolRun)
class ToolRunAdmin(admin.ModelAdmin):
    list_display = ('kind', 'status', 'config_path', 'seed', 'exit_code', 'created_at', 'completed_at')
    list_filter = ('kind', 'status')
    search_fields = ('config_path', 'error_message')
    ordering = ('-created_at',)
    readonly_fields = ('parameters', 'summary', 'error_message', 'exit_code', 'created_at', 'completed_at')
    inlines = [LatencyMeasurementInline]


@admin.register(LatencyMeasurement)
class LatencyMeasurementAdmin(admin.ModelAdmin):
    list_display = ('source', 'mean_ms', 'sd_ms', 'n_events', 'unpaired_tags', 'unpaired_photos',
                    'bimodal', 'created_at')
    list_filter = ('bimodal', 'sample_rate_hz')
    search_fields = ('source',)
    ordering = ('-created_at',)
    raw_id_fields = ('run',)
    readonly_fields = ('per_event_ms', 'lofap_ms', 'created_at')
