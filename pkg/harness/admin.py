from django.contrib import admin

from .models import SimulationRun


@admin.register(SimulationRun)
class SimulationRunAdmin(admin.ModelAdmin):
    """
    Admin interface for stored simulation runs
    """
    list_display = [
        'id', 'mode', 'f_cr_display', 'f_in_display', 'record_length',
        'snr_db', 'sndr_db', 'sfdr_db', 'enob', 'seed', 'created_at'
    ]
    list_filter = ['mode', 'record_length', 'created_at']
    search_fields = ['seed']
    readonly_fields = ['config', 'report', 'created_at']
    ordering = ['-created_at']

    def f_cr_display(self, obj):
        return f"{obj.f_cr_hz / 1e6:.1f} MS/s"
    f_cr_display.short_description = 'Conversion rate'

    def f_in_display(self, obj):
        if obj.f_in_hz is None:
            return "-"
        return f"{obj.f_in_hz / 1e6:.3f} MHz"
    f_in_display.short_description = 'Input'
