from django.db import models

from harness.services.emitter import SimulationJSONEncoder, build_record
from harness.services.runner import MODES


class SimulationRun(models.Model):
    """
    Stored result of one harness run with the record needed to reproduce it
    """
    mode = models.CharField(max_length=20, choices=MODES, default='single')
    seed = models.BigIntegerField(default=0)
    f_cr_hz = models.FloatField(help_text="Conversion rate in Hz")
    f_in_hz = models.FloatField(null=True, blank=True, help_text="Coherent input frequency in Hz")
    record_length = models.PositiveIntegerField()
    snr_db = models.FloatField(null=True, blank=True)
    sndr_db = models.FloatField(null=True, blank=True)
    sfdr_db = models.FloatField(null=True, blank=True)
    enob = models.FloatField(null=True, blank=True)
    fom = models.FloatField(null=True, blank=True)
    config = models.JSONField(default=dict, encoder=SimulationJSONEncoder, help_text="Resolved run spec")
    report = models.JSONField(default=dict, encoder=SimulationJSONEncoder, help_text="Metrics report or sweep table")
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        db_table = 'simulation_run'
        ordering = ['-created_at']
        verbose_name = 'Simulation Run'
        verbose_name_plural = 'Simulation Runs'
        indexes = [
            models.Index(fields=['mode', '-created_at']),
        ]

    def __str__(self):
        return f"{self.get_mode_display()} @ {self.f_cr_hz / 1e6:.1f} MS/s (seed {self.seed})"

    @classmethod
    def from_report(cls, report, spec) -> 'SimulationRun':
        """Unsaved row for a MetricsReport"""
        return cls(
            mode=report.mode,
            seed=report.seed,
            f_cr_hz=report.f_cr_hz,
            f_in_hz=report.f_in_hz,
            record_length=report.record_length,
            snr_db=report.snr_db,
            sndr_db=report.sndr_db,
            sfdr_db=report.sfdr_db,
            enob=report.enob,
            fom=report.fom,
            config=spec.to_dict(),
            report=build_record(report)['report'],
        )

    @classmethod
    def from_table(cls, table, spec) -> 'SimulationRun':
        return cls(
            mode=spec.mode,
            seed=spec.seed,
            f_cr_hz=spec.f_cr,
            f_in_hz=spec.stimulus.frequency_hz,
            record_length=spec.record_length,
            config=spec.to_dict(),
            report=build_record(table)['table'],
        )
