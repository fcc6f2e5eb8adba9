# Generated by Django 5.2.7 on 2026-10-18 09:12

from django.db import migrations, models

import harness.services.emitter


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='SimulationRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('mode', models.CharField(choices=[('single', 'Single operating point'), ('sweep_rate', 'Conversion-rate sweep'), ('sweep_fin', 'Input-frequency sweep'), ('calibrate', 'Calibration'), ('linearity', 'Histogram linearity')], default='single', max_length=20)),
                ('seed', models.BigIntegerField(default=0)),
                ('f_cr_hz', models.FloatField(help_text='Conversion rate in Hz')),
                ('f_in_hz', models.FloatField(blank=True, help_text='Coherent input frequency in Hz', null=True)),
                ('record_length', models.PositiveIntegerField()),
                ('snr_db', models.FloatField(blank=True, null=True)),
                ('sndr_db', models.FloatField(blank=True, null=True)),
                ('sfdr_db', models.FloatField(blank=True, null=True)),
                ('enob', models.FloatField(blank=True, null=True)),
                ('fom', models.FloatField(blank=True, null=True)),
                ('config', models.JSONField(default=dict, encoder=harness.services.emitter.SimulationJSONEncoder, help_text='Resolved run spec')),
                ('report', models.JSONField(default=dict, encoder=harness.services.emitter.SimulationJSONEncoder, help_text='Metrics report or sweep table')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'verbose_name': 'Simulation Run',
                'verbose_name_plural': 'Simulation Runs',
                'db_table': 'simulation_run',
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['mode', '-created_at'], name='simulation__mode_5b1c2e_idx')],
            },
        ),
    ]
