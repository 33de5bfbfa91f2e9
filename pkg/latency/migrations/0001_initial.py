# Generated by Django 6.0 on 2026-10-19 09:00

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):
    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="ToolRun",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                (
                    "kind",
                    models.CharField(
                        choices=[
                            ("model", "Latency table"),
                            ("montecarlo", "Barycentre Monte Carlo"),
                            ("analyze", "Trace analysis"),
                            ("correct", "Epoch correction"),
                            ("synthesize", "Synthetic trace"),
                            ("report", "Guideline report"),
                        ],
                        max_length=20,
                    ),
                ),
                (
                    "status",
                    models.CharField(
                        choices=[
                            ("pending", "Pending"),
                            ("processing", "Processing"),
                            ("completed", "Completed"),
                            ("failed", "Failed"),
                        ],
                        default="pending",
                        max_length=20,
                    ),
                ),
                ("config_path", models.CharField(blank=True, max_length=500)),
                ("seed", models.BigIntegerField(blank=True, null=True)),
                ("parameters", models.JSONField(blank=True, default=dict)),
                ("summary", models.JSONField(blank=True, default=dict)),
                ("error_message", models.TextField(blank=True)),
                ("exit_code", models.PositiveSmallIntegerField(blank=True, null=True)),
                ("created_at", models.DateTimeField(auto_now_add=True)),
                ("completed_at", models.DateTimeField(blank=True, null=True)),
            ],
            options={
                "ordering": ["-created_at"],
            },
        ),
        migrations.CreateModel(
            name="LatencyMeasurement",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("source", models.CharField(max_length=500)),
                ("sample_rate_hz", models.FloatField()),
                ("mean_ms", models.FloatField()),
                ("sd_ms", models.FloatField()),
                ("n_events", models.PositiveIntegerField()),
                ("unpaired_tags", models.PositiveIntegerField(default=0)),
                ("unpaired_photos", models.PositiveIntegerField(default=0)),
                ("bimodal", models.BooleanField(default=False)),
                ("lofap_ms", models.FloatField(blank=True, null=True)),
                ("per_event_ms", models.JSONField(blank=True, default=list)),
                ("created_at", models.DateTimeField(auto_now_add=True)),
                (
                    "run",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="measurements",
                        to="latency.toolrun",
                    ),
                ),
            ],
            options={
                "ordering": ["-created_at"],
            },
        ),
    ]
