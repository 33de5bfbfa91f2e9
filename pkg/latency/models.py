from django.db import models


class RunKind(models.TextChoices):
    MODEL = 'model', 'Latency table'
    MONTECARLO = 'montecarlo', 'Barycentre Monte Carlo'
    ANALYZE = 'analyze', 'Trace analysis'
    CORRECT = 'correct', 'Epoch correction'
    SYNTHESIZE = 'synthesize', 'Synthetic trace'
    REPORT = 'report', 'Guideline report'


class RunStatus(models.TextChoices):
    PENDING = 'pending', 'Pending'
    PROCESSING = 'processing', 'Processing'
    COMPLETED = 'completed', 'Completed'
    FAILED = 'failed', 'Failed'


class ToolRun(models.Model):
    """One invocation of a toolkit command."""
    kind = models.CharField(max_length=20, choices=RunKind.choices)
    status = models.CharField(max_length=20, choices=RunStatus.choices, default=RunStatus.PENDING)
    config_path = models.CharField(max_length=500, blank=True)
    seed = models.BigIntegerField(null=True, blank=True)
    parameters = models.JSONField(default=dict, blank=True)
    summary = models.JSONField(default=dict, blank=True)
    error_message = models.TextField(blank=True)
    exit_code = models.PositiveSmallIntegerField(null=True, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)
    completed_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.kind} ({self.status})"


class LatencyMeasurement(models.Model):
    """Latency estimated from one tag/photodiode recording."""
    run = models.ForeignKey(ToolRun, on_delete=models.CASCADE, related_name='measurements')
    source = models.CharField(max_length=500)
    sample_rate_hz = models.FloatField()
    mean_ms = models.FloatField()
    sd_ms = models.FloatField()
    n_events = models.PositiveIntegerField()
    unpaired_tags = models.PositiveIntegerField(default=0)
    unpaired_photos = models.PositiveIntegerField(default=0)
    bimodal = models.BooleanField(default=False)
    lofap_ms = models.FloatField(null=True, blank=True)
    per_event_ms = models.JSONField(default=list, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.source}: {self.mean_ms:.1f} ms (n={self.n_events})"
