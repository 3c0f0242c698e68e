from django.db import models


class RiskRun(models.Model):
    """A command run kept for later comparison, written only with --archive."""
    command = models.CharField(max_length=32)
    config = models.JSONField()
    report = models.JSONField()
    out_dir = models.CharField(max_length=500, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ('-created_at',)

    def __str__(self):
        return f"{self.command} run at {self.created_at:%Y-%m-%d %H:%M:%S}"
