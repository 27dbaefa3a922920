"""
Stored numerical runs.
"""

import uuid

from django.db import models
from django.utils.translation import gettext_lazy as _


class RunRecord(models.Model):
    """
    One batch run: the validated config, the report document and the
    outcome of its comparisons.
    """

    STATUS_CHOICES = (
        ('pending', 'Pending'),
        ('passed', 'Passed'),
        ('failed', 'Failed'),
        ('error', 'Error'),
    )

    id = models.UUIDField(
        primary_key=True,
        default=uuid.uuid4,
        editable=False
    )

    config = models.JSONField(
        help_text=_('Validated run configuration')
    )

    report = models.JSONField(
        null=True,
        blank=True,
        help_text=_('Report document (schema loopcurve.report/1)')
    )

    status = models.CharField(
        max_length=10,
        choices=STATUS_CHOICES,
        default='pending'
    )

    seed = models.BigIntegerField(
        default=0,
        help_text=_('Seed of the probe-point generator')
    )

    output_path = models.CharField(
        max_length=500,
        blank=True,
        help_text=_('Directory the report files were written to')
    )

    error_message = models.TextField(
        blank=True,
        help_text=_('First task error, if any')
    )

    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        verbose_name = _('run')
        verbose_name_plural = _('runs')
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['status', '-created_at'], name='runs_status_created_idx'),
        ]

    def __str__(self):
        return f"Run {self.id} ({self.status})"

    @property
    def task_names(self):
        return [task.get('task') for task in self.config.get('tasks', [])]
