"""
Spectral curve app configuration.
"""

from django.apps import AppConfig


class SpectralCurveConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'spectral_curve'
    verbose_name = 'Spectral curve'
