"""
Correlators app configuration.
"""

from django.apps import AppConfig


class CorrelatorsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'correlators'
    verbose_name = 'Unstable correlators & kernels'
