"""
Critical app configuration.
"""

from django.apps import AppConfig


class CriticalConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'critical'
    verbose_name = 'Critical limits & phases'
