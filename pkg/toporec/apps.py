"""
Topological recursion app configuration.
"""

from django.apps import AppConfig


class ToporecConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'toporec'
    verbose_name = 'Topological recursion'
