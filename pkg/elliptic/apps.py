"""
Elliptic app configuration.
"""

from django.apps import AppConfig


class EllipticConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'elliptic'
    verbose_name = 'Theta & Weierstrass functions'
