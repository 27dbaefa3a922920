"""
Main URL configuration for the loopcurve project.
"""

from django.contrib import admin
from django.urls import path, include

urlpatterns = [
    # Admin
    path('admin/', admin.site.urls),

    # Stored runs and on-demand computations
    path('api/', include('runs.urls')),
]

# Admin site customization
admin.site.site_header = "loopcurve Administration"
admin.site.site_title = "loopcurve Admin"
admin.site.index_title = "Stored numerical runs"
