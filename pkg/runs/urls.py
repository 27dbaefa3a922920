"""
URL configuration for runs app.
"""

from django.urls import include, path
from rest_framework.routers import DefaultRouter

from . import views

app_name = 'runs'

router = DefaultRouter()
router.register('runs', views.RunRecordViewSet, basename='run')

urlpatterns = [
    path('', include(router.urls)),
    path('phases/', views.phases, name='phases'),
    path('geometry/', views.geometry, name='geometry'),
]
