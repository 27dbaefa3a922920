"""
Admin configuration for stored runs.
"""

from django.contrib import admin

from .models import RunRecord


@admin.register(RunRecord)
class RunRecordAdmin(admin.ModelAdmin):
    """Admin for RunRecord model."""

    list_display = ['id', 'status', 'seed', 'output_path', 'created_at']
    list_filter = ['status', 'created_at']
    search_fields = ['error_message', 'output_path']
    readonly_fields = ['id', 'created_at', 'updated_at']
    date_hierarchy = 'created_at'

    fieldsets = (
        ('Run', {
            'fields': ('id', 'status', 'seed', 'output_path', 'error_message')
        }),
        ('Documents', {
            'fields': ('config', 'report')
        }),
        ('Metadata', {
            'fields': ('created_at', 'updated_at')
        }),
    )
