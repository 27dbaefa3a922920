# Generated by Django 4.2.25 on 2026-10-18 09:12

from django.db import migrations, models
import uuid


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='RunRecord',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('config', models.JSONField(help_text='Validated run configuration')),
                ('report', models.JSONField(blank=True, help_text='Report document (schema loopcurve.report/1)', null=True)),
                ('status', models.CharField(choices=[('pending', 'Pending'), ('passed', 'Passed'), ('failed', 'Failed'), ('error', 'Error')], default='pending', max_length=10)),
                ('seed', models.BigIntegerField(default=0, help_text='Seed of the probe-point generator')),
                ('output_path', models.CharField(blank=True, help_text='Directory the report files were written to', max_length=500)),
                ('error_message', models.TextField(blank=True, help_text='First task error, if any')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
            ],
            options={
                'verbose_name': 'run',
                'verbose_name_plural': 'runs',
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['status', '-created_at'], name='runs_status_created_idx')],
            },
        ),
    ]
