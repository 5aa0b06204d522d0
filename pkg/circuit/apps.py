from django.apps import AppConfig


class CircuitConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'circuit'
    verbose_name = "Gate schedules and fault propagation"
