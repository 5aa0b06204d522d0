from django.apps import AppConfig


class NoiseModelsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'noise_models'
    verbose_name = "Noise models"
