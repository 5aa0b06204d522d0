from django.apps import AppConfig


class InnerCodesConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'inner_codes'
    verbose_name = "Inner codes"
