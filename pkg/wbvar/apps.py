from django.apps import AppConfig


class WbvarConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'wbvar'
    verbose_name = 'Wasserstein barycenter risk'
