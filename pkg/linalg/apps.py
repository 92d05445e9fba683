from django.apps import AppConfig


class LinalgConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'linalg'
