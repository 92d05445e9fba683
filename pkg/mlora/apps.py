from django.apps import AppConfig


class MloraConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'mlora'
