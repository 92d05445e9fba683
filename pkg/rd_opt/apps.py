from django.apps import AppConfig


class RdOptConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'rd_opt'
