from django.apps import AppConfig


class TensorStoreConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'tensor_store'
