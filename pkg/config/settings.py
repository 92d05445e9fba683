"""
Django settings for the gfix project.

The project runs without a database: Django provides settings, logging
configuration and the management-command front end (`./gfix <command>`).

For the full list of Django settings and their values, see
https://docs.djangoproject.com/en/5.0/ref/settings/
"""

from pathlib import Path
import os

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.getenv("SECRET_KEY", "gfix-offline")

DEBUG = os.getenv("DEBUG", "False").lower() in ("1", "true", "yes")

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    # Third-party
    "rest_framework",

    # Local apps
    "core",
    "tensor_store",
    "linalg",
    "mlora",
    "codec",
    "rd_opt",
    "alignment",
    "metrics",
    "cli",
]

# No persistence layer: archives and bitstreams are plain files.
DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True


# gfix tunables

GFIX_VERSION = "1.0.0"

GFIX = {
    "SEED": int(os.getenv("GFIX_SEED", "1234")),
    # linalg
    "SVD_TOLERANCE": float(os.getenv("GFIX_SVD_TOLERANCE", "1e-12")),
    "SVD_MAX_SWEEPS": int(os.getenv("GFIX_SVD_MAX_SWEEPS", "60")),
    # mlora
    "ILL_CONDITION_RTOL": float(os.getenv("GFIX_ILL_CONDITION_RTOL", "1e-12")),
    # codec
    "PMF_PRECISION_BITS": int(os.getenv("GFIX_PMF_PRECISION_BITS", "16")),
    # decoder refuses groups declaring more symbols than this
    "MAX_GROUP_SYMBOLS": int(os.getenv("GFIX_MAX_GROUP_SYMBOLS", str(1 << 28))),
    # rd_opt
    "DEFAULT_LAMBDAS": [0.03, 0.025, 0.01, 0.005, 0.002],
    "STEP_GRID_SIZE": int(os.getenv("GFIX_STEP_GRID_SIZE", "24")),
    "STEP_GRID_SPAN": (1e-4, 1e1),
    "MAX_REFINE_PASSES": int(os.getenv("GFIX_MAX_REFINE_PASSES", "4")),
    # alignment
    "SCHEDULE_STEPS": int(os.getenv("GFIX_SCHEDULE_STEPS", "1000")),
    "SCHEDULE_BETA_START": float(os.getenv("GFIX_SCHEDULE_BETA_START", "1e-4")),
    "SCHEDULE_BETA_END": float(os.getenv("GFIX_SCHEDULE_BETA_END", "0.02")),
    "STEPSIZE_OFFSETS": [-20, -15, -10, 0, 10, 20, 50],
    # metrics
    "PSNR_PEAK": float(os.getenv("GFIX_PSNR_PEAK", "1.0")),
}


LOG_DIR = Path(os.getenv("GFIX_LOG_DIR", str(BASE_DIR / "logs")))
os.makedirs(LOG_DIR, exist_ok=True)
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

GFIX_APPS = ["core", "tensor_store", "linalg", "mlora", "codec", "rd_opt", "alignment", "metrics", "cli"]


def _app_file_handler(app):
    return {
        "level": LOG_LEVEL,
        "class": "logging.handlers.RotatingFileHandler",
        "filename": str(LOG_DIR / f"{app}.log"),
        "maxBytes": 5_000_000,
        "backupCount": 5,
        "formatter": "json",
    }


LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {
            "format": "[{levelname}] {asctime} {name}: {message}",
            "style": "{",
        },
        "json": {
            "format": '{{"ts":"{asctime}","lvl":"{levelname}","logger":"{name}","msg":"{message}"}}',
            "style": "{",
        },
    },
    "handlers": {
        # stderr keeps stdout clean for command output
        "console": {
            "level": os.getenv("GFIX_CONSOLE_LOG_LEVEL", "WARNING"),
            "class": "logging.StreamHandler",
            "formatter": "simple",
        },
        "django_file": {
            "level": LOG_LEVEL,
            "class": "logging.handlers.RotatingFileHandler",
            "filename": str(LOG_DIR / "django.log"),
            "maxBytes": 5_000_000,
            "backupCount": 5,
            "formatter": "json",
        },
        **{f"{app}_file": _app_file_handler(app) for app in GFIX_APPS},
    },
    "loggers": {
        "django": {
            "handlers": ["django_file", "console"],
            "level": LOG_LEVEL,
            "propagate": True,
        },
        **{
            app: {"handlers": [f"{app}_file", "console"], "level": LOG_LEVEL, "propagate": False}
            for app in GFIX_APPS
        },
    },
}
