from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Only used by Django internals; nothing here is served over HTTP.
SECRET_KEY = config("DJANGO_SECRET_KEY", default="bcc-skeleton-local-development-key")

DEBUG = config("DEBUG", cast=bool, default=False)

ALLOWED_HOSTS = config("ALLOWED_HOSTS", default="localhost,127.0.0.1").split(",")

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'rest_framework',
    'core',
    'inner_codes',
    'lattice',
    'noise_models',
    'circuit',
    'decoder',
    'montecarlo',
    'analysis',
]

REST_FRAMEWORK = {
    # the serializers validate run configs and shape reports; no API surface
    "UNAUTHENTICATED_USER": None,
}

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# -------------------------
# Simulation settings
# -------------------------
BCC_DEFAULT_SEED = config("BCC_DEFAULT_SEED", cast=int, default=20240601)
BCC_THREADS = config("BCC_THREADS", cast=int, default=1)
BCC_CHUNK_SIZE = config("BCC_CHUNK_SIZE", cast=int, default=2000)
BCC_USE_CELERY = config("BCC_USE_CELERY", cast=bool, default=False)

# pymatching | blossom
BCC_DECODER_ENGINE = config("BCC_DECODER_ENGINE", default="pymatching")

# idle qubits in the circuit-level model see the single-qubit channel at rate p
BCC_IDLE_NOISE = config("BCC_IDLE_NOISE", cast=bool, default=True)

BCC_BOOTSTRAP_RESAMPLES = config("BCC_BOOTSTRAP_RESAMPLES", cast=int, default=200)
BCC_FIT_STARTS = config("BCC_FIT_STARTS", cast=int, default=12)

# -------------------------
# Logging
# -------------------------
BCC_LOG_LEVEL = config("BCC_LOG_LEVEL", default="INFO")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {"format": "%(asctime)s %(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "simple"},
    },
    "root": {"handlers": ["console"], "level": BCC_LOG_LEVEL},
    "loggers": {
        # per-chunk progress is DEBUG; keep Celery's own chatter at WARNING
        "celery": {"level": "WARNING"},
    },
}

# Celery settings
CELERY_BROKER_URL = config("REDIS_URL", default="redis://127.0.0.1:6379/0")
CELERY_RESULT_BACKEND = CELERY_BROKER_URL
CELERY_TASK_ALWAYS_EAGER = config("CELERY_TASK_ALWAYS_EAGER", cast=bool, default=True)
CELERY_TASK_SERIALIZER = "json"
CELERY_RESULT_SERIALIZER = "json"
CELERY_ACCEPT_CONTENT = ["json"]
