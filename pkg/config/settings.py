"""
Django settings for the tagging-latency project.

Values come from the environment (or a `.env` file next to manage.py)
through django-environ. The toolkit defaults below can be overridden at
runtime from the admin through dynamic preferences, see
latency/dynamic_preferences_registry.py.
"""

import environ
import os
from pathlib import Path

env = environ.Env(
    # set casting, default value
    DEBUG=(bool, False),
    SECRET_KEY=(str, 'tagging-latency-local-only'),
    LOG_LEVEL=(str, 'WARNING'),
    RECORD_RUNS=(bool, True),
)

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Take environment variables from .env file
environ.Env.read_env(os.path.join(BASE_DIR, '.env'))


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = env('SECRET_KEY')

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = env('DEBUG')

ALLOWED_HOSTS = env.list('ALLOWED_HOSTS', default=['localhost', '127.0.0.1'])


# Application definition

INSTALLED_APPS = [
    "django.contrib.admin",
    "django.contrib.auth",
    "django.contrib.contenttypes",
    "django.contrib.sessions",
    "django.contrib.messages",
    "django.contrib.staticfiles",
    'dynamic_preferences',
    'latency',
]

MIDDLEWARE = [
    "django.middleware.security.SecurityMiddleware",
    "django.contrib.sessions.middleware.SessionMiddleware",
    "django.middleware.common.CommonMiddleware",
    "django.middleware.csrf.CsrfViewMiddleware",
    "django.contrib.auth.middleware.AuthenticationMiddleware",
    "django.contrib.messages.middleware.MessageMiddleware",
    "django.middleware.clickjacking.XFrameOptionsMiddleware",
]

ROOT_URLCONF = "config.urls"

TEMPLATES = [
    {
        "BACKEND": "django.template.backends.django.DjangoTemplates",
        "DIRS": [],
        "APP_DIRS": True,
        "OPTIONS": {
            "context_processors": [
                'django.template.context_processors.debug',
                "django.template.context_processors.request",
                "django.contrib.auth.context_processors.auth",
                "django.contrib.messages.context_processors.messages",
            ],
        },
    },
]


# Database
# The run ledger (ToolRun, LatencyMeasurement) and the dynamic preferences
# live here.

DATABASES = {
    "default": env.db('DATABASE_URL', default=f"sqlite:///{BASE_DIR / 'db.sqlite3'}"),
}


AUTH_PASSWORD_VALIDATORS = [
    {
        "NAME": "django.contrib.auth.password_validation.MinimumLengthValidator",
    },
]


LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = True

USE_TZ = True


STATIC_URL = 'static/'
STATIC_ROOT = os.path.join(BASE_DIR, 'staticfiles')

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# Logging
# Everything goes to stderr so command output on stdout stays byte-identical.

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "console": {
            "format": "%(levelname)s %(name)s %(message)s",
        },
    },
    "handlers": {
        "stderr": {
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": "console",
        },
    },
    "loggers": {
        "latency": {
            "handlers": ["stderr"],
            "level": env('LOG_LEVEL'),
            "propagate": False,
        },
    },
}


# Tagging-latency toolkit defaults
# Overridden by dynamic preferences (admin), then by command-line flags.

TRACE_THRESHOLD_FRACTION = env.float('TRACE_THRESHOLD_FRACTION', default=0.5)
TRACE_HYSTERESIS_FRACTION = env.float('TRACE_HYSTERESIS_FRACTION', default=0.1)
TRACE_DRIFT_WINDOW_MS = env.float('TRACE_DRIFT_WINDOW_MS', default=500.0)
TRACE_MAX_LATENCY_MS = env.float('TRACE_MAX_LATENCY_MS', default=250.0)
TRACE_MIN_SEPARATION_MS = env.float('TRACE_MIN_SEPARATION_MS', default=100.0)

# None means "use the screen's scan time a"
MULTIPASS_THRESHOLD_MS = env.float('MULTIPASS_THRESHOLD_MS', default=None)

MC_DEFAULT_TRIALS = env.int('MC_DEFAULT_TRIALS', default=10000)
MC_BLOCK_TRIALS = env.int('MC_BLOCK_TRIALS', default=250)
MC_WORKERS = env.int('MC_WORKERS', default=1)

RECORD_RUNS = env('RECORD_RUNS')
