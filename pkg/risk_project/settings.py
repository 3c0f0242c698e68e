"""
Django settings for risk_project project.

The project has no web surface: Django is used for its settings layer,
management commands (the command-line front end), the ORM behind the
optional run archive, and the test runner.

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/
"""

from pathlib import Path
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv('SECRET_KEY', 'wbvar-local-only')

DEBUG = os.getenv('DEBUG', 'False') == 'True'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',

    # Third-party apps
    'rest_framework',

    # Local apps
    'wbvar',
]


# Database
# PostgreSQL when DB_NAME is configured, a local SQLite file otherwise.
# Only the run archive (wbvar.models.RiskRun) touches the database.

if os.getenv('DB_NAME'):
    DATABASES = {
        'default': {
            'ENGINE': 'django.db.backends.postgresql',
            'NAME': os.getenv('DB_NAME'),
            'USER': os.getenv('DB_USER'),
            'PASSWORD': os.getenv('DB_PASSWORD'),
            'HOST': os.getenv('DB_HOST'),
            'PORT': os.getenv('DB_PORT'),
        }
    }
else:
    DATABASES = {
        'default': {
            'ENGINE': 'django.db.backends.sqlite3',
            'NAME': BASE_DIR / 'wbvar_runs.sqlite3',
        }
    }


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# --- Logging ---
# Everything under the `wbvar` logger goes to stderr.

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'wbvar': {
            'handlers': ['console'],
            'level': os.getenv('WBVAR_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}


# --- Risk engine defaults ---
# Every entry can be overridden with an environment variable WBVAR_<NAME>.

def _env_float(name, default):
    value = os.getenv(f'WBVAR_{name}')
    return float(value) if value not in (None, '') else default


def _env_int(name, default):
    value = os.getenv(f'WBVAR_{name}')
    return int(value) if value not in (None, '') else default


def _env_floats(name, default):
    value = os.getenv(f'WBVAR_{name}')
    if value in (None, ''):
        return default
    return tuple(float(item) for item in value.split(',') if item.strip())


RISK_ENGINE = {
    'DEFAULT_WINDOW': _env_int('DEFAULT_WINDOW', 750),
    'DEFAULT_ALPHAS': _env_floats('DEFAULT_ALPHAS', (0.1, 0.05, 0.01, 0.005)),
    'EWMA_ZETA': _env_float('EWMA_ZETA', 0.94),
    'W2_GRID_SIZE': _env_int('W2_GRID_SIZE', 10_000),
    'FIXED_POINT_TOL': _env_float('FIXED_POINT_TOL', 1e-10),
    'FIXED_POINT_MAX_ITER': _env_int('FIXED_POINT_MAX_ITER', 500),
    'TRADING_DAYS': _env_int('TRADING_DAYS', 252),
    'SCALE_FLOOR': _env_float('SCALE_FLOOR', 1e-12),
    'SIGNIFICANT_DIGITS': _env_int('SIGNIFICANT_DIGITS', 10),
}
