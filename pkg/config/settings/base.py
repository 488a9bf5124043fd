"""
Base settings for the ThermalQAS project.
"""
import os
from pathlib import Path

import environ

# Build paths inside the project like this: BASE_DIR / 'subdir'
BASE_DIR = Path(__file__).resolve().parent.parent.parent

# Load environment variables from .env file
env = environ.Env()
env_file = os.path.join(BASE_DIR, ".env")
if os.path.isfile(env_file):
    env.read_env(env_file)

SECRET_KEY = env("SECRET_KEY", default="thermalqas-local-key")

DEBUG = env.bool("DEBUG", default=False)

ALLOWED_HOSTS = []

# Application definition
DJANGO_APPS = [
    "django.contrib.contenttypes",
    "django.contrib.auth",
]

THIRD_PARTY_APPS = [
    "rest_framework",
]

LOCAL_APPS = [
    "apps.core",
    "apps.syk",
    "apps.quantum",
    "apps.vqtsp",
    "apps.codec",
    "apps.environment",
    "apps.neural",
    "apps.agent",
    "apps.analytics",
]

INSTALLED_APPS = DJANGO_APPS + THIRD_PARTY_APPS + LOCAL_APPS

# No models: runs, candidates and checkpoints live in run directories.
DATABASES = {}

USE_TZ = True
TIME_ZONE = "UTC"

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# Run directories
OUTPUT_DIR = Path(env("THERMALQAS_OUTPUT_DIR", default=str(BASE_DIR / "runs")))

# Worker processes for independent (seed, beta) runs; also the torch thread count.
THREADS = env.int("THERMALQAS_THREADS", default=1)

# Domain defaults
THERMALQAS = {
    # Ordered-sum prefactor of the SYK Hamiltonian (1 drops the 1/q! of the literal formula)
    "HAMILTONIAN_PREFACTOR": 1.0,
    "MAX_DENSE_QUBITS": 8,
    "DEFAULT_BETAS": [5.2, 18.0, 35.0],
    # Median IBM Eagle r3 error rates
    "NOISE_BITFLIP_1Q": 2.342e-4,
    "NOISE_DEPOLARIZING_2Q": 8.043e-3,
    "ZETA_F": 1e-2,
    "ZETA_FID": 0.9,
    "REWARD_WEIGHTS": (0.6, 0.4),
    "STEP_EVALUATIONS": 200,
    "FINAL_EVALUATIONS": 1000,
    # D_max by qubit count; larger registers fall back to the last entry
    "D_MAX": {1: 30, 2: 30, 3: 30, 4: 30, 5: 30, 6: 40, 7: 40, 8: 40},
    "AGENT": {
        "batch_size": 1000,
        "memory_size": 20000,
        "dropout": 0.0,
        "target_update_every": 500,
        "gamma": 5e-3,
        "epsilon_start": 1.0,
        "epsilon_decay": 0.99995,
        "epsilon_min": 5e-2,
        "max_episodes": 5000,
        "learning_rate": 1e-3,
        # Episodes between trainer checkpoints
        "checkpoint_every": 25,
    },
    "CNN_CHANNELS": [32, 64, 128, 256],
    "FNN_NEURONS": [1000, 1000, 1000, 1000],
    # (w_a, w_b) keyed by reward mode and Majorana count
    "FILTER_WEIGHTS": {
        "free_energy": {8: (0.5, 0.0), 10: (1.02, 0.0), 12: (2.0, 0.0), 14: (0.0, 2.0)},
        "free_energy_fidelity": {8: (0.8, 0.0), 10: (1.02, 0.0), 12: (1.16, 0.0), 14: (0.0, 2.0)},
    },
    "WALL_CLOCK_HOURS": 48.0,
}

# Logging
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{levelname} {asctime} {module} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "level": "DEBUG",
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": env("THERMALQAS_LOG_LEVEL", default="INFO"),
    },
}
