from .base import *  # noqa

DEBUG = True

LOGGING["root"]["level"] = env("THERMALQAS_LOG_LEVEL", default="DEBUG")  # noqa: F405
