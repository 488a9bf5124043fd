from .base import *  # noqa

DEBUG = False

# Cluster runs: one process per (seed, beta), each single-threaded
THREADS = env.int("THERMALQAS_THREADS", default=os.cpu_count() or 1)  # noqa: F405
