import os


def is_postgres():
    return os.getenv("ETALE_TEST_DB", None) == "postgres"


def is_slow():
    """Whether the long acceptance sweeps should run"""
    return os.getenv("ETALE_SLOW_TESTS", None) == "1"
