from django.conf import settings

DEFAULTS = {
    # consecutive isomorphic connecting maps required by colimit_stabilize
    "ETALE_STABILIZATION_WINDOW": 3,
    "ETALE_DEFAULT_BUDGET": 64,
    "ETALE_DEFAULT_DEPTH": 6,
    "ETALE_DEFAULT_SEED": 1729,
    # largest basis (per degree) a truncation level may build
    "ETALE_MAX_BASIS_SIZE": 60000,
    "ETALE_ZN_MAX_WINDOW": 256,
    "ETALE_SLOW_SUITES": False,
}


def get_setting(name):
    """Reads a setting from the django settings, falling back to the package default.

    Works without configured settings, so the computation modules stay usable as
    a plain library."""

    if settings.configured:
        return getattr(settings, name, DEFAULTS[name])
    return DEFAULTS[name]
