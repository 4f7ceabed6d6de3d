from django.apps import AppConfig
from django.utils.module_loading import autodiscover_modules

from .logging import logger, show_suites


class DjangoEtaleHomologyConfig(AppConfig):
    name = "django_etale_homology"
    label = "etalehomology"
    default_auto_field = "django.db.models.BigAutoField"

    def ready(self):
        # Autodiscover suites.py modules

        logger.info("Autodiscovering suites.py...")
        autodiscover_modules("suites")

        show_suites()
