__version__ = "dev"  # DO NOT CHANGE THIS LINE - it will be replaced by CI workflow
default_app_config = "django_etale_homology.apps.DjangoEtaleHomologyConfig"
