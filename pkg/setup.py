import os
import re

from setuptools import find_packages, setup


def get_version(*file_paths):
    """Retrieves the version from django_etale_homology/__init__.py"""
    filename = os.path.join(os.path.dirname(__file__), *file_paths)
    version_file = open(filename).read()
    version_match = re.search(r"^__version__ = ['\"]([^'\"]*)['\"]", version_file, re.M)
    if version_match:
        version_str = version_match.group(1)
        return "0.0.0-dev" if version_str == "dev" else version_str
    raise RuntimeError("Unable to find version string.")


setup(
    name="django-etale-homology",
    version=get_version("django_etale_homology", "__init__.py"),
    description="""Exact homology, indices and full group elements of étale groupoids, as a Django app""",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    packages=find_packages(include=["django_etale_homology", "django_etale_homology.*"]),
    package_data={"django_etale_homology": ["bundled/*.json"]},
    include_package_data=True,
    install_requires=open("requirements.txt").readlines(),
    license="MIT",
    zip_safe=False,
    keywords="django-etale-homology",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Framework :: Django :: 3.2",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Natural Language :: English",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
)
