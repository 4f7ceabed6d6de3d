import logging

from .registry import suites_registry

formatter = logging.Formatter(
    "[%(asctime)s][%(levelname)s][etalehomology] %(message)s", "%Y-%m-%d %H:%M:%S"
)

handler = logging.StreamHandler()
handler.setFormatter(formatter)

logger = logging.getLogger("etalehomology")
logger.setLevel(logging.INFO)
logger.addHandler(handler)


def show_suites():
    """Helper function that shows the suites registry contents"""

    if len(suites_registry):
        suites_names = ", ".join(suites_registry.keys())
        logger.info(f"{len(suites_registry)} suites registered: {suites_names}")
    else:
        logger.info("No suites registered")
