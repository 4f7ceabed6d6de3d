from .registry import suites_registry
from .suite import Suite


def register_suite(**kwargs):
    """Wraps the generator function in a Suite and adds it to the suites registry"""

    def inner(func):
        # Default name is the qualified function name
        if "name" not in kwargs:
            kwargs["name"] = func.__globals__["__name__"] + "." + func.__qualname__

        # Create the suite instance
        kwargs["callable"] = func
        suite = Suite(**kwargs)

        # Attach that instance to the callable
        func._suite = suite

        # Include the `run` callable
        func.run = suite.run

        # Add to the registry
        suites_registry[suite.name] = suite

        # Decorator returns the function itself
        return func

    return inner
