"""Clone detection over flow-augmented ASTs.

Thin wrapper around the compiled extension; see `faast._core` for the
operation docstrings.
"""

try:
    from faast._core import *  # noqa: F401,F403
    from faast._core import __version__  # noqa: F401
except ImportError:  # extension built without the package layout (ctest runs)
    from _core import *  # type: ignore # noqa: F401,F403
    from _core import __version__  # type: ignore # noqa: F401
