"""Stochastic differential equation toolkit for sparse, irregular panel data.

The heavy lifting lives in the compiled ``_panelsde`` extension; this package
re-exports its public surface.
"""

try:
    from ._panelsde import *  # noqa: F401,F403
    from ._panelsde import __version__  # noqa: F401
except ImportError:
    from _panelsde import *  # noqa: F401,F403
    from _panelsde import __version__  # noqa: F401
