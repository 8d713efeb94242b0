__author__ = 'geodl-kit developers'
try:
    from ._version import version as __version__
except ImportError:
    from .__about__ import __version__

SRC_ROOT = __path__[0]
