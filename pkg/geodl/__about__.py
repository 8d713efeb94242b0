__version__ = 'unknown'
