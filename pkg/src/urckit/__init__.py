"""urckit: design and simulation toolkit for ultra-reliable wireless links."""

__version__ = "0.1.0"
