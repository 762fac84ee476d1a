"""cardex: two-sided identity card field extraction toolkit."""

__version__ = "0.1.0"
