"""qlext - Queue Layout Extension solver toolkit"""

__version__ = "0.1.0"
