from cbtool.version import __version__  # noqa: F401
