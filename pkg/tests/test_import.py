import cbtool.__main__  # noqa: F401
import cbtool.bundle  # noqa: F401
import cbtool.category  # noqa: F401
import cbtool.chains  # noqa: F401
import cbtool.command_parse  # noqa: F401
import cbtool.config  # noqa: F401
import cbtool.document  # noqa: F401
import cbtool.fingrp  # noqa: F401
import cbtool.pair  # noqa: F401
import cbtool.presented  # noqa: F401
import cbtool.report  # noqa: F401
import cbtool.subz  # noqa: F401
import cbtool.version  # noqa: F401


def test_version():
    assert cbtool.version.__version__
