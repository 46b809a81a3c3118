import os
import sys
from pathlib import Path

# Under ctest the freshly built in-tree module must be the one imported, even
# when an editable install of the package is also present.
_expected = os.environ.get("MDPM_EXPECT_MODULE_DIR")
if _expected:
    sys.meta_path[:] = [f for f in sys.meta_path if not type(f).__module__.startswith("_editable_skbc_")]

import mdpm  # noqa: E402


def pytest_report_header(config):
    return f"mdpm module: {mdpm._mdpm.__file__}"


def pytest_sessionstart(session):
    if _expected and Path(mdpm._mdpm.__file__).parent.resolve() != Path(_expected).resolve():
        raise RuntimeError(f"imported {mdpm._mdpm.__file__}, expected a module from {_expected}")
