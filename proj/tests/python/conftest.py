import os
import pathlib
import shutil

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def root():
    return ROOT


@pytest.fixture(scope="session")
def cli():
    exe = os.environ.get("HASE_CLI") or shutil.which("hase")
    if not exe:
        for cand in (ROOT / "build" / "hase",):
            if cand.exists():
                exe = str(cand)
    if not exe:
        pytest.skip("hase executable not found (set HASE_CLI)")
    return exe
