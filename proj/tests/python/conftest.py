import os
import shutil
import subprocess

import pytest


@pytest.fixture(scope="session")
def pgl_bin():
    path = os.environ.get("PGL_BIN") or shutil.which("pgl")
    if path:
        path = os.path.abspath(path)
    if not path:
        pytest.skip("pgl executable not found (set PGL_BIN)")
    return path


@pytest.fixture
def run(pgl_bin, tmp_path):
    def go(*args):
        return subprocess.run([pgl_bin, *args], cwd=tmp_path, capture_output=True, text=True, timeout=300)

    return go
