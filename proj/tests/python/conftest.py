import os
import pathlib
import shutil

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("DFCORR_CLI") or shutil.which("dfcorr") or str(ROOT / "build" / "tools" / "dfcorr")
    if not pathlib.Path(path).exists():
        pytest.skip("dfcorr executable not built")
    return path


@pytest.fixture(scope="session")
def schemas():
    import json

    return {p.name.split(".")[0]: json.loads(p.read_text()) for p in (ROOT / "schemas").glob("*.schema.json")}
