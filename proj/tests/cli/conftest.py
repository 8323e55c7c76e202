import os
import subprocess
from pathlib import Path

import pytest


def pytest_addoption(parser):
    parser.addoption("--dcpcc-bin", default=os.environ.get("DCPCC_BIN", "dcpcc"), help="path to the dcpcc executable")


@pytest.fixture(scope="session")
def dcpcc(pytestconfig):
    binary = pytestconfig.getoption("--dcpcc-bin")

    def run(*args, env=None, check=None):
        full_env = dict(os.environ)
        full_env.pop("DCPCC_OUTPUT_ROOT", None)
        if env:
            full_env.update(env)
        proc = subprocess.run([binary, *map(str, args)], capture_output=True, text=True, env=full_env, timeout=600)
        if check is not None:
            assert proc.returncode == check, proc.stdout + proc.stderr
        return proc

    return run


SMALL = [
    "--data.kind=synthetic",
    "--synth.n_samples=3000",
    "--synth.dim=3",
    "--model.hidden=8",
    "--train.max_epochs=2",
]


@pytest.fixture(scope="session")
def trained_run(dcpcc, tmp_path_factory):
    root = tmp_path_factory.mktemp("runs")
    proc = dcpcc("train", *SMALL, f"--output.root={root}", "--output.name=small", check=0)
    return Path(root) / "small", proc.stdout
