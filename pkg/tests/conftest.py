import os
from pathlib import Path

import numpy as np
import pytest

MNIST_CANDIDATES = [
    "train-images-idx3-ubyte",
    "train-images-idx3-ubyte.gz",
    "/root/data/train-images-idx3-ubyte",
    "/root/data/mnist5k-images-idx3-ubyte",
]

ACCEPTANCE_LINES = []


def find_mnist(official_only=False):
    env = os.environ.get("LASSOPATH_MNIST")
    cands = ([env] if env else []) + MNIST_CANDIDATES
    for c in cands:
        if c and Path(c).exists() and (not official_only or "train-images" in Path(c).name):
            return Path(c)
    return None


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance_log():
    def log(name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
