import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from versealign import kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # JIT compile once so timed tests measure the solve, not the compile
    kernels.warmup()
