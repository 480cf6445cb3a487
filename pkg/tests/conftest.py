import io

import numpy as np
import pytest
from PIL import Image

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    """Collect one pass/fail line per acceptance check for the run summary."""
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance checks")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def png_bytes(width: int, height: int, color=(128, 128, 128), pixels=None) -> bytes:
    """Encode a solid-color or explicit-pixel RGB image as PNG bytes."""
    if pixels is None:
        pixels = np.tile(np.asarray(color, dtype=np.uint8), (height, width, 1))
    buf = io.BytesIO()
    Image.fromarray(np.asarray(pixels, dtype=np.uint8)).save(buf, format="PNG")
    return buf.getvalue()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
