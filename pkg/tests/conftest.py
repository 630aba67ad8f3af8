import pytest

from ma_bench import SystemParams


@pytest.fixture
def params():
    """Reference parameter set: 1 MHz band, 1 s slot, 1000-bit packets,
    0 dB cell-edge SNR, path-loss exponent 4, minima 1 ms / 1 kHz."""
    return SystemParams()
