"""Independent reference implementations used as test oracles.

Nothing here imports the package's gate code: states are built with
np.kron and gates are explicit 4x4 matrices.
"""
import numpy as np
import pytest

S2 = 1 / np.sqrt(2)
H = np.array([[1, 1], [1, -1]], dtype=complex) * S2
I2 = np.eye(2, dtype=complex)
H1 = np.kron(H, I2)
H2 = np.kron(I2, H)
HH = np.kron(H, H)
CZ = np.diag([1, 1, 1, -1]).astype(complex)

K0 = np.array([1, 0], dtype=complex)
K1 = np.array([0, 1], dtype=complex)
KP = (K0 + K1) * S2
KM = (K0 - K1) * S2
SINGLE = {"0": K0, "1": K1, "+": KP, "-": KM}


def vec(label):
    return np.kron(SINGLE[label[0]], SINGLE[label[1]])


def crc32_bitwise(data: bytes) -> int:
    crc = 0xFFFFFFFF
    for byte in data:
        crc ^= byte
        for _ in range(8):
            crc = (crc >> 1) ^ (0xEDB88320 if crc & 1 else 0)
    return crc ^ 0xFFFFFFFF


def sigma3(n, p):
    return 3 * np.sqrt(n * p * (1 - p))


@pytest.fixture
def rng():
    from dsqc.qsim import RandomSource
    return RandomSource(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
