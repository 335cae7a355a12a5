import numpy as np
import pytest

from hqcalc import CommutingOperator, QMatrix, Quaternion
from hqcalc.quaternions import ImaginaryUnit

# Hamilton structure constants: UNIT_TABLE[i, j] = components of e_i * e_j
UNIT_TABLE = np.zeros((4, 4, 4))
_refs = [
    Quaternion(1, 0, 0, 0),
    Quaternion(0, 1, 0, 0),
    Quaternion(0, 0, 1, 0),
    Quaternion(0, 0, 0, 1),
]
for _i in range(4):
    for _j in range(4):
        from hqcalc import qmul

        UNIT_TABLE[_i, _j] = qmul(_refs[_i], _refs[_j]).components


def brute_qmatmul(a: QMatrix, b: QMatrix) -> QMatrix:
    """Reference Hamilton product via the structure-constant tensor."""
    out = np.einsum("iab,jbc,ijk->kac", a.data, b.data, UNIT_TABLE)
    return QMatrix(out)


def rel(a, b, floor=1.0):
    if isinstance(a, QMatrix):
        return (a - b).fro() / max(floor, b.fro())
    if isinstance(a, Quaternion):
        return abs(a - b) / max(floor, abs(b))
    return abs(a - b) / max(floor, abs(b))


def random_quaternion(rng, scale=2.0):
    return Quaternion(*(scale * rng.standard_normal(4)))


def random_unit(rng):
    v = rng.standard_normal(3)
    while np.linalg.norm(v) < 1e-3:
        v = rng.standard_normal(3)
    return ImaginaryUnit.from_vector(v)


def random_sectorial_entry(rng, omega_max=np.pi / 6):
    """Diagonal entry u + J v with argument below omega_max and |q| in [0.5, 4]."""
    u = rng.uniform(0.5, 4.0)
    v = rng.uniform(0.0, u * np.tan(omega_max))
    unit = random_unit(rng)
    return Quaternion(u, unit.x * v, unit.y * v, unit.z * v)


def random_sectorial_operator(rng, n=None, omega_max=np.pi / 6):
    n = n or int(rng.integers(1, 5))
    return CommutingOperator.diagonal([random_sectorial_entry(rng, omega_max) for _ in range(n)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
