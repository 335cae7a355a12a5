"""Quaternion scalar arithmetic and sector geometry.

Scalars are elements w + x*e1 + y*e2 + z*e3 with three anticommuting
imaginary units (e1*e2 = e3 and cyclic).  Every value here is immutable
and every operation is pure, so instances can be shared freely between
threads.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .errors import ConditioningWarning, DomainError

EPS = float(np.finfo(np.float64).eps)

# |a| below this is a hard error in qinv; below the soft bound it only warns.
_INV_HARD_TOL = 1e-300
_INV_SOFT_TOL = 1e-14


class Quaternion:
    """Immutable quaternion scalar with Hamilton-product arithmetic."""

    __slots__ = ("w", "x", "y", "z")

    def __init__(self, w=0.0, x=0.0, y=0.0, z=0.0):
        object.__setattr__(self, "w", float(w))
        object.__setattr__(self, "x", float(x))
        object.__setattr__(self, "y", float(y))
        object.__setattr__(self, "z", float(z))

    def __setattr__(self, name, value):
        raise AttributeError("Quaternion is immutable")

    # -- constructors ------------------------------------------------

    @classmethod
    def from_components(cls, comps):
        w, x, y, z = (float(c) for c in comps)
        return cls(w, x, y, z)

    @classmethod
    def from_json(cls, data):
        arr = [float(c) for c in data]
        if len(arr) != 4 or not all(math.isfinite(c) for c in arr):
            raise ValueError("quaternion JSON must be 4 finite doubles")
        return cls(*arr)

    # -- structure ---------------------------------------------------

    @property
    def components(self):
        return np.array([self.w, self.x, self.y, self.z])

    @property
    def re(self):
        return self.w

    @property
    def imag_vector(self):
        return np.array([self.x, self.y, self.z])

    @property
    def conj(self):
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm_sq(self):
        return self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z

    def __abs__(self):
        return math.sqrt(self.norm_sq())

    def imag_norm(self):
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def is_real(self, tol=0.0):
        return self.imag_norm() <= tol

    # -- arithmetic --------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Quaternion(self.w + other.w, self.x + other.x, self.y + other.y, self.z + other.z)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return qmul(self, other)

    def __rmul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return qmul(other, self)

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(self.w / other, self.x / other, self.y / other, self.z / other)
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = ONE
        for _ in range(k):
            out = qmul(out, self)
        return out

    # -- comparison / io ---------------------------------------------

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self.w, self.x, self.y, self.z) == (other.w, other.x, other.y, other.z)

    def __hash__(self):
        return hash((self.w, self.x, self.y, self.z))

    def allclose(self, other, atol=1e-12, rtol=1e-12):
        other = _coerce(other)
        return bool(np.allclose(self.components, other.components, atol=atol, rtol=rtol))

    def to_json(self):
        return [self.w, self.x, self.y, self.z]

    def __repr__(self):
        return f"Quaternion({self.w!r}, {self.x!r}, {self.y!r}, {self.z!r})"


def _coerce(value):
    if isinstance(value, Quaternion):
        return value
    if isinstance(value, (int, float)):
        return Quaternion(float(value))
    if isinstance(value, ImaginaryUnit):
        return value.as_quaternion()
    return NotImplemented


ZERO = Quaternion()
ONE = Quaternion(1.0)
E1 = Quaternion(0.0, 1.0)
E2 = Quaternion(0.0, 0.0, 1.0)
E3 = Quaternion(0.0, 0.0, 0.0, 1.0)


def qmul(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product a*b."""
    a = _coerce(a)
    b = _coerce(b)
    return Quaternion(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )


def qinv(a: Quaternion) -> Quaternion:
    """Multiplicative inverse conj(a)/|a|^2."""
    a = _coerce(a)
    n2 = a.norm_sq()
    n = math.sqrt(n2)
    if n < _INV_HARD_TOL:
        raise ZeroDivisionError("quaternion modulus below invertibility threshold")
    if n < _INV_SOFT_TOL:
        warnings.warn("inverting a quaternion of modulus %.3e" % n, ConditioningWarning)
    c = a.conj
    return Quaternion(c.w / n2, c.x / n2, c.y / n2, c.z / n2)


class ImaginaryUnit:
    """Point of the unit sphere of purely imaginary quaternions."""

    __slots__ = ("x", "y", "z")

    def __init__(self, x, y, z):
        x, y, z = float(x), float(y), float(z)
        n = math.sqrt(x * x + y * y + z * z)
        if abs(n - 1.0) > 1e-14:
            raise ValueError("imaginary unit must have modulus 1 (got %.17g)" % n)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)

    def __setattr__(self, name, value):
        raise AttributeError("ImaginaryUnit is immutable")

    @classmethod
    def from_vector(cls, vec):
        x, y, z = (float(v) for v in vec)
        n = math.sqrt(x * x + y * y + z * z)
        if n == 0.0:
            raise ValueError("zero vector has no direction")
        return cls(x / n, y / n, z / n)

    @classmethod
    def from_json(cls, data):
        arr = [float(c) for c in data]
        if len(arr) != 3 or not all(math.isfinite(c) for c in arr):
            raise ValueError("imaginary-unit JSON must be 3 finite doubles")
        n = math.sqrt(arr[0] ** 2 + arr[1] ** 2 + arr[2] ** 2)
        if abs(n - 1.0) <= 1e-14:
            return cls(*arr)
        return cls.from_vector(arr)

    def as_quaternion(self):
        return Quaternion(0.0, self.x, self.y, self.z)

    @property
    def vector(self):
        return np.array([self.x, self.y, self.z])

    def perp(self):
        """A deterministic unit direction orthogonal to this one."""
        v = self.vector
        axis = int(np.argmin(np.abs(v)))
        e = np.zeros(3)
        e[axis] = 1.0
        w = e - v[axis] * v
        return ImaginaryUnit.from_vector(w)

    def cross(self, other):
        """Unit J*J' for orthogonal J'; completes a right-handed imaginary frame."""
        q = qmul(self.as_quaternion(), other.as_quaternion())
        return ImaginaryUnit.from_vector([q.x, q.y, q.z])

    def __eq__(self, other):
        if not isinstance(other, ImaginaryUnit):
            return NotImplemented
        return (self.x, self.y, self.z) == (other.x, other.y, other.z)

    def __hash__(self):
        return hash((self.x, self.y, self.z))

    def to_json(self):
        return [self.x, self.y, self.z]

    def __repr__(self):
        return f"ImaginaryUnit({self.x!r}, {self.y!r}, {self.z!r})"


DEFAULT_UNIT = ImaginaryUnit(1.0, 0.0, 0.0)

UNIT_I = ImaginaryUnit(1.0, 0.0, 0.0)
UNIT_J = ImaginaryUnit(0.0, 1.0, 0.0)
UNIT_K = ImaginaryUnit(0.0, 0.0, 1.0)


def decompose(s: Quaternion):
    """Split s = u + J*v with v = |Im(s)| >= 0.

    Real quaternions carry no direction; they get the fixed default unit,
    which is consistent because every evaluated stem has a vanishing odd
    part on the real axis.
    """
    s = _coerce(s)
    u = s.w
    m = max(abs(s.x), abs(s.y), abs(s.z))
    if m == 0.0:
        return u, 0.0, DEFAULT_UNIT
    # scale before normalizing so denormal components keep full direction accuracy
    xs, ys, zs = s.x / m, s.y / m, s.z / m
    nv = math.sqrt(xs * xs + ys * ys + zs * zs)
    return u, nv * m, ImaginaryUnit(xs / nv, ys / nv, zs / nv)


def compose(u, v, unit: ImaginaryUnit) -> Quaternion:
    """Inverse of :func:`decompose`: u + J*v."""
    return Quaternion(u, unit.x * v, unit.y * v, unit.z * v)


def arg(s: Quaternion) -> float:
    """Principal argument in [0, pi], measured inside the slice plane of s."""
    s = _coerce(s)
    u, v, _ = decompose(s)
    if u == 0.0 and v == 0.0:
        raise DomainError("argument of zero is undefined")
    return math.atan2(v, u)


class Sector:
    """Open sector of half-angle omega around the positive real axis."""

    __slots__ = ("omega",)

    def __init__(self, omega):
        omega = float(omega)
        if not 0.0 < omega < math.pi:
            raise ValueError("sector half-angle must lie in (0, pi)")
        object.__setattr__(self, "omega", omega)

    def __setattr__(self, name, value):
        raise AttributeError("Sector is immutable")

    def contains(self, s) -> bool:
        return in_sector(s, self)

    def __eq__(self, other):
        if not isinstance(other, Sector):
            return NotImplemented
        return self.omega == other.omega

    def __hash__(self):
        return hash(self.omega)

    def __repr__(self):
        return f"Sector({self.omega!r})"


def in_sector(s: Quaternion, sec: Sector) -> bool:
    """True iff |Arg(s)| < sec.omega; s = 0 is outside every sector."""
    s = _coerce(s)
    if s.norm_sq() == 0.0:
        raise DomainError("the sector excludes zero")
    return arg(s) < sec.omega


class Sphere:
    """Similarity orbit of a quaternion: fixed real part and imaginary modulus."""

    __slots__ = ("center", "radius")

    def __init__(self, center, radius):
        radius = float(radius)
        if radius < 0.0:
            raise ValueError("radius must be nonnegative")
        object.__setattr__(self, "center", float(center))
        object.__setattr__(self, "radius", radius)

    def __setattr__(self, name, value):
        raise AttributeError("Sphere is immutable")

    @classmethod
    def of(cls, s: Quaternion):
        u, v, _ = decompose(s)
        return cls(u, v)

    def contains(self, s: Quaternion, tol=1e-9) -> bool:
        u, v, _ = decompose(s)
        scale = max(1.0, abs(self.center), self.radius)
        return abs(u - self.center) <= tol * scale and abs(v - self.radius) <= tol * scale

    def isclose(self, other, tol=1e-9) -> bool:
        scale = max(1.0, abs(self.center), self.radius)
        return abs(self.center - other.center) <= tol * scale and abs(self.radius - other.radius) <= tol * scale

    def max_arg(self) -> float:
        """Largest |Arg| over the sphere (pi if it touches or crosses zero)."""
        if self.center == 0.0 and self.radius == 0.0:
            raise DomainError("sphere degenerate at zero")
        return math.atan2(self.radius, self.center)

    def to_json(self):
        return {"center": self.center, "radius": self.radius}

    def __eq__(self, other):
        if not isinstance(other, Sphere):
            return NotImplemented
        return (self.center, self.radius) == (other.center, other.radius)

    def __hash__(self):
        return hash((self.center, self.radius))

    def __repr__(self):
        return f"Sphere({self.center!r}, {self.radius!r})"


def ray_point(unit: ImaginaryUnit, radius, angle) -> Quaternion:
    """Quaternion radius * exp(J*angle) inside the slice plane of ``unit``."""
    return compose(radius * math.cos(angle), radius * math.sin(angle), unit)


def slice_frame(unit: ImaginaryUnit):
    """Right-handed orthonormal imaginary frame (J, P, JP) adapted to a slice."""
    p = unit.perp()
    return unit, p, unit.cross(p)


def to_slice_pair(s: Quaternion, frame):
    """Coordinates (z1, z2) of s with s = z1 + z2 * P, z1 and z2 in the slice of J."""
    j, p, jp = frame
    vec = np.array([s.x, s.y, s.z])
    z1 = complex(s.w, float(vec @ j.vector))
    z2 = complex(float(vec @ p.vector), float(vec @ jp.vector))
    return z1, z2


def from_slice_pair(z1, z2, frame) -> Quaternion:
    j, p, jp = frame
    vec = z1.imag * j.vector + z2.real * p.vector + z2.imag * jp.vector
    return Quaternion(z1.real, vec[0], vec[1], vec[2])
