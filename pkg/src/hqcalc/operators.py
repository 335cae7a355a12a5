"""Finite quaternionic operators with commuting components.

An operator is stored as four real n-by-n component matrices.  All pencil
work happens inside one complex slice plane: for s = u + J*v the pencil
s^2 - 2*T0*s + |T|^2 has entries in that plane because T0 and |T|^2 are
real, so a single complex factorization per point does the heavy lifting.
General quaternionic matrices are handled through the split M = Z1 + Z2*P
into two complex matrices adapted to a slice frame (J, P, J*P).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NonSymmetric, NotSectorial, SpectralPoint, Unsupported
from .quaternions import (
    DEFAULT_UNIT,
    ImaginaryUnit,
    Quaternion,
    Sector,
    Sphere,
    compose,
    decompose,
    from_slice_pair,
    slice_frame,
    to_slice_pair,
)

# Pencil is declared singular when its smallest singular value drops below
# this fraction of the largest one.
PENCIL_SINGULAR_TOL = 1e-12

_STD_FRAME = slice_frame(DEFAULT_UNIT)


class QMatrix:
    """Quaternionic matrix backed by a (4, n, m) array of real components."""

    __slots__ = ("data",)

    def __init__(self, data):
        data = np.asarray(data, dtype=np.float64)
        if data.ndim != 3 or data.shape[0] != 4:
            raise ValueError("expected component array of shape (4, n, m)")
        self.data = data

    # -- constructors ------------------------------------------------

    @classmethod
    def zeros(cls, n, m=None):
        m = n if m is None else m
        return cls(np.zeros((4, n, m)))

    @classmethod
    def identity(cls, n):
        data = np.zeros((4, n, n))
        data[0] = np.eye(n)
        return cls(data)

    @classmethod
    def from_real(cls, mat):
        mat = np.asarray(mat, dtype=np.float64)
        data = np.zeros((4,) + mat.shape)
        data[0] = mat
        return cls(data)

    @classmethod
    def from_diag(cls, entries):
        n = len(entries)
        data = np.zeros((4, n, n))
        for i, q in enumerate(entries):
            data[:, i, i] = q.components
        return cls(data)

    @classmethod
    def from_slice(cls, mat, unit: ImaginaryUnit = DEFAULT_UNIT):
        """Lift a complex matrix into the slice plane of ``unit``."""
        mat = np.asarray(mat, dtype=np.complex128)
        data = np.zeros((4,) + mat.shape)
        data[0] = mat.real
        data[1] = unit.x * mat.imag
        data[2] = unit.y * mat.imag
        data[3] = unit.z * mat.imag
        return cls(data)

    @classmethod
    def from_frame_pair(cls, z1, z2, frame):
        """Inverse of :meth:`frame_pair`."""
        j, p, jp = frame
        z1 = np.asarray(z1, dtype=np.complex128)
        z2 = np.asarray(z2, dtype=np.complex128)
        data = np.zeros((4,) + z1.shape)
        data[0] = z1.real
        for axis, (cj, cp, cjp) in enumerate(zip(j.vector, p.vector, jp.vector), start=1):
            data[axis] = cj * z1.imag + cp * z2.real + cjp * z2.imag
        return cls(data)

    # -- structure ---------------------------------------------------

    @property
    def shape(self):
        return self.data.shape[1:]

    @property
    def n(self):
        return self.data.shape[1]

    def frame_pair(self, frame):
        """Complex pair (Z1, Z2) with  M = Z1 + Z2*P  in the given slice frame."""
        j, p, jp = frame
        im = self.data[1:]
        z1 = self.data[0] + 1j * np.einsum("i,inm->nm", j.vector, im)
        z2 = np.einsum("i,inm->nm", p.vector, im) + 1j * np.einsum("i,inm->nm", jp.vector, im)
        return z1, z2

    def cd(self):
        return self.frame_pair(_STD_FRAME)

    def embed(self):
        """Complex 2n-by-2m representation; a *-homomorphism, so norms carry over."""
        z1, z2 = self.cd()
        top = np.hstack([z1, z2])
        bot = np.hstack([-z2.conj(), z1.conj()])
        return np.vstack([top, bot])

    def slice_values(self, unit: ImaginaryUnit, tol=None):
        """Complex matrix of a slice-valued QMatrix; checks the residual if tol given."""
        frame = slice_frame(unit)
        z1, z2 = self.frame_pair(frame)
        if tol is not None:
            leak = np.linalg.norm(z2)
            if leak > tol * max(1.0, np.linalg.norm(z1)):
                raise ValueError("matrix is not slice-valued: residual %.3e" % leak)
        return z1

    # -- arithmetic --------------------------------------------------

    def __add__(self, other):
        if isinstance(other, QMatrix):
            return QMatrix(self.data + other.data)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, QMatrix):
            return QMatrix(self.data - other.data)
        return NotImplemented

    def __neg__(self):
        return QMatrix(-self.data)

    def __mul__(self, scalar):
        if isinstance(scalar, (int, float)):
            return QMatrix(self.data * float(scalar))
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        if not isinstance(other, QMatrix):
            return NotImplemented
        a1, a2 = self.cd()
        b1, b2 = other.cd()
        c1 = a1 @ b1 - a2 @ b2.conj()
        c2 = a1 @ b2 + a2 @ b1.conj()
        return QMatrix.from_frame_pair(c1, c2, _STD_FRAME)

    def qscale_right(self, q: Quaternion):
        """M * q with a quaternion scalar on the right."""
        a1, a2 = self.cd()
        z1, z2 = to_slice_pair(q, _STD_FRAME)
        return QMatrix.from_frame_pair(a1 * z1 - a2 * np.conj(z2), a1 * z2 + a2 * np.conj(z1), _STD_FRAME)

    def qscale_left(self, q: Quaternion):
        """q * M with a quaternion scalar on the left."""
        a1, a2 = self.cd()
        z1, z2 = to_slice_pair(q, _STD_FRAME)
        return QMatrix.from_frame_pair(z1 * a1 - z2 * np.conj(a2), z1 * a2 + z2 * np.conj(a1), _STD_FRAME)

    @property
    def conj(self):
        data = self.data.copy()
        data[1:] = -data[1:]
        return QMatrix(data)

    # -- linear algebra ----------------------------------------------

    def solve(self, rhs):
        """X with self @ X = rhs, via the complex embedding."""
        if not isinstance(rhs, QMatrix):
            rhs = QMatrix.from_real(rhs)
        r1, r2 = rhs.cd()
        stacked = np.vstack([r1, -r2.conj()])
        sol = np.linalg.solve(self.embed(), stacked)
        n = self.n
        return QMatrix.from_frame_pair(sol[:n], -sol[n:].conj(), _STD_FRAME)

    def inv(self):
        return self.solve(np.eye(self.n))

    def norm2(self):
        return float(np.linalg.norm(self.embed(), 2))

    def fro(self):
        return float(np.linalg.norm(self.data))

    def smallest_sv(self):
        return float(np.linalg.svd(self.embed(), compute_uv=False)[-1])

    # -- conversions / io --------------------------------------------

    def entry(self, i, j) -> Quaternion:
        return Quaternion.from_components(self.data[:, i, j])

    def allclose(self, other, atol=1e-10, rtol=1e-10):
        return bool(np.allclose(self.data, other.data, atol=atol, rtol=rtol))

    def to_json(self):
        n, m = self.shape
        return [[[float(self.data[c, i, j]) for c in range(4)] for j in range(m)] for i in range(n)]

    @classmethod
    def from_json(cls, obj):
        arr = np.asarray(obj, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 4:
            raise ValueError("matrix JSON must be [n][m][4]")
        return cls(np.moveaxis(arr, 2, 0))

    def __repr__(self):
        return f"QMatrix(shape={self.shape})"


def rel_residual(a, b, floor=1.0):
    """Frobenius distance normalized by max(floor, |b|)."""
    if isinstance(a, QMatrix):
        num = (a - b).fro()
        den = max(floor, b.fro())
    else:
        num = float(np.linalg.norm(np.asarray(a) - np.asarray(b)))
        den = max(floor, float(np.linalg.norm(np.asarray(b))))
    return num / den


class CommutingOperator:
    """T = T0 + e1*T1 + e2*T2 + e3*T3 with pairwise commuting real components."""

    COMMUTE_TOL = 1e-10

    __slots__ = ("comps", "eigenvalues", "_t2abs", "_bounds_cache", "_kind", "_meta")

    def __init__(self, comps, eigenvalues=None, _validate=True, _kind="raw", _meta=None):
        comps = np.asarray(comps, dtype=np.float64)
        if comps.ndim != 3 or comps.shape[0] != 4 or comps.shape[1] != comps.shape[2]:
            raise ValueError("expected component array of shape (4, n, n)")
        if _validate:
            self._check_commuting(comps)
        self.comps = comps
        self.eigenvalues = tuple(eigenvalues) if eigenvalues is not None else None
        self._t2abs = None
        self._bounds_cache = {}
        self._kind = _kind
        self._meta = _meta

    @staticmethod
    def _check_commuting(comps):
        for i in range(4):
            for j in range(i + 1, 4):
                a, b = comps[i], comps[j]
                resid = np.linalg.norm(a @ b - b @ a)
                scale = np.linalg.norm(a) * np.linalg.norm(b)
                if resid > CommutingOperator.COMMUTE_TOL * max(scale, 1e-30):
                    raise ValueError(
                        "components %d and %d do not commute (residual %.3e)" % (i, j, resid)
                    )

    # -- builders -----------------------------------------------------

    @classmethod
    def diagonal(cls, entries):
        entries = [e if isinstance(e, Quaternion) else Quaternion(e) for e in entries]
        if not entries:
            raise ValueError("need at least one diagonal entry")
        n = len(entries)
        comps = np.zeros((4, n, n))
        for i, q in enumerate(entries):
            comps[:, i, i] = q.components
        return cls(comps, eigenvalues=entries, _validate=False, _kind="diagonal")

    @classmethod
    def poly_family(cls, mat, coeff_lists):
        """Components p_i(M) of a symmetric matrix M; commuting by construction."""
        mat = np.asarray(mat, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise NonSymmetric("M must be square")
        if np.linalg.norm(mat - mat.T) > 1e-12 * max(1.0, np.linalg.norm(mat)):
            raise NonSymmetric("M must be symmetric")
        if len(coeff_lists) != 4:
            raise ValueError("need four coefficient lists")
        n = mat.shape[0]
        comps = np.stack([_matrix_poly(c, mat, n) for c in coeff_lists])
        lam = np.linalg.eigvalsh(mat)
        eigen = [
            Quaternion(*(float(np.polynomial.polynomial.polyval(v, c)) for c in coeff_lists))
            for v in lam
        ]
        meta = {"M": mat.tolist(), "p": [list(map(float, c)) for c in coeff_lists]}
        return cls(comps, eigenvalues=eigen, _validate=False, _kind="poly_family", _meta=meta)

    def conj(self):
        """Conjugate operator; shares the pencil data bit-for-bit."""
        comps = self.comps.copy()
        comps[1:] = -comps[1:]
        out = CommutingOperator(
            comps, eigenvalues=None, _validate=False, _kind=self._kind, _meta=self._meta
        )
        if self.eigenvalues is not None:
            out.eigenvalues = tuple(q.conj for q in self.eigenvalues)
        out._t2abs = self.t2abs
        return out

    # -- pencil -------------------------------------------------------

    @property
    def n(self):
        return self.comps.shape[1]

    @property
    def t0(self):
        return self.comps[0]

    @property
    def t2abs(self):
        """|T|^2 = T0^2 + T1^2 + T2^2 + T3^2 as a real matrix."""
        if self._t2abs is None:
            c = self.comps
            self._t2abs = c[0] @ c[0] + c[1] @ c[1] + c[2] @ c[2] + c[3] @ c[3]
        return self._t2abs

    def as_qmatrix(self):
        return QMatrix(self.comps.copy())

    def pencil(self, z):
        """Complex pencil z^2*I - 2*T0*z + |T|^2 within the slice of z."""
        z = complex(z)
        n = self.n
        return (z * z) * np.eye(n) - (2.0 * z) * self.t0 + self.t2abs

    # -- io -----------------------------------------------------------

    def to_json(self):
        if self._kind == "diagonal":
            return {"kind": "diagonal", "entries": [q.to_json() for q in self.eigenvalues]}
        if self._kind == "poly_family":
            return {"kind": "poly_family", **self._meta}
        raise Unsupported("raw operators have no canonical JSON form")

    @classmethod
    def from_json(cls, obj):
        kind = obj.get("kind")
        if kind == "diagonal":
            entries = [Quaternion.from_json(e) for e in obj["entries"]]
            return cls.diagonal(entries)
        if kind == "poly_family":
            return cls.poly_family(np.asarray(obj["M"], dtype=float), obj["p"])
        raise ValueError("unknown operator kind %r" % kind)

    def __repr__(self):
        return f"CommutingOperator(kind={self._kind!r}, n={self.n})"


def _matrix_poly(coeffs, mat, n):
    coeffs = [float(c) for c in coeffs] or [0.0]
    out = coeffs[-1] * np.eye(n)
    for c in reversed(coeffs[:-1]):
        out = out @ mat + c * np.eye(n)
    return out


def build_diagonal(entries):
    return CommutingOperator.diagonal(entries)


def build_poly_family(mat, p0, p1, p2, p3):
    return CommutingOperator.poly_family(mat, [p0, p1, p2, p3])


# ---------------------------------------------------------------------------
# pencil solves and resolvents
# ---------------------------------------------------------------------------


def pencil_values(T: CommutingOperator, s: Quaternion):
    """Slice data (z, frame, pencil matrix) for a quaternion point."""
    u, v, unit = decompose(s)
    z = complex(u, v)
    return z, slice_frame(unit), T.pencil(z)


def _checked_inverse(a, where):
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[-1] < PENCIL_SINGULAR_TOL * max(sv[0], 1e-300):
        raise SpectralPoint("pencil numerically singular at %s (sv ratio %.3e)" % (where, sv[-1] / max(sv[0], 1e-300)))
    return np.linalg.inv(a)


def _coerce_rhs(T: CommutingOperator, rhs) -> QMatrix:
    if isinstance(rhs, QMatrix):
        return rhs
    if isinstance(rhs, Quaternion):
        return QMatrix.from_diag([rhs] * T.n)
    if isinstance(rhs, (int, float)):
        return QMatrix.from_real(float(rhs) * np.eye(T.n))
    return QMatrix.from_real(np.asarray(rhs, dtype=np.float64))


def pencil_solve(T: CommutingOperator, s: Quaternion, rhs) -> QMatrix:
    """Inverse pencil applied to a quaternionic right-hand side.

    The system is solved twice in the complex slice of s, once per
    component of the split rhs = Z1 + Z2*P.
    """
    rhs = _coerce_rhs(T, rhs)
    z, frame, a = pencil_values(T, s)
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[-1] < PENCIL_SINGULAR_TOL * max(sv[0], 1e-300):
        raise SpectralPoint("pencil numerically singular at s=%r" % (s,))
    r1, r2 = rhs.frame_pair(frame)
    x1 = np.linalg.solve(a, r1)
    x2 = np.linalg.solve(a, r2)
    return QMatrix.from_frame_pair(x1, x2, frame)


def pencil_inverse(T: CommutingOperator, s: Quaternion) -> QMatrix:
    """Inverse pencil as a slice-valued quaternionic matrix."""
    z, frame, a = pencil_values(T, s)
    x = _checked_inverse(a, repr(s))
    return QMatrix.from_frame_pair(x, np.zeros_like(x), frame)


def s_resolvent(T: CommutingOperator, s: Quaternion, side="left") -> QMatrix:
    """Resolvent kernel (s*I - conj(T)) against the inverse pencil.

    The left form multiplies the pencil inverse from the left, the right
    form from the right; on full space the two agree for commuting
    components.
    """
    z, frame, a = pencil_values(T, s)
    x = _checked_inverse(a, repr(s))
    xq = QMatrix.from_frame_pair(x, np.zeros_like(x), frame)
    sx = QMatrix.from_frame_pair(z * x, np.zeros_like(x), frame)
    tbar = T.conj().as_qmatrix()
    if side == "left":
        return sx - (tbar @ xq)
    if side == "right":
        return sx - (xq @ tbar)
    raise ValueError("side must be 'left' or 'right'")


def scalar_pencil(s: Quaternion, q: Quaternion) -> Quaternion:
    """Scalar pencil s^2 - 2*Re(q)*s + |q|^2 (lives in the slice of s)."""
    return s * s - (2.0 * q.re) * s + Quaternion(q.norm_sq())


def left_kernel(s: Quaternion, q: Quaternion) -> Quaternion:
    """Scalar Cauchy kernel (s - conj(q)) * pencil(s, q)^{-1}."""
    from .quaternions import qinv, qmul

    return qmul(s - q.conj, qinv(scalar_pencil(s, q)))


def right_kernel(s: Quaternion, q: Quaternion) -> Quaternion:
    """Scalar Cauchy kernel pencil(s, q)^{-1} * (s - conj(q))."""
    from .quaternions import qinv, qmul

    return qmul(qinv(scalar_pencil(s, q)), s - q.conj)


# ---------------------------------------------------------------------------
# spectrum and sector bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumReport:
    spheres: tuple
    rho_margin: float | None = None

    def max_arg(self) -> float:
        return max(s.max_arg() for s in self.spheres)

    def min_modulus(self) -> float:
        return min(math.hypot(s.center, s.radius) for s in self.spheres)

    def to_json(self):
        out = {"spheres": [s.to_json() for s in self.spheres]}
        if self.rho_margin is not None:
            out["rho_margin"] = self.rho_margin
        return out


def s_spectrum(T: CommutingOperator, sector: Sector | None = None) -> SpectrumReport:
    """Spectral spheres of an eigen-resolvable operator."""
    if T.eigenvalues is None:
        raise Unsupported("operator carries no eigen-resolvable construction")
    spheres = []
    for q in T.eigenvalues:
        sph = Sphere.of(q)
        if not any(sph.isclose(other, tol=1e-10) for other in spheres):
            spheres.append(sph)
    spheres.sort(key=lambda s: (s.center, s.radius))
    margin = None
    if sector is not None:
        margin = min(_sphere_ray_distance(s, sector.omega) for s in spheres)
    return SpectrumReport(spheres=tuple(spheres), rho_margin=margin)


def _sphere_ray_distance(sphere: Sphere, theta: float) -> float:
    """Distance from the half-plane trace (u, +/-v) of a sphere to the rays at angle +/-theta."""
    w = complex(sphere.center, sphere.radius)

    def dist(point, ang):
        rot = point * np.exp(-1j * ang)
        return abs(rot.imag) if rot.real > 0.0 else abs(point)

    return min(dist(w, theta), dist(w, -theta))


class SectorBounds(NamedTuple):
    c_resolvent: float
    c_pencil: float


def sector_certificate(T: CommutingOperator, theta, radii=None) -> SectorBounds:
    """Sampled constants for |s|*|resolvent| and |s|^2*|pencil inverse|.

    Suprema are taken over log-spaced points of the two boundary rays of the
    complement sector and inflated by a factor of two.
    """
    theta = theta.omega if isinstance(theta, Sector) else float(theta)
    key = round(theta, 12)
    if key in T._bounds_cache:
        return T._bounds_cache[key]
    report = s_spectrum(T)
    if report.max_arg() >= theta - 1e-12:
        raise NotSectorial(
            "spectrum reaches angle %.6f >= %.6f" % (report.max_arg(), theta)
        )
    if radii is None:
        radii = np.geomspace(1e-4, 1e4, 49)
    frame = _STD_FRAME
    c_res = 0.0
    c_pen = 0.0
    tbar = T.conj().as_qmatrix()
    for r in radii:
        for sign in (1.0, -1.0):
            z = r * np.exp(1j * sign * theta)
            a = T.pencil(z)
            sv = np.linalg.svd(a, compute_uv=False)
            if sv[-1] <= 0.0:
                raise NotSectorial("pencil singular on the boundary ray at |s|=%.3e" % r)
            c_pen = max(c_pen, r * r / sv[-1])
            x = np.linalg.inv(a)
            xq = QMatrix.from_frame_pair(x, np.zeros_like(x), frame)
            sx = QMatrix.from_frame_pair(z * x, np.zeros_like(x), frame)
            left = sx - (tbar @ xq)
            right = sx - (xq @ tbar)
            c_res = max(c_res, r * left.norm2(), r * right.norm2())
    out = SectorBounds(2.0 * c_res, 2.0 * c_pen)
    T._bounds_cache[key] = out
    return out


def pencil_norm_profile(T: CommutingOperator, theta, radii):
    """Rows (|s|, |Q^{-1}|, |s|^2 |Q^{-1}|) along the rays at angle +/-theta."""
    theta = theta.omega if isinstance(theta, Sector) else float(theta)
    rows = []
    for r in radii:
        worst = 0.0
        for sign in (1.0, -1.0):
            z = r * np.exp(1j * sign * theta)
            sv = np.linalg.svd(T.pencil(z), compute_uv=False)
            worst = max(worst, 1.0 / sv[-1])
        rows.append((float(r), worst, float(r * r * worst)))
    return rows
