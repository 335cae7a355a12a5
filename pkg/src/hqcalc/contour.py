"""Quadrature along sector boundaries inside one slice plane.

The path runs in along the upper ray t*exp(J*phi) and out along the lower
ray t*exp(-J*phi), keeping the sector on the left, exactly as the path
integral defines it: each node carries the weight gamma'(t)/J times its
Gauss-Legendre weight.  Truncation radii come from closed-form tail bounds
built out of the decay certificate and the sampled resolvent constants;
panel counts double until an embedded two-level error estimate passes.

Node order is fixed (conjugate pairs adjacent, panels in increasing t) and
accumulation is compensated per matrix entry, so results are deterministic
and, for real-coefficient integrands, exactly slice-symmetric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._kernels import pencil_weighted_sums
from .errors import KernelSingular, NonFinite, UnreachableTolerance
from .functions import DecayCertificate, StemFunction
from .operators import CommutingOperator, QMatrix, SectorBounds
from .quaternions import (
    ImaginaryUnit,
    Quaternion,
    compose,
    qmul,
    slice_frame,
    to_slice_pair,
)

DEFAULT_MAX_NODES = 2**20
NODES_PER_PANEL = 8
PANEL_LOG_WIDTH = 1.5

# standard prefactor magnitudes of the two calculi; tails are budgeted with these
RESOLVENT_PREFACTOR = 1.0 / (2.0 * math.pi)
PENCIL_PREFACTOR = 1.0 / math.pi

_KERNEL_POWER = {"resolvent": 1, "pencil": 2}

# node with Frobenius inverse-conditioning below this is treated as spectral
_SINGULAR_NODE_TOL = 1e-13


@lru_cache(maxsize=32)
def _gauss(npts):
    x, w = np.polynomial.legendre.leggauss(npts)
    return x, w


@dataclass
class ContourPlan:
    """Frozen description of one boundary discretization."""

    phi: float
    unit: ImaginaryUnit
    eps: float
    big_r: float
    panels: int
    npts: int
    tol: float
    max_nodes: int
    est_tail: dict
    cert: DecayCertificate
    consts: SectorBounds
    _frame: tuple = field(default=None, repr=False)

    @property
    def frame(self):
        if self._frame is None:
            object.__setattr__(self, "_frame", slice_frame(self.unit))
        return self._frame

    def node_count(self, panels=None):
        return 2 * (panels or self.panels) * self.npts

    def node_arrays(self, panels=None):
        """Complex nodes and weights, conjugate pairs adjacent, increasing t."""
        panels = panels or self.panels
        glx, glw = _gauss(self.npts)
        edges = np.linspace(math.log(self.eps), math.log(self.big_r), panels + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        halfs = 0.5 * (edges[1:] - edges[:-1])
        u = (mids[:, None] + halfs[:, None] * glx[None, :]).ravel()
        wu = (halfs[:, None] * glw[None, :]).ravel()
        t = np.exp(u)
        up = t * np.exp(1j * self.phi)
        w_up = 1j * np.exp(1j * self.phi) * (wu * t)
        z = np.empty(2 * t.size, dtype=np.complex128)
        w = np.empty_like(z)
        z[0::2], z[1::2] = up, np.conj(up)
        w[0::2], w[1::2] = w_up, np.conj(w_up)
        return z, w

    @property
    def nodes(self):
        """Initial-level nodes as quaternion (point, weight) pairs."""
        z, w = self.node_arrays()
        return [
            (compose(zi.real, zi.imag, self.unit), compose(wi.real, wi.imag, self.unit))
            for zi, wi in zip(z, w)
        ]

    def to_json(self):
        return {
            "phi": self.phi,
            "J": self.unit.to_json(),
            "eps": self.eps,
            "R": self.big_r,
            "panels": self.panels,
            "nodes": self.node_count(),
            "est_tail": dict(self.est_tail),
            "tol": self.tol,
        }


def _tail_radii(cert, consts, tol, kinds):
    """Truncation radii making each closed-form tail bound < tol/4 per kernel."""
    eps = math.inf
    big_r = 0.0
    for kind in kinds:
        nu = _KERNEL_POWER[kind]
        rho = PENCIL_PREFACTOR if kind == "pencil" else RESOLVENT_PREFACTOR
        c_kernel = consts.c_pencil if kind == "pencil" else consts.c_resolvent
        amp = 2.0 * rho * max(c_kernel, 1e-300) * max(cert.C_alpha, 1e-300)
        p_in = cert.zero_order - nu + 1.0
        p_out = cert.decay_order + nu - 1.0
        if p_in <= 0.0 or p_out <= 0.0:
            raise ValueError("certificate class does not admit the %s kernel" % kind)
        ln_eps = (math.log(tol / 4.0) + math.log(p_in) - math.log(amp)) / p_in
        ln_r = (math.log(amp) - math.log(tol / 4.0) - math.log(p_out)) / p_out
        eps = min(eps, math.exp(min(ln_eps, 700.0)))
        big_r = max(big_r, math.exp(min(ln_r, 700.0)))
    eps = min(eps, 0.5)
    big_r = max(big_r, 2.0, 10.0 * eps)
    return eps, big_r


def _tail_bounds(cert, consts, eps, big_r, kinds):
    out = {}
    for kind in kinds:
        nu = _KERNEL_POWER[kind]
        rho = PENCIL_PREFACTOR if kind == "pencil" else RESOLVENT_PREFACTOR
        c_kernel = consts.c_pencil if kind == "pencil" else consts.c_resolvent
        amp = 2.0 * rho * c_kernel * cert.C_alpha
        p_in = cert.zero_order - nu + 1.0
        p_out = cert.decay_order + nu - 1.0
        inner = amp * eps**p_in / p_in
        outer = amp * big_r ** (-p_out) / p_out
        out[kind] = inner + outer
    return out


def _model_panels(cert, consts, eps, big_r, tol, npts, max_nodes, kinds):
    """Panel count from doubling against the certificate's scalar model integrand."""
    lo, hi = math.log(eps), math.log(big_r)

    def model_integral(panels):
        glx, glw = _gauss(npts)
        edges = np.linspace(lo, hi, panels + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        halfs = 0.5 * (edges[1:] - edges[:-1])
        u = (mids[:, None] + halfs[:, None] * glx[None, :]).ravel()
        wu = (halfs[:, None] * glw[None, :]).ravel()
        t = np.exp(u)
        total = 0.0
        for kind in kinds:
            nu = _KERNEL_POWER[kind]
            rho = PENCIL_PREFACTOR if kind == "pencil" else RESOLVENT_PREFACTOR
            c_kernel = consts.c_pencil if kind == "pencil" else consts.c_resolvent
            vals = 2.0 * rho * c_kernel * cert.bound(t) * t ** (1 - nu) * t
            total += float(vals @ wu)
        return total

    panels = 1
    prev = model_integral(panels)
    while True:
        cur = model_integral(2 * panels)
        if abs(cur - prev) <= tol / 2.0:
            return panels
        if 2 * 2 * panels * npts > max_nodes:
            raise UnreachableTolerance(
                "model refinement exhausted the %d-node budget" % max_nodes
            )
        panels *= 2
        prev = cur


def plan_contour(
    cert: DecayCertificate,
    resolvent_consts,
    phi: float,
    unit: ImaginaryUnit,
    tol: float,
    max_nodes: int = DEFAULT_MAX_NODES,
    npts: int = NODES_PER_PANEL,
    kernels=("resolvent", "pencil"),
) -> ContourPlan:
    """Choose truncation radii and an initial panel ladder for the boundary rays.

    The plan is valid for every kernel listed in ``kernels``; radii take the
    strictest requirement so one plan can serve a fused evaluation.
    """
    if tol <= 0.0:
        raise ValueError("tolerance must be positive")
    if not cert.resolvent_admissible():
        raise ValueError("certificate class %r is not integrable here" % cert.class_tag)
    consts = SectorBounds(*resolvent_consts)
    kinds = tuple(k for k in kernels if k != "pencil" or cert.pencil_admissible())
    if "pencil" in kernels and "pencil" not in kinds:
        raise ValueError("certificate class %r does not admit the pencil kernel" % cert.class_tag)
    eps, big_r = _tail_radii(cert, consts, tol, kinds)
    panels = _model_panels(cert, consts, eps, big_r, tol, npts, max_nodes, kinds)
    tails = _tail_bounds(cert, consts, eps, big_r, kinds)
    return ContourPlan(
        phi=float(phi),
        unit=unit,
        eps=eps,
        big_r=big_r,
        panels=panels,
        npts=npts,
        tol=float(tol),
        max_nodes=int(max_nodes),
        est_tail=tails,
        cert=cert,
        consts=consts,
    )


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


class PencilInverseKernel:
    """Inverse pencil of an operator, the kernel of the harmonic-type calculus."""

    kind = "pencil"

    def __init__(self, T: CommutingOperator):
        self.T = T

    def at(self, s: Quaternion) -> QMatrix:
        from .operators import pencil_inverse

        return pencil_inverse(self.T, s)


class SResolventKernel:
    """Left or right resolvent kernel of an operator."""

    kind = "resolvent"

    def __init__(self, T: CommutingOperator, side="left"):
        if side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        self.T = T
        self.side = side

    def at(self, s: Quaternion) -> QMatrix:
        from .operators import s_resolvent

        return s_resolvent(self.T, s, self.side)


# ---------------------------------------------------------------------------
# fused level evaluation
# ---------------------------------------------------------------------------


def _stream_coeffs(f: StemFunction, z, w, frame, side, with_z):
    """Complex coefficient streams so that every summand is c_k * X_k.

    With the factor split g1 + g2*P in the plan frame, both assemblies
    reduce to the streams below; the perpendicular component is recovered
    by conjugating its accumulated sum on the right-sided path.
    """
    base = w * f.profile_at(z)
    g1, g2 = to_slice_pair(f.factor, frame)
    if side == "left":
        c1, c2 = g1 * base, g2 * base
    else:
        c1, c2 = g1 * base, np.conj(g2) * base
    streams = [c1, c2]
    if with_z:
        streams += [z * c1, z * c2]
    return np.vstack(streams)


class LevelSums:
    """Assembled raw sums of one refinement level."""

    __slots__ = ("b_q", "a_q", "min_cond", "nodes")

    def __init__(self, b_q, a_q, min_cond, nodes):
        self.b_q = b_q
        self.a_q = a_q
        self.min_cond = min_cond
        self.nodes = nodes


def _eval_level(plan: ContourPlan, T: CommutingOperator, f: StemFunction, side, with_z, panels):
    z, w = plan.node_arrays(panels)
    frame = plan.frame
    coeffs = _stream_coeffs(f, z, w, frame, side, with_z)
    sums, min_cond = pencil_weighted_sums(T.t0, T.t2abs, z, coeffs)
    if min_cond < _SINGULAR_NODE_TOL:
        raise KernelSingular("quadrature node hit the spectrum (inverse conditioning %.2e)" % min_cond)
    if not np.all(np.isfinite(sums)):
        raise NonFinite("non-finite quadrature sums")
    if side == "right":
        sums = sums.copy()
        sums[1::2] = np.conj(sums[1::2])
    b_q = QMatrix.from_frame_pair(sums[0], sums[1], frame)
    a_q = QMatrix.from_frame_pair(sums[2], sums[3], frame) if with_z else None
    return LevelSums(b_q, a_q, min_cond, z.size)


def run_adaptive(plan: ContourPlan, T: CommutingOperator, f: StemFunction, side, with_z, assemble):
    """Panel-doubling driver.

    ``assemble`` maps a LevelSums to a tuple of QMatrix outputs; refinement
    stops when the largest Frobenius gap between consecutive levels drops
    below tol/2.  Returns (outputs, est_error, node_count, levels).
    """
    panels = plan.panels
    prev = assemble(_eval_level(plan, T, f, side, with_z, panels))
    levels = 1
    while True:
        cur_level = _eval_level(plan, T, f, side, with_z, 2 * panels)
        cur = assemble(cur_level)
        est = max((c - p).fro() for c, p in zip(cur, prev))
        levels += 1
        if est <= plan.tol / 2.0:
            return cur, est, cur_level.nodes, levels
        if plan.node_count(4 * panels) > plan.max_nodes:
            raise UnreachableTolerance(
                "quadrature stuck at estimate %.3e with %d nodes" % (est, cur_level.nodes)
            )
        panels *= 2
        prev = cur


# ---------------------------------------------------------------------------
# public integration entry point
# ---------------------------------------------------------------------------


def contour_integrate(plan: ContourPlan, kernel, f: StemFunction, side="left", prefactor=1.0):
    """Quadrature of kernel * ds * f (left) or f * ds * kernel (right).

    Structured kernels ride the fused backend; any other callable
    s -> QMatrix is evaluated node by node with plain quaternion arithmetic.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if not f.intrinsic and f.side != side:
        raise ValueError("a %s-sided function cannot feed the %s assembly" % (f.side, side))

    if isinstance(kernel, PencilInverseKernel):

        def assemble(level):
            return (prefactor * level.b_q,)

        (value,), est, nodes, _ = run_adaptive(plan, kernel.T, f, side, False, assemble)
        return _result(value, est, nodes, plan)

    if isinstance(kernel, SResolventKernel):
        if kernel.side != side:
            raise ValueError("resolvent side must match the assembly side")
        tbar_q = kernel.T.conj().as_qmatrix()

        if side == "left":

            def assemble(level):
                return (prefactor * (level.a_q - tbar_q @ level.b_q),)

        else:

            def assemble(level):
                return (prefactor * (level.a_q - level.b_q @ tbar_q),)

        (value,), est, nodes, _ = run_adaptive(plan, kernel.T, f, side, True, assemble)
        return _result(value, est, nodes, plan)

    return _generic_integrate(plan, kernel, f, side, prefactor)


def _result(value, est, nodes, plan):
    from .calculus import CalculusResult

    tail = max(plan.est_tail.values())
    return CalculusResult(
        value=value,
        est_error=est + tail,
        diagnostics={
            "nodes": nodes,
            "est_quad_err": est,
            "est_tail": tail,
            "plan": plan.to_json(),
        },
    )


def _generic_integrate(plan, kernel_fn, f, side, prefactor):
    from .calculus import CalculusResult

    kernel_at = kernel_fn.at if hasattr(kernel_fn, "at") else kernel_fn

    def level_value(panels):
        z, w = plan.node_arrays(panels)
        acc = None
        comp = None
        for zk, wk in zip(z, w):
            s = compose(zk.real, zk.imag, plan.unit)
            wq = compose(wk.real, wk.imag, plan.unit)
            kq = kernel_at(s)
            fq = f.eval(s)
            term = kq.qscale_right(qmul(wq, fq)) if side == "left" else kq.qscale_left(qmul(fq, wq))
            if acc is None:
                acc = np.zeros_like(term.data)
                comp = np.zeros_like(term.data)
            y = term.data - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
        if acc is None:
            raise ValueError("plan has no nodes")
        if not np.all(np.isfinite(acc)):
            raise NonFinite("non-finite quadrature sums")
        return QMatrix(acc * prefactor)

    panels = plan.panels
    prev = level_value(panels)
    while True:
        cur = level_value(2 * panels)
        est = (cur - prev).fro()
        if est <= plan.tol / 2.0:
            tail = max(plan.est_tail.values())
            return CalculusResult(
                value=cur,
                est_error=est + tail,
                diagnostics={
                    "nodes": plan.node_count(2 * panels),
                    "est_quad_err": est,
                    "est_tail": tail,
                    "plan": plan.to_json(),
                },
            )
        if plan.node_count(4 * panels) > plan.max_nodes:
            raise UnreachableTolerance("generic quadrature exhausted the node budget")
        panels *= 2
        prev = cur
