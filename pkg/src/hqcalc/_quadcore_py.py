"""Pure-NumPy quadrature core: batched pencil inversions with compensated sums.

Node matrices are inverted in chunks through batched LAPACK calls; chunk
partials are reduced into the running sums with Kahan compensation so the
result is independent of chunk boundaries to within compensation accuracy
and fully deterministic for a fixed chunk size.
"""

from __future__ import annotations

import numpy as np

CHUNK = 256


def pencil_weighted_sums(t0, t2abs, nodes, coeffs):
    """Weighted sums of inverse pencils over quadrature nodes.

    sums[j] = sum_k coeffs[j, k] * inv(z_k^2 I - 2 z_k T0 + T2)

    Returns (sums, min_inv_cond) where min_inv_cond is a Frobenius proxy
    for the worst inverse conditioning seen across nodes (0.0 signals a
    numerically singular node).
    """
    t0 = np.asarray(t0, dtype=np.float64)
    t2abs = np.asarray(t2abs, dtype=np.float64)
    nodes = np.asarray(nodes, dtype=np.complex128)
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=np.complex128))
    n = t0.shape[0]
    m = coeffs.shape[0]
    eye = np.eye(n)

    sums = np.zeros((m, n, n), dtype=np.complex128)
    comp = np.zeros_like(sums)
    min_inv_cond = np.inf

    for start in range(0, nodes.shape[0], CHUNK):
        z = nodes[start : start + CHUNK]
        zc = z[:, None, None]
        a = (zc * zc) * eye - (2.0 * zc) * t0 + t2abs
        try:
            x = np.linalg.inv(a)
        except np.linalg.LinAlgError:
            return sums, 0.0
        fro_a = np.linalg.norm(a, axis=(1, 2))
        fro_x = np.linalg.norm(x, axis=(1, 2))
        with np.errstate(divide="ignore", over="ignore"):
            cond = 1.0 / (fro_a * fro_x)
        min_inv_cond = min(min_inv_cond, float(np.min(cond)))
        partial = np.einsum("jk,kab->jab", coeffs[:, start : start + z.shape[0]], x)
        # Kahan step on the chunk partial
        y = partial - comp
        t = sums + y
        comp = (t - sums) - y
        sums = t

    return sums, float(min_inv_cond)
