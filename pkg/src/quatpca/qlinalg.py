"""Gram-Schmidt orthogonalization and Hermitian eigenextraction.

Quaternion scalars multiply from the right in all projection updates so
that right-linear combinations stay right-linear.  Eigenpairs of a
Hermitian quaternion matrix are recovered from the symmetric
eigendecomposition of its real structure-preserving representation,
where every quaternion eigenvalue appears four times.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateDirection, InvalidParameter, ShapeError
from .quaternion import QMatrix, QVector

__all__ = [
    "mgs_orthonormalize",
    "hermitian_topk_eig",
    "DEGENERATE_TOL",
    "HERMITIAN_RTOL",
]

DEGENERATE_TOL = 1e-12
HERMITIAN_RTOL = 1e-10

# Residual mass below this marks a real eigenvector as a right-unit
# multiple of one already extracted.  Duplicates sit at round-off level,
# genuinely new directions carry O(1) mass.
_DUPLICATE_TOL = 1e-5


def mgs_orthonormalize(vnew, basis, degenerate_tol=DEGENERATE_TOL):
    """Orthonormalize ``vnew`` against an orthonormal ``basis``.

    Modified Gram-Schmidt with right-scalar updates v <- v - u (u^* v),
    run twice for numerical safety, then normalized to unit L2 norm.
    Raises DegenerateDirection when the residual norm falls below
    ``degenerate_tol``.
    """
    basis = list(basis)
    v = vnew
    for u in basis:
        if u.n != v.n:
            raise ShapeError(f"basis vector length {u.n} does not match {v.n}")
    for _ in range(2 if basis else 1):
        for u in basis:
            v = v - u.rmul(u.inner(v))
    r = v.norm()
    if r < degenerate_tol:
        raise DegenerateDirection(
            f"residual norm {r:.3e} below {degenerate_tol:.1e}; direction already spanned")
    return v / r


def _right_unit_images(y):
    """Real layouts of x*i, x*j, x*k for the vector with real layout y."""
    x = y.reshape(4, -1)
    xi = np.concatenate([-x[1], x[0], x[3], -x[2]])
    xj = np.concatenate([-x[2], -x[3], x[0], x[1]])
    xk = np.concatenate([-x[3], x[2], -x[1], x[0]])
    return xi, xj, xk


def _canonical_phase(v):
    """Fix the right unit-quaternion phase deterministically.

    Right-multiplies so that the first entry of significant modulus
    becomes real and nonnegative, then renormalizes.
    """
    mods = v.abs()
    t = int(np.argmax(mods > 1e-8 * mods.max()))
    q = v.entry(t).sign().conj()
    w = v.rmul(q)
    return w / w.norm()


def hermitian_topk_eig(G, k, hermitian_rtol=HERMITIAN_RTOL):
    """Top-k eigenpairs of a Hermitian quaternion matrix, descending.

    Works on the symmetric real representation: each quaternion
    eigenvalue appears there with multiplicity four, and the four real
    eigenvectors of a group are the images of one quaternion eigenvector
    under right multiplication by 1, i, j, k.  Walking the real spectrum
    downward, a candidate is kept only when it carries mass outside the
    right-unit span of the vectors already accepted, which yields one
    orthonormal quaternion eigenvector per group.  Phases follow the
    deterministic convention of :func:`_canonical_phase`.

    Returns a list of (eigenvalue, eigenvector) pairs.
    """
    m, n = G.shape
    if m != n:
        raise ShapeError(f"expected a square matrix, got {m}x{n}")
    if not 1 <= k <= n:
        raise InvalidParameter(f"k must satisfy 1 <= k <= {n}, got {k}")
    scale = G.fro_norm()
    if (G - G.H).fro_norm() > hermitian_rtol * scale:
        raise InvalidParameter("matrix is not Hermitian within tolerance")

    R = G.real_repr()
    R = (R + R.T) / 2.0
    evals, evecs = np.linalg.eigh(R)

    pairs = []
    span = np.zeros((4 * n, 0))
    for idx in range(4 * n - 1, -1, -1):
        y = evecs[:, idx]
        r = y - span @ (span.T @ y)
        r = r - span @ (span.T @ r)
        rn = np.linalg.norm(r)
        if rn < _DUPLICATE_TOL:
            continue
        r = r / rn
        pairs.append((float(evals[idx]), QVector.from_real(r)))
        span = np.column_stack([span, r, *_right_unit_images(r)])
        if len(pairs) == k:
            break
    if len(pairs) < k:
        raise InvalidParameter(
            f"could only extract {len(pairs)} of {k} eigenvectors")
    return [(lam, _canonical_phase(v)) for lam, v in pairs]
