"""Projection-basis fitting by Lp-sphere ascent with deflation.

Each projection direction maximizes f(w) = sum_i ||F_i w||_s^s over the
unit Lp sphere through a minorize-maximize iteration: linearize f at the
current iterate, then apply the closed-form maximizer of the linear form
over the sphere (four regimes: 0 < p < 1, p = 1, 1 < p < inf, p = inf).
Accepted directions are orthonormalized and the samples are deflated so
that later directions explore the remaining subspace only.  Left
directions solve the mirrored problem max sum_i ||u^* F_i||_s^s, which is
the same computation on conjugate-transposed samples.

The s = p = 2 case reduces to eigendecomposition of the sample
covariance; :func:`covariance_baseline` computes that directly and serves
as a reference implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DegenerateDirection,
    InvalidDataset,
    InvalidParameter,
    ShapeError,
)
from .qlinalg import hermitian_topk_eig, mgs_orthonormalize
from .quaternion import QMatrix, QVector, hamilton_planes, lp_norm, real_scale

__all__ = [
    "FitParams",
    "DirectionTrace",
    "FitReport",
    "BasisPair",
    "objective",
    "lp_update",
    "mm_update",
    "solve_direction",
    "fit",
    "covariance_baseline",
    "deflated_residuals",
    "DEFAULT_TOL",
    "DEFAULT_MAX_ITER",
]

DEFAULT_TOL = 1e-4
DEFAULT_MAX_ITER = 500

# Guards the relative-change denominator when the objective is zero.
_F_GUARD = 1e-300


@dataclass(frozen=True)
class FitParams:
    """Hyperparameters of one fit.

    ``s`` is the deviation exponent (s >= 1, finite); ``p`` the sphere
    exponent (p > 0 or math.inf); ``k1``/``k2`` the number of left/right
    directions.  ``init`` selects the starting iterate: "ones" is the
    deterministic all-ones pure-real vector, "random" draws from a
    PRNG seeded with ``seed``.  ``lowp_factor`` picks the reweighting
    vector of the 0 < p < 1 regime: "init" uses the moduli of the
    starting iterate, "iterate" uses the current one.
    """

    s: float
    p: float
    k1: int
    k2: int
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    init: str = "ones"
    seed: int = 0
    lowp_factor: str = "init"

    def violations(self, m=None, n=None):
        """Collect conflicts with the legal ranges; empty when valid."""
        problems = []
        if not (isinstance(self.s, (int, float)) and self.s >= 1 and math.isfinite(self.s)):
            problems.append(f"s must satisfy 1 <= s < inf, got {self.s}")
        if not (isinstance(self.p, (int, float)) and (self.p == math.inf or self.p > 0)):
            problems.append(f"p must satisfy p > 0 or p = +inf, got {self.p}")
        if not (isinstance(self.k1, int) and self.k1 >= 1):
            problems.append(f"k1 must be a positive integer, got {self.k1}")
        if not (isinstance(self.k2, int) and self.k2 >= 1):
            problems.append(f"k2 must be a positive integer, got {self.k2}")
        if m is not None and isinstance(self.k1, int) and self.k1 > m:
            problems.append(f"k1 must not exceed the image row count ({self.k1} > {m})")
        if n is not None and isinstance(self.k2, int) and self.k2 > n:
            problems.append(f"k2 must not exceed the image column count ({self.k2} > {n})")
        if not self.tol > 0:
            problems.append(f"tol must be positive, got {self.tol}")
        if not (isinstance(self.max_iter, int) and self.max_iter >= 1):
            problems.append(f"max_iter must be a positive integer, got {self.max_iter}")
        if self.init not in ("ones", "random"):
            problems.append(f"init must be 'ones' or 'random', got {self.init!r}")
        if self.lowp_factor not in ("init", "iterate"):
            problems.append(f"lowp_factor must be 'init' or 'iterate', got {self.lowp_factor!r}")
        return problems

    def validate(self, m=None, n=None):
        problems = self.violations(m, n)
        if problems:
            raise InvalidParameter("; ".join(problems))


@dataclass
class DirectionTrace:
    """Per-direction diagnostics of the ascent iteration."""

    side: str
    index: int
    objective_history: list[float]
    pnorm_history: list[float]
    iterations: int
    converged: bool
    final_objective: float


@dataclass
class FitReport:
    right: list[DirectionTrace] = field(default_factory=list)
    left: list[DirectionTrace] = field(default_factory=list)

    def all_traces(self):
        return list(self.right) + list(self.left)


@dataclass
class BasisPair:
    """Fitted projection bases with their objective values and mean.

    U has orthonormal columns u_1..u_k1 (length m), V has orthonormal
    columns v_1..v_k2 (length n).  d_left[t] and d_right[t] hold the
    post-orthogonalization objective of direction t, which equals that
    direction's marginal contribution on the undeflated samples because
    deflation removes previously spanned components only.
    """

    U: QMatrix
    V: QMatrix
    d_left: np.ndarray
    d_right: np.ndarray
    params: FitParams
    mean: QMatrix
    report: FitReport | None = None

    def __post_init__(self):
        self.d_left = np.asarray(self.d_left, dtype=np.float64)
        self.d_right = np.asarray(self.d_right, dtype=np.float64)
        if self.d_left.shape != (self.U.n,):
            raise ShapeError(f"d_left length {self.d_left.shape} does not match U columns {self.U.n}")
        if self.d_right.shape != (self.V.n,):
            raise ShapeError(f"d_right length {self.d_right.shape} does not match V columns {self.V.n}")
        if self.mean.shape != (self.U.m, self.V.m):
            raise ShapeError(
                f"mean shape {self.mean.shape} does not match bases {self.U.m}x{self.V.m}")

    @property
    def m(self):
        return self.U.m

    @property
    def n(self):
        return self.V.m

    @property
    def k1(self):
        return self.U.n

    @property
    def k2(self):
        return self.V.n

    def truncated(self, k1, k2):
        """Restrict to the leading directions; prefixes are nested by construction."""
        if not (1 <= k1 <= self.k1 and 1 <= k2 <= self.k2):
            raise InvalidParameter(
                f"truncation ({k1}, {k2}) exceeds fitted sizes ({self.k1}, {self.k2})")
        return BasisPair(
            U=self.U.take_cols(k1),
            V=self.V.take_cols(k2),
            d_left=self.d_left[:k1].copy(),
            d_right=self.d_right[:k2].copy(),
            params=replace(self.params, k1=k1, k2=k2),
            mean=self.mean,
        )


# -- stacked-plane helpers --------------------------------------------


def _as_matrices(samples):
    """Accept a SampleSet-like object or any iterable of QMatrix."""
    if hasattr(samples, "images"):
        mats = list(samples.images())
    else:
        mats = list(samples)
    for f in mats:
        if not isinstance(f, QMatrix):
            raise TypeError(f"expected QMatrix samples, got {type(f).__name__}")
    if not mats:
        raise InvalidDataset("need at least one sample")
    shape = mats[0].shape
    for f in mats:
        if f.shape != shape:
            raise ShapeError(f"samples have mixed shapes: {shape} vs {f.shape}")
    return mats


def _stack(mats):
    """Samples as one (l, 4, m, n) array."""
    return np.stack([f.data for f in mats])


def _conj_transpose_stack(S):
    q = S.transpose(0, 1, 3, 2)
    return np.stack([q[:, 0], -q[:, 1], -q[:, 2], -q[:, 3]], axis=1)


def _batch_matvec(S, w):
    """F_i w for every sample; returns (l, 4, m)."""
    a = (S[:, 0], S[:, 1], S[:, 2], S[:, 3])
    b = tuple(w[c] for c in range(4))
    planes = hamilton_planes(a, b, lambda A, x: A @ x)
    return np.stack(planes, axis=1)


def _batch_conj_matvec_sum(S, g):
    """sum_i F_i^* g_i; returns (4, n)."""
    a = (S[:, 0], -S[:, 1], -S[:, 2], -S[:, 3])
    b = (g[:, 0], g[:, 1], g[:, 2], g[:, 3])

    def mul(A, y):
        return np.einsum("lmn,lm->n", A, y)

    return np.stack(hamilton_planes(a, b, mul))


def _batch_matmul(S, W):
    """F_i W for every sample; returns (l, 4, m, k)."""
    a = (S[:, 0], S[:, 1], S[:, 2], S[:, 3])
    planes = hamilton_planes(a, W.planes, np.matmul)
    return np.stack(planes, axis=1)


def _batch_matmul_conj(H, W):
    """H_i W^* for every sample; H is (l, 4, m, k), returns (l, 4, m, n)."""
    a = (H[:, 0], H[:, 1], H[:, 2], H[:, 3])
    w0, w1, w2, w3 = W.planes
    b = (w0.T, -w1.T, -w2.T, -w3.T)
    planes = hamilton_planes(a, b, np.matmul)
    return np.stack(planes, axis=1)


def _deflate(S, W):
    """Right-deflation F_i <- F_i (I - W W^*) for the whole stack."""
    H = _batch_matmul(S, W)
    return S - _batch_matmul_conj(H, W)


def _moduli(X):
    """Entrywise quaternion moduli of a (..., 4, m) plane stack."""
    return np.sqrt(np.sum(X * X, axis=-2))


def _stack_objective(S, w, s):
    A = _moduli(_batch_matvec(S, w))
    return float(np.sum(A ** s))


def _ascent_direction(S, w, s):
    """y = sum_i F_i^* (|F_i w|^(s-1) (.) sign(F_i w)) as a (4, n) array."""
    P = _batch_matvec(S, w)
    A = _moduli(P)
    with np.errstate(divide="ignore", invalid="ignore"):
        fac = np.where(A > 0.0, A ** (s - 2.0), 0.0)
    g = P * fac[:, None, :]
    return _batch_conj_matvec_sum(S, g)


# -- public operations ------------------------------------------------


def objective(samples, w, side="right", s=2.0):
    """f(w) = sum_i ||F_i w||_s^s (right) or sum_i ||w^* F_i||_s^s (left)."""
    if side not in ("right", "left"):
        raise InvalidParameter(f"side must be 'right' or 'left', got {side!r}")
    if not (s >= 1 and math.isfinite(s)):
        raise InvalidParameter(f"s must satisfy 1 <= s < inf, got {s}")
    S = _stack(_as_matrices(samples))
    if side == "left":
        S = _conj_transpose_stack(S)
    if w.n != S.shape[3]:
        raise ShapeError(f"vector length {w.n} does not match sample width {S.shape[3]}")
    return _stack_objective(S, w.data, s)


def lp_update(y, p, current=None, initial=None):
    """Closed-form sphere step for the linearized objective.

    Given the ascent vector y, returns the next iterate on the unit Lp
    sphere:

    * 0 < p < 1:  y <- |initial| (.) |current|^(1-p) (.) y, then Lp-normalize;
    * p = 1:      all mass on the entry of largest |y_t| (smallest index
                  on ties), with that entry's sign;
    * 1 < p < inf: y <- |y|^(q-1) (.) sign(y) with q = p/(p-1), then
                  Lp-normalize;
    * p = inf:    entrywise sign of y.

    Raises DegenerateDirection when y (or the reweighted vector) is zero.
    """
    mods = y.abs()
    top = float(np.max(mods, initial=0.0))
    if top <= 0.0:
        raise DegenerateDirection("ascent vector is zero")
    if p == math.inf:
        return y.sign()
    if not p > 0:
        raise InvalidParameter(f"p must satisfy p > 0 or p = +inf, got {p}")

    # The final normalization cancels any positive rescaling of y, so
    # divide by the top modulus first to keep the power maps in range.
    ys = y / top
    if p < 1:
        if current is None or initial is None:
            raise InvalidParameter("the 0 < p < 1 update needs current and initial iterates")
        z = real_scale(initial.abs() * current.abs() ** (1.0 - p), ys)
    elif p == 1:
        j = int(np.argmax(mods))
        out = np.zeros((4, y.n))
        out[:, j] = y.entry(j).sign().components
        return QVector(out)
    else:
        q = p / (p - 1.0)
        az = ys.abs()
        with np.errstate(divide="ignore", invalid="ignore"):
            fac = np.where(az > 0.0, az ** (q - 2.0), 0.0)
        z = QVector(ys.data * fac[None, :])
    nz = lp_norm(z, p)
    if nz <= 0.0:
        raise DegenerateDirection("reweighted ascent vector is zero")
    return z / nz


def mm_update(w, samples, s, p, w0=None):
    """One ascent step from iterate w; ``w0`` is the starting iterate."""
    if not (s >= 1 and math.isfinite(s)):
        raise InvalidParameter(f"s must satisfy 1 <= s < inf, got {s}")
    S = _stack(_as_matrices(samples))
    if w.n != S.shape[3]:
        raise ShapeError(f"vector length {w.n} does not match sample width {S.shape[3]}")
    y = QVector(_ascent_direction(S, w.data, s))
    return lp_update(y, p, current=w, initial=w0 if w0 is not None else w)


def _initial_iterate(n, params, rng):
    if params.init == "ones":
        data = np.zeros((4, n))
        data[0] = 1.0
    elif params.init == "random":
        data = rng.standard_normal((4, n))
    else:
        raise InvalidParameter(f"init must be 'ones' or 'random', got {params.init!r}")
    w = QVector(data)
    return w / lp_norm(w, params.p)


def _solve_stack(S, params, orthogonal_to, side, index, rng):
    """Run the ascent loop on a prepared stack; returns (v, f, trace)."""
    n = S.shape[3]
    w = _initial_iterate(n, params, rng)
    w0 = w
    f = _stack_objective(S, w.data, params.s)
    f_hist = [f]
    pnorm_hist = [lp_norm(w, params.p)]
    converged = False
    iterations = 0
    for _ in range(params.max_iter):
        y = QVector(_ascent_direction(S, w.data, params.s))
        ref = w0 if params.lowp_factor == "init" else w
        w = lp_update(y, params.p, current=w, initial=ref)
        f_new = _stack_objective(S, w.data, params.s)
        delta = abs(f_new - f) / (abs(f) + _F_GUARD)
        f = f_new
        f_hist.append(f)
        pnorm_hist.append(lp_norm(w, params.p))
        iterations += 1
        if delta <= params.tol:
            converged = True
            break
    v = mgs_orthonormalize(w, orthogonal_to)
    f_dir = _stack_objective(S, v.data, params.s)
    trace = DirectionTrace(
        side=side,
        index=index,
        objective_history=f_hist,
        pnorm_history=pnorm_hist,
        iterations=iterations,
        converged=converged,
        final_objective=f_dir,
    )
    return v, f_dir, trace


def solve_direction(samples, params, orthogonal_to=()):
    """One right-projection direction for the given samples.

    Returns (v, f): the unit direction orthonormalized against
    ``orthogonal_to`` and its objective sum_i ||F_i v||_s^s on the
    samples as given.  Callers handle deflation and the left side by
    transforming the samples.
    """
    params.validate()
    S = _stack(_as_matrices(samples))
    rng = np.random.default_rng(params.seed)
    v, f, _ = _solve_stack(S, params, tuple(orthogonal_to), "right", 0, rng)
    return v, f


def _fit_side(S, count, params, side, rng):
    vectors = []
    values = []
    traces = []
    current = S.copy()
    for t in range(count):
        try:
            v, f, trace = _solve_stack(current, params, vectors, side, t, rng)
        except DegenerateDirection as exc:
            raise DegenerateDirection(
                f"{side} direction {t}: {exc}", index=t) from exc
        trace.index = t
        vectors.append(v)
        values.append(f)
        traces.append(trace)
        current = _deflate(current, QMatrix.from_columns(vectors))
    return QMatrix.from_columns(vectors), np.array(values), traces


def fit(samples, params):
    """Fit both projection bases on a centered sample set.

    Right directions come first, then left directions on the
    conjugate-transposed samples; the two passes are independent.
    Returns a :class:`BasisPair` carrying the training mean and a
    per-direction :class:`FitReport`.
    """
    if not getattr(samples, "centered", False):
        raise InvalidDataset("fit requires a centered sample set; call center() first")
    mats = _as_matrices(samples)
    m, n = mats[0].shape
    params.validate(m, n)
    S = _stack(mats)
    rng = np.random.default_rng(params.seed)

    V, d_right, right_traces = _fit_side(S, params.k2, params, "right", rng)
    U, d_left, left_traces = _fit_side(
        _conj_transpose_stack(S), params.k1, params, "left", rng)

    mean = getattr(samples, "mean", None)
    if mean is None:
        mean = QMatrix.zeros(m, n)
    report = FitReport(right=right_traces, left=left_traces)
    return BasisPair(U=U, V=V, d_left=d_left, d_right=d_right,
                     params=params, mean=mean, report=report)


def covariance_baseline(samples, k):
    """Top-k right eigenbasis of G = (1/l) sum_i F_i^* F_i.

    The samples are expected to be centered already.  Returns
    (eigenvalues, W) with eigenvalues descending and W the n x k matrix
    of orthonormal eigenvectors.  At s = p = 2 the ascent fit converges
    to the same subspaces, which makes this a direct cross-check.
    """
    mats = _as_matrices(samples)
    n = mats[0].n
    if not 1 <= k <= n:
        raise InvalidParameter(f"k must satisfy 1 <= k <= {n}, got {k}")
    S = _stack(mats)
    a = (S[:, 0], -S[:, 1], -S[:, 2], -S[:, 3])
    b = (S[:, 0], S[:, 1], S[:, 2], S[:, 3])

    def mul(A, B):
        return np.einsum("lmn,lmo->no", A, B)

    G = QMatrix(np.stack(hamilton_planes(a, b, mul))) / len(mats)
    pairs = hermitian_topk_eig(G, k)
    evals = np.array([lam for lam, _ in pairs])
    W = QMatrix.from_columns([v for _, v in pairs])
    return evals, W


def deflated_residuals(samples, basis):
    """Left- and right-deflated samples (I - UU^*) F_i and F_i (I - VV^*)."""
    mats = _as_matrices(samples)
    lefts = []
    rights = []
    for F in mats:
        lefts.append(F - basis.U @ (basis.U.H @ F))
        rights.append(F - (F @ basis.V) @ basis.V.H)
    return lefts, rights
