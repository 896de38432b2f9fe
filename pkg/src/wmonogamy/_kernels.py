"""Hot kernels for the convex-roof search.

The ensemble objective and the coordinate-descent sweep dominate the
runtime of every roof solve, so they are compiled with numba when it is
available.  Setting MONOGAMY_BACKEND=numpy (or a missing numba install)
selects the interpreted NumPy twin of the exact same code paths; results
are identical up to floating-point noise.  benchmarks/bench_roof.py
compares the two.

Isometry parametrization: an r x k isometry V is built from complex Givens
rotations G(theta, phi) on the row pairs (j, i), j < k <= i' <= r, applied
to the embedded identity, plus k column phases.  That is a minimal chart of
the isometry manifold (dimension 2rk - k^2) and every ensemble of r pure
states realizing a rank-k state arises from some V (mixing theorem).
"""
from __future__ import annotations

import os

import numpy as np

KIND_CONCURRENCE = 0
KIND_ENTROPY = 1

GOLDEN_ITERS = 14
_INVPHI = 0.6180339887498949
_START_STEP = 0.25 * np.pi
_WEIGHT_EPS = 1e-14

_env = os.environ.get("MONOGAMY_BACKEND", "").strip().lower()
if _env in ("", "auto", "numba"):
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:
        if _env == "numba":
            raise ImportError("MONOGAMY_BACKEND=numba but numba is not installed")
        NUMBA_ENABLED = False
elif _env == "numpy":
    NUMBA_ENABLED = False
else:
    raise ValueError(f"unknown MONOGAMY_BACKEND value {_env!r} (use numba or numpy)")

BACKEND = "numba" if NUMBA_ENABLED else "numpy"

if NUMBA_ENABLED:
    def _jit(func):
        return _njit(cache=True, nogil=True)(func)
else:
    def _jit(func):
        return func


def pair_arrays(r: int, k: int):
    """Givens row pairs (col, row) in elimination order for an r x k isometry."""
    pa, pb = [], []
    for j in range(k):
        for i in range(j + 1, r):
            pa.append(j)
            pb.append(i)
    return np.asarray(pa, dtype=np.int64), np.asarray(pb, dtype=np.int64)


def n_params(r: int, k: int) -> int:
    npairs = k * r - k * (k + 1) // 2
    return 2 * npairs + k


@_jit
def build_isometry(theta, pair_a, pair_b, r, k):
    npairs = pair_a.size
    v = np.zeros((r, k), dtype=np.complex128)
    for j in range(k):
        v[j, j] = np.exp(1j * theta[2 * npairs + j])
    for p in range(npairs - 1, -1, -1):
        i = pair_a[p]
        j = pair_b[p]
        c = np.cos(theta[2 * p])
        s = np.sin(theta[2 * p])
        e = np.exp(1j * theta[2 * p + 1])
        for col in range(k):
            vi = v[i, col]
            vj = v[j, col]
            v[i, col] = c * vi - np.conj(e) * s * vj
            v[j, col] = e * s * vi + c * vj
    return v


@_jit
def ensemble_objective(theta, pair_a, pair_b, B, r, k, d_a, d_b, kind):
    """Weighted average of the pure-state measure over the mixed ensemble.

    B holds the support vectors scaled by sqrt(eigenvalue), one per row, in
    a basis where the cut side A occupies the most significant bits.
    """
    v = build_isometry(theta, pair_a, pair_b, r, k)
    total = 0.0
    if d_a == 2:
        for h in range(r):
            g00 = 0.0
            g11 = 0.0
            g01 = 0.0 + 0.0j
            for col in range(d_b):
                x0 = 0.0 + 0.0j
                x1 = 0.0 + 0.0j
                for j in range(k):
                    x0 += v[h, j] * B[j, col]
                    x1 += v[h, j] * B[j, d_b + col]
                g00 += x0.real * x0.real + x0.imag * x0.imag
                g11 += x1.real * x1.real + x1.imag * x1.imag
                g01 += x0 * np.conj(x1)
            w = g00 + g11
            if w < _WEIGHT_EPS:
                continue
            off = g01.real * g01.real + g01.imag * g01.imag
            if kind == KIND_CONCURRENCE:
                det = g00 * g11 - off
                if det > 0.0:
                    total += 2.0 * np.sqrt(det)
            else:
                disc = (g00 - g11) * (g00 - g11) + 4.0 * off
                s = np.sqrt(disc) if disc > 0.0 else 0.0
                mu1 = 0.5 * (w + s) / w
                mu2 = 0.5 * (w - s) / w
                ent = 0.0
                if 1e-18 < mu1 < 1.0:
                    ent -= mu1 * np.log2(mu1)
                if 1e-18 < mu2 < 1.0:
                    ent -= mu2 * np.log2(mu2)
                total += w * ent
    else:
        d = d_a * d_b
        phi = np.empty(d, dtype=np.complex128)
        gram = np.empty((d_a, d_a), dtype=np.complex128)
        for h in range(r):
            for col in range(d):
                acc = 0.0 + 0.0j
                for j in range(k):
                    acc += v[h, j] * B[j, col]
                phi[col] = acc
            w = 0.0
            for col in range(d):
                w += phi[col].real * phi[col].real + phi[col].imag * phi[col].imag
            if w < _WEIGHT_EPS:
                continue
            for a1 in range(d_a):
                for a2 in range(d_a):
                    acc = 0.0 + 0.0j
                    for col in range(d_b):
                        acc += phi[a1 * d_b + col] * np.conj(phi[a2 * d_b + col])
                    gram[a1, a2] = acc
            mu = np.linalg.eigvalsh(gram)
            if kind == KIND_CONCURRENCE:
                sq = 0.0
                for a1 in range(d_a):
                    sq += mu[a1] * mu[a1]
                c2 = 2.0 * (w * w - sq)
                if c2 > 0.0:
                    total += np.sqrt(c2)
            else:
                ent = 0.0
                for a1 in range(d_a):
                    m = mu[a1] / w
                    if 1e-18 < m < 1.0:
                        ent -= m * np.log2(m)
                total += w * ent
    return total


@_jit
def coordinate_descent(theta, pair_a, pair_b, B, r, k, d_a, d_b, kind, sign, tol, max_sweeps):
    """Golden-section coordinate sweeps over the Givens parameters.

    ``sign`` is +1 to minimize the objective and -1 to maximize.  The bracket
    half-width shrinks whenever a full sweep improves by less than ``tol``;
    the search stops once the bracket falls below ``tol`` (converged) or the
    sweep cap is hit (not converged).  Returns (best, sweeps, converged);
    ``theta`` is updated in place.
    """
    best = sign * ensemble_objective(theta, pair_a, pair_b, B, r, k, d_a, d_b, kind)
    step = _START_STEP
    nparams = theta.size
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        sweeps += 1
        sweep_start = best
        for c in range(nparams):
            x0 = theta[c]
            lo = x0 - step
            hi = x0 + step
            x1 = hi - _INVPHI * (hi - lo)
            x2 = lo + _INVPHI * (hi - lo)
            theta[c] = x1
            f1 = sign * ensemble_objective(theta, pair_a, pair_b, B, r, k, d_a, d_b, kind)
            theta[c] = x2
            f2 = sign * ensemble_objective(theta, pair_a, pair_b, B, r, k, d_a, d_b, kind)
            for _ in range(GOLDEN_ITERS):
                if f1 <= f2:
                    hi = x2
                    x2 = x1
                    f2 = f1
                    x1 = hi - _INVPHI * (hi - lo)
                    theta[c] = x1
                    f1 = sign * ensemble_objective(theta, pair_a, pair_b, B, r, k, d_a, d_b, kind)
                else:
                    lo = x1
                    x1 = x2
                    f1 = f2
                    x2 = lo + _INVPHI * (hi - lo)
                    theta[c] = x2
                    f2 = sign * ensemble_objective(theta, pair_a, pair_b, B, r, k, d_a, d_b, kind)
            if f1 < f2:
                xb, fb = x1, f1
            else:
                xb, fb = x2, f2
            if fb < best:
                best = fb
                theta[c] = xb
            else:
                theta[c] = x0
        if sweep_start - best < tol:
            step *= 0.25
            if step < tol:
                converged = True
                break
    return best, sweeps, converged


def warmup() -> None:
    """Compile (or exercise) the kernels on a tiny problem."""
    r, k, d_a, d_b = 3, 2, 2, 2
    pa, pb = pair_arrays(r, k)
    theta = np.zeros(n_params(r, k))
    rng = np.random.default_rng(0)
    b = rng.normal(size=(k, d_a * d_b)) + 1j * rng.normal(size=(k, d_a * d_b))
    b /= np.linalg.norm(b)
    for kind in (KIND_CONCURRENCE, KIND_ENTROPY):
        coordinate_descent(theta.copy(), pa, pb, np.ascontiguousarray(b),
                           r, k, d_a, d_b, kind, 1.0, 1e-3, 3)
