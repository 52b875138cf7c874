"""Pure-numpy versions of the hot kernels.

Signatures match ``_ckernels`` exactly; ``_kernels`` picks one at import.
"""
import numpy as np
from scipy.linalg import cho_solve

CONVERGED, MAX_ITER, DIVERGED = 0, 1, 2


def project(y, kinds, offsets, dims, lower, upper, out):
    for kind, off, d in zip(kinds, offsets, dims):
        sl = slice(off, off + d)
        v = y[sl]
        if kind == 0:
            out[sl] = 0.0
        elif kind == 1:
            np.minimum(v, 0.0, out=out[sl])
        elif kind == 2:
            np.clip(v, lower[sl], upper[sl], out=out[sl])
        else:
            t = v[0]
            nz = np.sqrt(v[1:] @ v[1:])
            if nz <= t:
                out[sl] = v
            elif nz <= -t:
                out[sl] = 0.0
            else:
                a = 0.5 * (nz + t)
                out[off] = a
                out[off + 1:off + d] = (a / nz) * v[1:]


def alternating(L, H, h, b0, lam_r, r, kinds, offsets, dims, lower, upper,
                x, y, tol, max_iter, bound):
    """Alternate the exact x- and y-minimizations of the augmented Lagrangian.

    ``L`` is the lower Cholesky factor of G + r H'H, ``b0 = -c - H'lam + r H'h``
    and ``lam_r = lam / r``. ``x`` and ``y`` are overwritten with the last
    iterate. Returns ``(iterations, fixed_point_residual, status)``.
    """
    Ht = H.T
    v = np.empty_like(y)
    ynew = np.empty_like(y)
    res = np.inf
    for it in range(1, max_iter + 1):
        xnew = cho_solve((L, True), b0 + r * (Ht @ y), check_finite=False)
        np.subtract(H @ xnew, h, out=v)
        v += lam_r
        project(v, kinds, offsets, dims, lower, upper, ynew)
        dx = np.max(np.abs(xnew - x), initial=0.0)
        dy = np.max(np.abs(ynew - y), initial=0.0)
        res = max(dx, dy)
        x[:] = xnew
        y[:] = ynew
        if not np.isfinite(res) or np.max(np.abs(x), initial=0.0) > bound:
            return it, res, DIVERGED
        if res <= tol:
            return it, res, CONVERGED
    return max_iter, res, MAX_ITER
