"""Distance kernels with a numba fast path and a pure-numpy fallback.

Every distance computed anywhere in the package goes through exactly one
kernel function per backend (``subset_dists``).  That guarantee is what makes
the accelerated pipeline and the brute-force oracle agree bit-for-bit: the
same pair of points always produces the same float64, no matter which code
path asked for it.

Backend selection happens once at import time.  Set the environment variable
``METRIC_DBSCAN_NO_NUMBA=1`` to force the numpy backend even when numba is
installed (useful for debugging and for the backend benchmark).
"""

import os

import numpy as np

EUCLIDEAN = 0
MANHATTAN = 1
ANGULAR = 2

KIND_CODES = {"euclidean": EUCLIDEAN, "manhattan": MANHATTAN, "angular": ANGULAR}


def _numpy_subset_dists(X, norms, kind, i, ids):
    """Distances from point i to each id in ``ids`` (self slot forced to 0)."""
    if kind == EUCLIDEAN:
        diff = X[ids] - X[i]
        out = np.sqrt((diff * diff).sum(axis=1))
    elif kind == MANHATTAN:
        out = np.abs(X[ids] - X[i]).sum(axis=1)
    else:
        cos = (X[ids] * X[i]).sum(axis=1) / (norms[ids] * norms[i])
        np.clip(cos, -1.0, 1.0, out=cos)
        out = np.arccos(cos)
    out[ids == i] = 0.0
    return out


def _numba_disabled():
    flag = os.environ.get("METRIC_DBSCAN_NO_NUMBA", "")
    return flag.strip().lower() in ("1", "true", "yes")


_numba_subset_dists = None
if not _numba_disabled():
    try:
        import numba

        # fastmath lets LLVM vectorize the coordinate loops.  Determinism is
        # unaffected: there is one compiled body per signature, so a given
        # pair of points always takes the identical instruction sequence.
        @numba.njit(cache=True, nogil=True, fastmath=True)
        def _numba_subset_dists(X, norms, kind, i, ids):  # pragma: no cover - jit
            m = ids.shape[0]
            dim = X.shape[1]
            out = np.empty(m, dtype=np.float64)
            for t in range(m):
                j = ids[t]
                if j == i:
                    out[t] = 0.0
                elif kind == EUCLIDEAN:
                    acc = 0.0
                    for k in range(dim):
                        d = X[i, k] - X[j, k]
                        acc += d * d
                    out[t] = np.sqrt(acc)
                elif kind == MANHATTAN:
                    acc = 0.0
                    for k in range(dim):
                        acc += abs(X[i, k] - X[j, k])
                    out[t] = acc
                else:
                    acc = 0.0
                    for k in range(dim):
                        acc += X[i, k] * X[j, k]
                    c = acc / (norms[i] * norms[j])
                    if c > 1.0:
                        c = 1.0
                    elif c < -1.0:
                        c = -1.0
                    out[t] = np.arccos(c)
            return out

    except ImportError:
        _numba_subset_dists = None

IMPLS = {"numpy": _numpy_subset_dists}
if _numba_subset_dists is not None:
    IMPLS["numba"] = _numba_subset_dists

ACTIVE_BACKEND = "numba" if "numba" in IMPLS else "numpy"
subset_dists = IMPLS[ACTIVE_BACKEND]
