"""Independent reference implementations used only by the tests."""
import numpy as np


def bisect_projection(V, r, upper=1.0, iters=200):
    """Row-wise argmin ||x - v|| s.t. 0 <= x <= upper, sum x = r, by bisection on the KKT shift."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    r = np.broadcast_to(np.asarray(r, dtype=float), (V.shape[0],))
    lo = V.min(axis=1) - max(upper if np.isfinite(upper) else 0.0, 0.0) - r - 1.0
    hi = V.max(axis=1) + 1.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        s = np.clip(V - mid[:, None], 0.0, upper).sum(axis=1)
        big = s > r
        lo = np.where(big, mid, lo)
        hi = np.where(big, hi, mid)
    return np.clip(V - (0.5 * (lo + hi))[:, None], 0.0, upper)


def grid_ls_active_set(y, X, delta, largest_cell=True):
    """min ||y - t X||^2 s.t. t_1 >= 0, t_i - t_{i-1} >= delta (== for the last gap
    when largest_cell), by enumerating every active set of the inequalities."""
    from itertools import combinations

    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    m = X.shape[0]
    C = np.zeros((m, m))
    d = np.zeros(m)
    C[0, 0] = 1.0
    for i in range(1, m):
        C[i, i], C[i, i - 1], d[i] = 1.0, -1.0, delta
    forced = [m - 1] if largest_cell and m > 1 else []
    free = [i for i in range(m) if i not in forced]
    H = X @ X.T
    f = X @ y
    best, best_t = np.inf, None
    for k in range(len(free) + 1):
        for S in combinations(free, k):
            act = list(S) + forced
            A = C[act]
            K = np.block([[H, A.T], [A, np.zeros((len(act), len(act)))]])
            rhs = np.concatenate([f, d[act]])
            sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
            t = sol[:m]
            if np.all(C @ t - d >= -1e-10):
                obj = float(np.sum((y - t @ X) ** 2))
                if obj < best - 1e-12:
                    best, best_t = obj, t
    return best_t
