"""Float kernels with a numba path and a pure-numpy path.

The exact engines never come through here; these loops serve the finite
axiom scans over element triples, batched germ evaluation and truncated
lattice sums used as numeric oracles.

Set ``MEROCONE_NO_NUMBA=1`` to force the numpy path (numba missing has the
same effect).  Both paths return identical results; the benchmark in
``benchmarks/bench_kernels.py`` times them against each other.
"""

import os

import numpy as np

try:
    if os.environ.get("MEROCONE_NO_NUMBA", "").strip() not in ("", "0"):
        raise ImportError("disabled by MEROCONE_NO_NUMBA")
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"

NONE3 = (-1, -1, -1)


# ---------------------------------------------------------------------------
# numpy implementations


def _gathers(R, P):
    Pc = np.where(P >= 0, P, 0)
    defined = P >= 0
    xy = Pc[:, :, None]                     # P[x, y]
    yz = Pc[None, :, :]                     # P[y, z]
    d_xy = np.broadcast_to(defined[:, :, None], (R.shape[0],) * 3)
    d_yz = np.broadcast_to(defined[None, :, :], (R.shape[0],) * 3)
    R_xy_z = R[Pc]                          # R[P[x, y], z]
    R_x_yz = R[:, Pc]                       # R[x, P[y, z]]
    P_xy_z = P[Pc]                          # P[P[x, y], z]
    P_x_yz = P[:, Pc]                       # P[x, P[y, z]]
    return xy, yz, d_xy, d_yz, R_xy_z, R_x_yz, P_xy_z, P_x_yz


def _first(mask):
    hits = np.argwhere(mask)
    if hits.size == 0:
        return NONE3[:mask.ndim]
    return tuple(int(i) for i in hits[0])


def np_locality(R, P):
    Rxy, Ryz, Rxz = R[:, :, None], R[None, :, :], R[:, None, :]
    Rzx, Rzy = R.T[:, None, :], R.T[None, :, :]
    _, _, d_xy, d_yz, R_xy_z, R_x_yz, P_xy_z, P_x_yz = _gathers(R, P)
    # (xy) T z and z T (xy), z ranging over the last axis
    R_z_xy = R.T[np.where(P >= 0, P, 0)]    # R[z, P[x, y]] laid out [x, y, z]
    left = Rxz & Ryz & Rxy & d_xy & ~R_xy_z
    right = Rzx & Rzy & Rxy & d_xy & ~R_z_xy
    assoc = (Rxy & Ryz & Rxz & d_xy & d_yz & R_xy_z & R_x_yz
             & (P_xy_z >= 0) & (P_x_yz >= 0) & (P_xy_z != P_x_yz))
    return _first(left | right | assoc)


def np_strong(R, P):
    Rxy, Ryz = R[:, :, None], R[None, :, :]
    _, _, d_xy, d_yz, R_xy_z, R_x_yz, P_xy_z, P_x_yz = _gathers(R, P)
    base = Rxy & Ryz & d_xy & d_yz
    bad = ~R_xy_z | ~R_x_yz | ((P_xy_z >= 0) & (P_x_yz >= 0) & (P_xy_z != P_x_yz))
    return _first(base & bad)


def np_refined(R, P):
    Rxy, Ryz = R[:, :, None], R[None, :, :]
    _, _, d_xy, d_yz, R_xy_z, R_x_yz, P_xy_z, P_x_yz = _gathers(R, P)
    a = Rxy & d_xy & (Ryz != R_xy_z)
    b = Ryz & d_yz & (Rxy != R_x_yz)
    c = (Rxy & Ryz & d_xy & d_yz & R_xy_z & R_x_yz
         & (P_xy_z >= 0) & (P_x_yz >= 0) & (P_xy_z != P_x_yz))
    return _first(a | b | c)


def np_partial(R, P):
    Rxy, Ryz = R[:, :, None], R[None, :, :]
    _, _, d_xy, d_yz, R_xy_z, R_x_yz, P_xy_z, P_x_yz = _gathers(R, P)
    # triples whose needed intermediate products fall outside the carrier are skipped
    ok = ~(Rxy & ~d_xy) & ~(Ryz & ~d_yz)
    lhs = Rxy & R_xy_z
    rhs = Ryz & R_x_yz
    bad = (lhs != rhs) | (lhs & rhs & (P_xy_z >= 0) & (P_x_yz >= 0) & (P_xy_z != P_x_yz))
    return _first(ok & bad)


def np_transitive(R, P):
    return _first(R[:, :, None] & R[None, :, :] & ~R[:, None, :])


def np_symmetric(R, P):
    return _first(R & ~R.T)


def np_eval_germ(pts, exps, coef, owner, forms, mults):
    npts = pts.shape[0]
    nterms = forms.shape[0]
    if exps.shape[0] == 0:
        return np.zeros(npts), -1
    mono = np.prod(pts[:, None, :] ** exps[None, :, :], axis=2) * coef[None, :]
    onehot = np.zeros((exps.shape[0], nterms))
    onehot[np.arange(exps.shape[0]), owner] = 1.0
    num = mono @ onehot
    L = np.einsum("tkn,pn->ptk", forms, pts)
    active = (mults > 0)[None, :, :]
    hit = np.any((L == 0) & active, axis=(1, 2))
    if hit.any():
        return np.zeros(npts), int(np.argmax(hit))
    den = np.prod(np.where(active, L, 1.0) ** mults[None, :, :], axis=2)
    return np.sum(num / den, axis=1), -1


def np_lattice_sum(basis, to_gen, eps, N, closed):
    k = basis.shape[0]
    if k == 0:
        return 1.0
    axes = np.arange(-N, N + 1, dtype=np.float64)
    grid = np.stack(np.meshgrid(*([axes] * k), indexing="ij"), axis=-1).reshape(-1, k)
    lam = grid @ to_gen
    tol = 1e-9
    inside = np.all(lam >= -tol, axis=1) if closed else np.all(lam > tol, axis=1)
    pts = grid[inside] @ basis
    return float(np.sum(np.exp(pts @ eps)))


# ---------------------------------------------------------------------------
# numba implementations

if HAVE_NUMBA:

    @njit(cache=True)
    def _nb_locality(R, P):
        n = R.shape[0]
        for x in range(n):
            for y in range(n):
                xy = P[x, y]
                for z in range(n):
                    if R[x, y] and xy >= 0:
                        if R[x, z] and R[y, z] and not R[xy, z]:
                            return x, y, z
                        if R[z, x] and R[z, y] and not R[z, xy]:
                            return x, y, z
                    yz = P[y, z]
                    if R[x, y] and R[y, z] and R[x, z] and xy >= 0 and yz >= 0:
                        if R[xy, z] and R[x, yz]:
                            a = P[xy, z]
                            b = P[x, yz]
                            if a >= 0 and b >= 0 and a != b:
                                return x, y, z
        return -1, -1, -1

    @njit(cache=True)
    def _nb_strong(R, P):
        n = R.shape[0]
        for x in range(n):
            for y in range(n):
                for z in range(n):
                    xy = P[x, y]
                    yz = P[y, z]
                    if R[x, y] and R[y, z] and xy >= 0 and yz >= 0:
                        if not R[xy, z] or not R[x, yz]:
                            return x, y, z
                        a = P[xy, z]
                        b = P[x, yz]
                        if a >= 0 and b >= 0 and a != b:
                            return x, y, z
        return -1, -1, -1

    @njit(cache=True)
    def _nb_refined(R, P):
        n = R.shape[0]
        for x in range(n):
            for y in range(n):
                for z in range(n):
                    xy = P[x, y]
                    yz = P[y, z]
                    if R[x, y] and xy >= 0 and R[y, z] != R[xy, z]:
                        return x, y, z
                    if R[y, z] and yz >= 0 and R[x, y] != R[x, yz]:
                        return x, y, z
                    if R[x, y] and R[y, z] and xy >= 0 and yz >= 0 and R[xy, z] and R[x, yz]:
                        a = P[xy, z]
                        b = P[x, yz]
                        if a >= 0 and b >= 0 and a != b:
                            return x, y, z
        return -1, -1, -1

    @njit(cache=True)
    def _nb_partial(R, P):
        n = R.shape[0]
        for x in range(n):
            for y in range(n):
                for z in range(n):
                    xy = P[x, y]
                    yz = P[y, z]
                    if R[x, y] and xy < 0:
                        continue
                    if R[y, z] and yz < 0:
                        continue
                    lhs = R[x, y] and R[xy, z]
                    rhs = R[y, z] and R[x, yz]
                    if lhs != rhs:
                        return x, y, z
                    if lhs and rhs:
                        a = P[xy, z]
                        b = P[x, yz]
                        if a >= 0 and b >= 0 and a != b:
                            return x, y, z
        return -1, -1, -1

    @njit(cache=True)
    def _nb_transitive(R, P):
        n = R.shape[0]
        for a in range(n):
            for b in range(n):
                if not R[a, b]:
                    continue
                for c in range(n):
                    if R[b, c] and not R[a, c]:
                        return a, b, c
        return -1, -1, -1

    @njit(cache=True)
    def _nb_symmetric(R, P):
        n = R.shape[0]
        for x in range(n):
            for y in range(n):
                if R[x, y] and not R[y, x]:
                    return x, y
        return -1, -1

    @njit(cache=True)
    def _nb_eval_germ(pts, exps, coef, owner, forms, mults):
        npts, n = pts.shape
        nterms, kmax = mults.shape
        out = np.zeros(npts)
        num = np.zeros(nterms)
        for p in range(npts):
            num[:] = 0.0
            for m in range(exps.shape[0]):
                v = coef[m]
                for j in range(n):
                    e = exps[m, j]
                    if e:
                        v *= pts[p, j] ** e
                num[owner[m]] += v
            for t in range(nterms):
                den = 1.0
                for i in range(kmax):
                    if mults[t, i] > 0:
                        L = 0.0
                        for j in range(n):
                            L += forms[t, i, j] * pts[p, j]
                        if L == 0.0:
                            return out, p
                        den *= L ** mults[t, i]
                out[p] += num[t] / den
        return out, -1

    @njit(cache=True)
    def _nb_lattice_sum(basis, to_gen, eps, N, closed):
        k, n = basis.shape
        if k == 0:
            return 1.0
        c = np.full(k, -N, dtype=np.int64)
        total = 0.0
        tol = 1e-9
        while True:
            inside = True
            for i in range(k):
                lam = 0.0
                for j in range(k):
                    lam += c[j] * to_gen[j, i]
                if closed:
                    if lam < -tol:
                        inside = False
                        break
                elif lam <= tol:
                    inside = False
                    break
            if inside:
                s = 0.0
                for j in range(n):
                    x = 0.0
                    for i in range(k):
                        x += c[i] * basis[i, j]
                    s += eps[j] * x
                total += np.exp(s)
            pos = k - 1
            while pos >= 0 and c[pos] == N:
                c[pos] = -N
                pos -= 1
            if pos < 0:
                break
            c[pos] += 1
        return total


# ---------------------------------------------------------------------------
# dispatch

_NUMPY = {
    "locality": np_locality,
    "strong": np_strong,
    "refined": np_refined,
    "partial": np_partial,
    "transitive": np_transitive,
    "symmetric": np_symmetric,
}

if HAVE_NUMBA:
    _NUMBA = {
        "locality": _nb_locality,
        "strong": _nb_strong,
        "refined": _nb_refined,
        "partial": _nb_partial,
        "transitive": _nb_transitive,
        "symmetric": _nb_symmetric,
    }
else:
    _NUMBA = {}


def scan(kind, R, P, backend=None):
    """First violating index tuple for an axiom scan, or ``None``."""
    backend = backend or BACKEND
    R = np.ascontiguousarray(R, dtype=np.bool_)
    P = np.ascontiguousarray(P, dtype=np.int64)
    if R.shape[0] == 0:
        return None
    fn = (_NUMBA if backend == "numba" else _NUMPY)[kind]
    hit = tuple(int(i) for i in fn(R, P))
    return None if hit[0] < 0 else hit


def eval_germ(pts, exps, coef, owner, forms, mults, backend=None):
    backend = backend or BACKEND
    args = (np.ascontiguousarray(pts, dtype=np.float64), exps, coef, owner, forms, mults)
    if backend == "numba":
        vals, bad = _nb_eval_germ(*args)
    else:
        vals, bad = np_eval_germ(*args)
    return vals, int(bad)


def lattice_sum(basis, to_gen, eps, N, closed, backend=None):
    backend = backend or BACKEND
    basis = np.ascontiguousarray(basis, dtype=np.float64)
    to_gen = np.ascontiguousarray(to_gen, dtype=np.float64)
    eps = np.ascontiguousarray(eps, dtype=np.float64)
    if backend == "numba":
        return float(_nb_lattice_sum(basis, to_gen, eps, int(N), bool(closed)))
    return np_lattice_sum(basis, to_gen, eps, int(N), bool(closed))
