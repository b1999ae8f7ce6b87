"""Compiled kernel for exhaustive extension scans over many triples.

For each triple the kernel walks every ``z`` with ``z^2 = sigma (mod c)``
and ``(z^2 - sigma)/c <= d_max``, writes ``z = z0 + j c`` and
``d(j) = d0 + 2 z0 j + c j^2``, discards ``j`` by quadratic-residue wheels
mod 64, 63 and 65, and tests the survivors for ``ad+sigma`` and ``bd+sigma``
being squares.  The square test uses a float square root and compares
``x^2`` with ``ad+sigma`` modulo ``2^64``; since ``|x^2 - N| < 2^64`` for the
rounded root, that congruence is equivalent to equality.  Hits are
re-verified with exact integers by the caller.
"""

from __future__ import annotations

import numpy as np
from numba import njit


def _square_table(m: int) -> np.ndarray:
    t = np.zeros(m, dtype=np.bool_)
    for x in range(m):
        t[x * x % m] = True
    return t


QR64 = _square_table(64)
QR63 = _square_table(63)
QR65 = _square_table(65)


@njit(cache=True)
def _inv_mod(x, m):
    g0, g1, u0, u1 = m, x % m, 0, 1
    while g1:
        q = g0 // g1
        g0, g1 = g1, g0 - q * g1
        u0, u1 = u1, u0 - q * u1
    return u0 % m


@njit(cache=True)
def _roots(c, sigma, eps, out):
    """Residues ``z`` mod ``c`` with ``z^2 = sigma``; returns how many were written."""
    out[0] = 0
    cnt = 1
    mod = 1
    n = c
    p = 2
    local = np.empty(512, dtype=np.int64)
    tmp = np.empty(out.shape[0], dtype=np.int64)
    while n > 1:
        if p * p > n:
            p = n
        if n % p == 0:
            q = 1
            while n % p == 0:
                n //= p
                q *= p
            nl = 0
            if p == 2 or eps % p == 0:
                for z in range(q):
                    if (z * z - sigma) % q == 0:
                        local[nl] = z
                        nl += 1
            else:
                local[0] = eps % q
                local[1] = (q - eps % q) % q
                nl = 2
            inv = _inv_mod(mod, q)
            k = 0
            for i in range(cnt):
                r = out[i]
                for l in range(nl):
                    tmp[k] = r + mod * (((local[l] - r) % q) * inv % q)
                    k += 1
            for i in range(k):
                out[i] = tmp[i]
            cnt = k
            mod *= q
        p += 1 if p == 2 else 2
    return cnt


@njit(cache=True)
def _is_sq(coef, d, sigma):
    x = np.int64(np.floor(np.sqrt(np.float64(coef) * np.float64(d) + np.float64(sigma)) + 0.5))
    lhs = np.uint64(x) * np.uint64(x)
    rhs = np.uint64(coef) * np.uint64(d) + np.uint64(sigma)
    return lhs == rhs


@njit(cache=True)
def scan_kernel(A, B, C, S, E, DMAX, qr64, qr63, qr65, hit_idx, hit_d):
    nh = 0
    roots = np.empty(4096, dtype=np.int64)
    m64 = np.empty(64, dtype=np.bool_)
    m63 = np.empty(63, dtype=np.bool_)
    m65 = np.empty(65, dtype=np.bool_)
    for ti in range(A.shape[0]):
        a, b, c, sg, eps, dmax = A[ti], B[ti], C[ti], S[ti], E[ti], DMAX[ti]
        nr = _roots(c, sg, eps, roots)
        for ri in range(nr):
            z0 = roots[ri]
            d0 = (z0 * z0 - sg) // c
            # largest j with d(j) <= dmax
            jf = (-2.0 * z0 + np.sqrt(4.0 * z0 * z0 + 4.0 * c * (dmax - d0))) / (2.0 * c)
            jmax = np.int64(jf) + 2
            while jmax >= 0 and d0 + 2 * z0 * jmax + c * jmax * jmax > dmax:
                jmax -= 1
            if jmax < 0:
                continue
            for j in range(64):
                dm = (d0 + 2 * z0 * j + c * j * j) % 64
                m64[j] = qr64[(a * dm + sg) % 64] and qr64[(b * dm + sg) % 64]
            for j in range(63):
                dm = (d0 + 2 * z0 * j + c * j * j) % 63
                m63[j] = qr63[(a % 63 * dm + sg) % 63] and qr63[(b % 63 * dm + sg) % 63]
            for j in range(65):
                dm = (d0 + 2 * z0 * j + c * j * j) % 65
                m65[j] = qr65[(a % 65 * dm + sg) % 65] and qr65[(b % 65 * dm + sg) % 65]
            for j0 in range(64):
                if not m64[j0] or j0 > jmax:
                    continue
                i63 = j0 % 63
                i65 = j0 % 65
                for j in range(j0, jmax + 1, 64):
                    if m63[i63] and m65[i65]:
                        d = d0 + 2 * z0 * j + c * j * j
                        if d >= 1 and _is_sq(a, d, sg) and _is_sq(b, d, sg):
                            if nh < hit_idx.shape[0]:
                                hit_idx[nh] = ti
                                hit_d[nh] = d
                            nh += 1
                    i63 += 1
                    if i63 == 63:
                        i63 = 0
                    i65 -= 1
                    if i65 < 0:
                        i65 = 64
    return nh


def batch_extensions(
    triples: list[tuple[int, int, int, int]], d_max: list[int]
) -> list[list[int]]:
    """Candidate extensions for each ``(a, b, c, sigma)``; caller verifies exactly."""
    n = len(triples)
    arr = np.array(triples, dtype=np.int64).reshape(n, 4)
    A, B, C, S = (np.ascontiguousarray(arr[:, i]) for i in range(4))
    E = np.sqrt(S).astype(np.int64)
    D = np.array(d_max, dtype=np.int64)
    if n and (int(C.max()) > 2**31 or int(D.max()) > 2**62):
        raise OverflowError("triple or bound too large for the compiled scan")
    cap = 4 * n + 1024
    while True:
        hit_idx = np.empty(cap, dtype=np.int64)
        hit_d = np.empty(cap, dtype=np.int64)
        nh = scan_kernel(A, B, C, S, E, D, QR64, QR63, QR65, hit_idx, hit_d)
        if nh <= cap:
            break
        cap = nh + 16
    out: list[list[int]] = [[] for _ in range(n)]
    for i, d in zip(hit_idx[:nh].tolist(), hit_d[:nh].tolist()):
        out[i].append(d)
    return out
