"""Numba kernels for word-sized modular arithmetic on limb-major arrays.

Every array argument named ``a``/``b``/``out`` has shape ``(limbs, n)`` and dtype
uint64; per-limb parameters are 1-D arrays indexed by limb. Multiplication uses
Montgomery reduction with R = 2**64, so all moduli must be odd and below 2**62.
"""

import os

os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

import numba as nb  # noqa: E402
import numpy as np  # noqa: E402

nb.config.THREADING_LAYER = os.environ["NUMBA_THREADING_LAYER"]
if os.environ.get("HESIM_THREADS"):
    nb.set_num_threads(max(1, min(int(os.environ["HESIM_THREADS"]), nb.config.NUMBA_NUM_THREADS)))

_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)


@nb.njit(inline="always")
def _mulhi(a, b):
    a0 = a & _M32
    a1 = a >> _S32
    b0 = b & _M32
    b1 = b >> _S32
    p00 = a0 * b0
    p01 = a0 * b1
    p10 = a1 * b0
    p11 = a1 * b1
    mid = (p00 >> _S32) + (p01 & _M32) + (p10 & _M32)
    return p11 + (p01 >> _S32) + (p10 >> _S32) + (mid >> _S32)


@nb.njit(inline="always")
def redc_mul(a, b, q, qinv):
    """Return a*b/2**64 mod q. Needs b < q; a may be any 64-bit word."""
    lo = a * b
    t = _mulhi(a, b) + _mulhi(lo * qinv, q)
    if lo != _ZERO:
        t += _ONE
    if t >= q:
        t -= q
    return t


@nb.njit(parallel=True, cache=True)
def ntt_forward(a, q, qinv, tw):
    limbs, n = a.shape
    for k in nb.prange(limbs):
        qk = q[k]
        qi = qinv[k]
        row = a[k]
        t = n
        m = 1
        while m < n:
            t >>= 1
            for i in range(m):
                j1 = 2 * i * t
                s = tw[k, m + i]
                for j in range(j1, j1 + t):
                    u = row[j]
                    v = redc_mul(row[j + t], s, qk, qi)
                    x = u + v
                    if x >= qk:
                        x -= qk
                    row[j] = x
                    if u >= v:
                        row[j + t] = u - v
                    else:
                        row[j + t] = u + qk - v
            m <<= 1


@nb.njit(parallel=True, cache=True)
def ntt_inverse(a, q, qinv, itw, ninv):
    limbs, n = a.shape
    for k in nb.prange(limbs):
        qk = q[k]
        qi = qinv[k]
        row = a[k]
        t = 1
        m = n
        while m > 1:
            h = m >> 1
            j1 = 0
            for i in range(h):
                s = itw[k, h + i]
                for j in range(j1, j1 + t):
                    u = row[j]
                    v = row[j + t]
                    x = u + v
                    if x >= qk:
                        x -= qk
                    row[j] = x
                    if u >= v:
                        d = u - v
                    else:
                        d = u + qk - v
                    row[j + t] = redc_mul(d, s, qk, qi)
                j1 += 2 * t
            t <<= 1
            m = h
        c = ninv[k]
        for j in range(n):
            row[j] = redc_mul(row[j], c, qk, qi)


@nb.njit(parallel=True, cache=True)
def add_mod(a, b, q):
    limbs, n = a.shape
    out = np.empty_like(a)
    for k in nb.prange(limbs):
        qk = q[k]
        for j in range(n):
            x = a[k, j] + b[k, j]
            if x >= qk:
                x -= qk
            out[k, j] = x
    return out


@nb.njit(parallel=True, cache=True)
def add_row_const(a, c, q):
    """a[k, :] + c[k] mod q[k]."""
    limbs, n = a.shape
    out = np.empty_like(a)
    for k in nb.prange(limbs):
        qk, ck = q[k], c[k]
        for j in range(n):
            x = a[k, j] + ck
            if x >= qk:
                x -= qk
            out[k, j] = x
    return out


@nb.njit(parallel=True, cache=True)
def sub_mod(a, b, q):
    limbs, n = a.shape
    out = np.empty_like(a)
    for k in nb.prange(limbs):
        qk = q[k]
        for j in range(n):
            x = a[k, j]
            y = b[k, j]
            if x >= y:
                out[k, j] = x - y
            else:
                out[k, j] = x + qk - y
    return out


@nb.njit(parallel=True, cache=True)
def neg_mod(a, q):
    limbs, n = a.shape
    out = np.empty_like(a)
    for k in nb.prange(limbs):
        qk = q[k]
        for j in range(n):
            x = a[k, j]
            out[k, j] = _ZERO if x == _ZERO else qk - x
    return out


@nb.njit(parallel=True, cache=True)
def mul_mod(a, b, q, qinv, r2):
    limbs, n = a.shape
    out = np.empty_like(a)
    for k in nb.prange(limbs):
        qk = q[k]
        qi = qinv[k]
        rr = r2[k]
        for j in range(n):
            out[k, j] = redc_mul(redc_mul(a[k, j], b[k, j], qk, qi), rr, qk, qi)
    return out


@nb.njit(parallel=True, cache=True)
def mul_acc(acc, a, b, q, qinv, r2):
    """acc += a*b in place."""
    limbs, n = a.shape
    for k in nb.prange(limbs):
        qk = q[k]
        qi = qinv[k]
        rr = r2[k]
        for j in range(n):
            x = acc[k, j] + redc_mul(redc_mul(a[k, j], b[k, j], qk, qi), rr, qk, qi)
            if x >= qk:
                x -= qk
            acc[k, j] = x


@nb.njit(parallel=True, cache=True)
def mul_const_mont(a, c_mont, q, qinv):
    """Multiply limb k by the constant whose Montgomery form is c_mont[k]."""
    limbs, n = a.shape
    out = np.empty_like(a)
    for k in nb.prange(limbs):
        qk = q[k]
        qi = qinv[k]
        c = c_mont[k]
        for j in range(n):
            out[k, j] = redc_mul(a[k, j], c, qk, qi)
    return out


@nb.njit(parallel=True, cache=True)
def base_convert(x, src_q, src_qinv, hat_inv_mont, dst_q, dst_qinv, hat_mont):
    """Fast (approximate) basis conversion of coefficient residues.

    x: (s, n) residues modulo src_q. Returns (d, n) residues modulo dst_q of
    sum_i [x_i * hat_inv_i]_{src_i} * hat_i, which equals the input value plus a
    multiple (< s) of the source product.
    hat_inv_mont[i]: Montgomery form of (B/b_i)^-1 mod b_i.
    hat_mont[t, i]: Montgomery form of (B/b_i) mod dst_q[t].
    """
    s, n = x.shape
    d = dst_q.shape[0]
    y = np.empty_like(x)
    for i in range(s):
        qk = src_q[i]
        qi = src_qinv[i]
        c = hat_inv_mont[i]
        for j in range(n):
            y[i, j] = redc_mul(x[i, j], c, qk, qi)
    out = np.zeros((d, n), dtype=np.uint64)
    for t in nb.prange(d):
        qt = dst_q[t]
        qti = dst_qinv[t]
        for i in range(s):
            c = hat_mont[t, i]
            for j in range(n):
                v = out[t, j] + redc_mul(y[i, j], c, qt, qti)
                if v >= qt:
                    v -= qt
                out[t, j] = v
    return out
