# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: initializedcheck=False
# cython: cdivision=True
"""Compiled kernel backend.

Scalar twins of the kernels in ``cyins._kernels_py``: the same SplitMix64
counter stream, the same uniform lattice, and the same fdlibm-derived
portable log/exp evaluated as an identical sequence of IEEE-754 double
operations.  The extension is compiled with FP contraction disabled so the
two backends stay bit-identical.
"""

import numpy as np

from libc.math cimport INFINITY, log as c_log
from libc.stdint cimport int64_t, uint64_t
from libc.string cimport memcpy

BACKEND_NAME = "compiled"

cdef uint64_t _GAMMA = 0x9E3779B97F4A7C15ULL
cdef uint64_t _MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t _MIX2 = 0x94D049BB133111EBULL
cdef double _TWO_NEG_52 = 2.0 ** -52

cdef double _LN2_HI = 6.93147180369123816490e-01
cdef double _LN2_LO = 1.90821492927058770002e-10
cdef double _LG1 = 6.666666666666735130e-01
cdef double _LG2 = 3.999999999940941908e-01
cdef double _LG3 = 2.857142874366239149e-01
cdef double _LG4 = 2.222219843214978396e-01
cdef double _LG5 = 1.818357216161805012e-01
cdef double _LG6 = 1.531383769920937332e-01
cdef double _LG7 = 1.479819860511658591e-01

cdef double _O_THRESHOLD = 7.09782712893383973096e+02
cdef double _U_THRESHOLD = -7.45133219101941108420e+02
cdef double _INVLN2 = 1.44269504088896338700e+00
cdef double _P1 = 1.66666666666666019037e-01
cdef double _P2 = -2.77777777770155933842e-03
cdef double _P3 = 6.61375632143793436117e-05
cdef double _P4 = -1.65339022054652515390e-06
cdef double _P5 = 4.13813679705723846039e-08
cdef double _TWOM1000 = 2.0 ** -1000
cdef double _TWO1023 = 2.0 ** 1023


cdef inline uint64_t _mix(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * _MIX1
    z = (z ^ (z >> 27)) * _MIX2
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t seed, uint64_t index) noexcept nogil:
    cdef uint64_t z = _mix(seed + (index + 1) * _GAMMA)
    return (<double> (z >> 12) + 0.5) * _TWO_NEG_52


cdef inline uint64_t _d2u(double x) noexcept nogil:
    cdef uint64_t u
    memcpy(&u, &x, 8)
    return u


cdef inline double _u2d(uint64_t u) noexcept nogil:
    cdef double x
    memcpy(&x, &u, 8)
    return x


cdef double _plog(double x) noexcept nogil:
    # fdlibm natural log for finite positive normal input.
    cdef uint64_t bits = _d2u(x)
    cdef int64_t hx = <int64_t> (bits >> 32)
    cdef int64_t k = (hx >> 20) - 1023
    cdef int64_t hxm = hx & 0x000FFFFF
    cdef int64_t i = (hxm + 0x95F64) & 0x100000
    cdef uint64_t newhi = <uint64_t> (hxm | (i ^ 0x3FF00000))
    cdef double xn = _u2d((bits & 0xFFFFFFFFULL) | (newhi << 32))
    cdef double f, dk, s, z, w, t1, t2, big_r, hfsq, r_t
    k = k + (i >> 20)
    f = xn - 1.0
    dk = <double> k
    if (0x000FFFFF & (2 + hxm)) < 3:  # |f| < 2**-20
        if f == 0.0:
            if k == 0:
                return 0.0
            return dk * _LN2_HI + dk * _LN2_LO
        r_t = f * f * (0.5 - 0.33333333333333333 * f)
        if k == 0:
            return f - r_t
        return dk * _LN2_HI - ((r_t - dk * _LN2_LO) - f)
    s = f / (2.0 + f)
    z = s * s
    w = z * z
    t1 = w * (_LG2 + w * (_LG4 + w * _LG6))
    t2 = z * (_LG1 + w * (_LG3 + w * (_LG5 + w * _LG7)))
    big_r = t2 + t1
    if ((hxm - 0x6147A) | (0x6B851 - hxm)) > 0:
        hfsq = 0.5 * f * f
        if k == 0:
            return f - (hfsq - s * (hfsq + big_r))
        return dk * _LN2_HI - ((hfsq - (s * (hfsq + big_r) + dk * _LN2_LO)) - f)
    if k == 0:
        return f - s * (f - big_r)
    return dk * _LN2_HI - ((s * (f - big_r) - dk * _LN2_LO) - f)


cdef double _pexp(double x) noexcept nogil:
    # fdlibm exponential for finite input; saturates to inf / 0.0.
    cdef uint64_t bits = _d2u(x)
    cdef int64_t hx = <int64_t> ((bits >> 32) & 0x7FFFFFFFULL)
    cdef int64_t xsb = <int64_t> (bits >> 63)
    cdef int64_t k = 0
    cdef double hi = 0.0, lo = 0.0, t_far, xr, t, c, y
    cdef uint64_t twopk_bits
    if hx >= 0x40862E42:
        if x > _O_THRESHOLD:
            return INFINITY
        if x < _U_THRESHOLD:
            return 0.0
    xr = x
    if hx > 0x3FD62E42:
        if hx < 0x3FF0A2B2:
            if xsb == 0:
                hi = x - _LN2_HI
                lo = _LN2_LO
            else:
                hi = x + _LN2_HI
                lo = -_LN2_LO
            k = 1 - 2 * xsb
        else:
            if xsb == 0:
                k = <int64_t> (_INVLN2 * x + 0.5)
            else:
                k = <int64_t> (_INVLN2 * x - 0.5)
            t_far = <double> k
            hi = x - t_far * _LN2_HI
            lo = t_far * _LN2_LO
        xr = hi - lo
    elif hx < 0x3E300000:  # |x| < 2**-28
        return 1.0 + x
    t = xr * xr
    c = xr - t * (_P1 + t * (_P2 + t * (_P3 + t * (_P4 + t * _P5))))
    if k == 0:
        return 1.0 - ((xr * c) / (c - 2.0) - xr)
    y = 1.0 - ((lo - (xr * c) / (2.0 - c)) - hi)
    if k >= -1021:
        if k == 1024:
            return y * 2.0 * _TWO1023
        twopk_bits = (<uint64_t> (0x3FF00000 + (k << 20))) << 32
        return y * _u2d(twopk_bits)
    twopk_bits = (<uint64_t> (0x3FF00000 + ((k + 1000) << 20))) << 32
    return y * _u2d(twopk_bits) * _TWOM1000


def plog(x):
    """Scalar portable log; bit-identical to ``log_array`` per element.

    Domain: positive normal doubles, plus inf (returns inf).  Raises
    ValueError elsewhere; the library only calls this with values >= 1.
    """
    cdef double v = <double> x
    if v == INFINITY:
        return INFINITY
    if not v >= 2.2250738585072014e-308:
        raise ValueError(f"plog requires a positive normal value, got {x!r}")
    return _plog(v)


def log_array(x):
    """Portable natural log of an array of finite, positive, normal doubles."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty(arr.size, dtype=np.float64)
    cdef double[::1] src = arr
    cdef double[::1] dst = out
    cdef Py_ssize_t i, n = src.shape[0]
    with nogil:
        for i in range(n):
            dst[i] = _plog(src[i])
    return out


def exp_array(x):
    """Portable exponential of an array of finite doubles."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty(arr.size, dtype=np.float64)
    cdef double[::1] src = arr
    cdef double[::1] dst = out
    cdef Py_ssize_t i, n = src.shape[0]
    with nogil:
        for i in range(n):
            dst[i] = _pexp(src[i])
    return out


def fill_uniforms(double[::1] out, seed, start):
    """Fill ``out`` with draws start..start+len-1 of the uniform stream."""
    cdef uint64_t s = <uint64_t> seed
    cdef uint64_t base = <uint64_t> start
    cdef Py_ssize_t i, n = out.shape[0]
    with nogil:
        for i in range(n):
            out[i] = _uniform(s, base + <uint64_t> i)


def fill_losses(double[::1] out, seed, start, double risk):
    """Fill ``out`` with exponential losses of mean ``risk`` via inverse CDF."""
    cdef uint64_t s = <uint64_t> seed
    cdef uint64_t base = <uint64_t> start
    cdef double neg_risk = -risk
    cdef Py_ssize_t i, n = out.shape[0]
    with nogil:
        for i in range(n):
            out[i] = neg_risk * _plog(_uniform(s, base + <uint64_t> i))


def fill_loss_factors(double[::1] out, seed, start, double risk, double weight):
    """Fill ``out`` with ``exp(weight * X)`` over the same loss stream."""
    cdef uint64_t s = <uint64_t> seed
    cdef uint64_t base = <uint64_t> start
    cdef double neg_risk = -risk
    cdef double x
    cdef Py_ssize_t i, n = out.shape[0]
    with nogil:
        for i in range(n):
            x = neg_risk * _plog(_uniform(s, base + <uint64_t> i))
            out[i] = _pexp(weight * x)


def saddle_scan(pu, pa, double weight, double cu, double ca):
    """Scan the payoff surface on a grid, restricted to the feasible set.

    Same contract as the NumPy backend: per-column minima over protection
    rows (+inf / argmin -1 when no feasible row) and per-row maxima over
    attack columns (-inf / argmax -1), ties to the lowest index.
    """
    gu_arr = np.ascontiguousarray(pu, dtype=np.float64)
    ga_arr = np.ascontiguousarray(pa, dtype=np.float64)
    cdef Py_ssize_t n_u = gu_arr.size, n_a = ga_arr.size
    col_min_arr = np.full(n_a, np.inf)
    col_arg_arr = np.full(n_a, -1, dtype=np.int64)
    row_max_arr = np.full(n_u, -np.inf)
    row_arg_arr = np.full(n_u, -1, dtype=np.int64)
    cdef double[::1] gu = gu_arr
    cdef double[::1] ga = ga_arr
    cdef double[::1] col_min = col_min_arr
    cdef int64_t[::1] col_arg = col_arg_arr
    cdef double[::1] row_max = row_max_arr
    cdef int64_t[::1] row_arg = row_arg_arr
    cdef Py_ssize_t i, j
    cdef double u_i, risk, payoff, best
    cdef int64_t best_j
    with nogil:
        for i in range(n_u):
            u_i = gu[i]
            best = -INFINITY
            best_j = -1
            for j in range(n_a):
                risk = c_log(ga[j] / u_i + 1.0)
                if weight != 0.0 and 1.0 - weight * risk <= 0.0:
                    continue
                payoff = weight * risk + cu * u_i - ca * ga[j]
                if payoff > best:
                    best = payoff
                    best_j = j
                if payoff < col_min[j]:
                    col_min[j] = payoff
                    col_arg[j] = i
            row_max[i] = best
            row_arg[i] = best_j
    return col_min_arr, col_arg_arr, row_max_arr, row_arg_arr
