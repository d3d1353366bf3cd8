"""Pure NumPy kernel backend.

Implements the same kernels as the compiled extension ``cyins._kernels`` and
produces bit-identical output.  Three ingredients make that possible:

- SplitMix64 in counter mode: draw ``i`` of a stream is the SplitMix64
  finalizer applied to ``seed + (i + 1) * GAMMA`` (mod 2**64), so a sample is
  a pure function of (seed, index) and any partition of an index range yields
  the same values.  All of that is exact 64-bit integer arithmetic.
- Uniforms on the 2**52-point lattice ``(k + 0.5) * 2**-52``, every value of
  which is exactly representable and strictly inside (0, 1).
- Portable natural log and exponential: the classic fdlibm/msun argument
  reduction and minimax polynomials, expressed as a fixed sequence of IEEE-754
  double operations.  Both backends evaluate the identical sequence (the
  compiled one with FP contraction disabled), so results match bit for bit on
  any IEEE-754 platform.  Accuracy is within 1 ulp of a correctly rounded
  result; inputs are required to be finite (log additionally requires normal
  positives), which the samplers guarantee by construction.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"

GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TWO_NEG_52 = 2.0 ** -52

# fdlibm log constants
_LN2_HI = 6.93147180369123816490e-01
_LN2_LO = 1.90821492927058770002e-10
_LG1 = 6.666666666666735130e-01
_LG2 = 3.999999999940941908e-01
_LG3 = 2.857142874366239149e-01
_LG4 = 2.222219843214978396e-01
_LG5 = 1.818357216161805012e-01
_LG6 = 1.531383769920937332e-01
_LG7 = 1.479819860511658591e-01

# fdlibm exp constants
_O_THRESHOLD = 7.09782712893383973096e+02
_U_THRESHOLD = -7.45133219101941108420e+02
_INVLN2 = 1.44269504088896338700e+00
_P1 = 1.66666666666666019037e-01
_P2 = -2.77777777770155933842e-03
_P3 = 6.61375632143793436117e-05
_P4 = -1.65339022054652515390e-06
_P5 = 4.13813679705723846039e-08
_TWOM1000 = 2.0 ** -1000
_TWO1023 = 2.0 ** 1023


def _mix_stream(seed: int, start: int, n: int) -> np.ndarray:
    idx = np.arange(start + 1, start + n + 1, dtype=np.uint64)
    z = np.uint64(seed) + idx * np.uint64(GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def log_array(x) -> np.ndarray:
    """Portable natural log of an array of finite, positive, normal doubles."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    bits = x.view(np.uint64)
    hx = (bits >> np.uint64(32)).astype(np.int64)
    lo32 = bits & np.uint64(0xFFFFFFFF)
    k = (hx >> 20) - 1023
    hxm = hx & 0x000FFFFF
    i = (hxm + 0x95F64) & 0x100000
    newhi = (hxm | (i ^ 0x3FF00000)).astype(np.uint64)
    xn = (lo32 | (newhi << np.uint64(32))).view(np.float64)
    k = k + (i >> 20)
    f = xn - 1.0
    dk = k.astype(np.float64)

    s = f / (2.0 + f)
    z = s * s
    w = z * z
    t1 = w * (_LG2 + w * (_LG4 + w * _LG6))
    t2 = z * (_LG1 + w * (_LG3 + w * (_LG5 + w * _LG7)))
    big_r = t2 + t1
    straight = (hxm - 0x6147A) | (0x6B851 - hxm)
    hfsq = 0.5 * f * f
    main_hi = np.where(
        k == 0,
        f - (hfsq - s * (hfsq + big_r)),
        dk * _LN2_HI - ((hfsq - (s * (hfsq + big_r) + dk * _LN2_LO)) - f),
    )
    main_lo = np.where(
        k == 0,
        f - s * (f - big_r),
        dk * _LN2_HI - ((s * (f - big_r) - dk * _LN2_LO) - f),
    )
    out = np.where(straight > 0, main_hi, main_lo)

    tiny = (np.int64(0x000FFFFF) & (2 + hxm)) < 3
    r_t = f * f * (0.5 - 0.33333333333333333 * f)
    tiny_val = np.where(k == 0, f - r_t, dk * _LN2_HI - ((r_t - dk * _LN2_LO) - f))
    tiny_val = np.where(f == 0.0,
                        np.where(k == 0, 0.0, dk * _LN2_HI + dk * _LN2_LO),
                        tiny_val)
    return np.where(tiny, tiny_val, out)


def exp_array(x) -> np.ndarray:
    """Portable exponential of an array of finite doubles.

    Saturates deterministically: +inf above the overflow threshold and 0.0
    below the underflow threshold.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    over = x > _O_THRESHOLD
    under = x < _U_THRESHOLD
    # Clip only the lanes that the over/under masks will replace anyway, so
    # the reduction arithmetic below never overflows int64 exponents.
    xc = np.clip(x, -746.0, 710.0)
    bits = xc.view(np.uint64)
    hx = ((bits >> np.uint64(32)) & np.uint64(0x7FFFFFFF)).astype(np.int64)
    xsb = (bits >> np.uint64(63)).astype(np.int64)

    sign_hi = np.where(xsb == 0, _LN2_HI, -_LN2_HI)
    sign_lo = np.where(xsb == 0, _LN2_LO, -_LN2_LO)
    half = np.where(xsb == 0, 0.5, -0.5)

    big = hx > 0x3FD62E42          # |x| > 0.5 ln 2: reduce
    mid = big & (hx < 0x3FF0A2B2)  # |x| < 1.5 ln 2: k = +-1 shortcut
    k_far = np.trunc(_INVLN2 * xc + half).astype(np.int64)
    t_far = k_far.astype(np.float64)
    hi = np.where(big, np.where(mid, xc - sign_hi, xc - t_far * _LN2_HI), xc)
    lo = np.where(big, np.where(mid, sign_lo, t_far * _LN2_LO), 0.0)
    k = np.where(big, np.where(mid, 1 - 2 * xsb, k_far), 0)
    xr = np.where(big, hi - lo, xc)

    t = xr * xr
    c = xr - t * (_P1 + t * (_P2 + t * (_P3 + t * (_P4 + t * _P5))))
    y0 = 1.0 - ((xr * c) / (c - 2.0) - xr)
    yk = 1.0 - ((lo - (xr * c) / (2.0 - c)) - hi)

    kshift = np.where(k >= -1021, k, k + 1000)
    twopk = (((0x3FF00000 + (kshift << 20)).astype(np.uint64)) << np.uint64(32)).view(np.float64)
    with np.errstate(over="ignore", invalid="ignore"):
        scaled = np.where(
            k >= -1021,
            np.where(k == 1024, yk * 2.0 * _TWO1023, yk * twopk),
            yk * twopk * _TWOM1000,
        )
    res = np.where(k == 0, y0, scaled)
    res = np.where(hx < 0x3E300000, 1.0 + xc, res)  # |x| < 2**-28
    return np.where(over, np.inf, np.where(under, 0.0, res))


def plog(x: float) -> float:
    """Scalar portable log; bit-identical to ``log_array`` per element.

    Domain: positive normal doubles, plus inf (returns inf).  Raises
    ValueError elsewhere; the library only calls this with values >= 1.
    """
    x = float(x)
    if x == math.inf:
        return math.inf
    if not x >= 2.2250738585072014e-308:  # rejects nonpositive, subnormal, nan
        raise ValueError(f"plog requires a positive normal value, got {x!r}")
    return float(log_array(np.array([x]))[0])
    """Fill ``out`` with draws start..start+len-1 of the uniform stream."""
    z = _mix_stream(seed, start, out.size)
    out[:] = ((z >> np.uint64(12)).astype(np.float64) + 0.5) * _TWO_NEG_52


def fill_losses(out: np.ndarray, seed: int, start: int, risk: float) -> None:
    """Fill ``out`` with exponential losses of mean ``risk`` via inverse CDF."""
    z = _mix_stream(seed, start, out.size)
    u = ((z >> np.uint64(12)).astype(np.float64) + 0.5) * _TWO_NEG_52
    out[:] = (-risk) * log_array(u)


def fill_loss_factors(out: np.ndarray, seed: int, start: int, risk: float, weight: float) -> None:
    """Fill ``out`` with ``exp(weight * X)`` over the same loss stream."""
    z = _mix_stream(seed, start, out.size)
    u = ((z >> np.uint64(12)).astype(np.float64) + 0.5) * _TWO_NEG_52
    x = (-risk) * log_array(u)
    out[:] = exp_array(weight * x)


_ROW_BLOCK = 64


def saddle_scan(pu: np.ndarray, pa: np.ndarray, weight: float, cu: float, ca: float):
    """Scan the payoff surface on a grid, restricted to the feasible set.

    For each attack column returns the minimum over protection rows (+inf if
    no feasible row) with its argmin, and for each protection row the maximum
    over attack columns (-inf if none) with its argmax.  Ties resolve to the
    lowest index.  Grids must be positive so the log term is finite.
    """
    pu = np.ascontiguousarray(pu, dtype=np.float64)
    pa = np.ascontiguousarray(pa, dtype=np.float64)
    n_u, n_a = pu.size, pa.size
    col_min = np.full(n_a, np.inf)
    col_arg = np.full(n_a, -1, dtype=np.int64)
    row_max = np.full(n_u, -np.inf)
    row_arg = np.full(n_u, -1, dtype=np.int64)
    pa_row = pa[None, :]
    for lo in range(0, n_u, _ROW_BLOCK):
        hi = min(lo + _ROW_BLOCK, n_u)
        pu_col = pu[lo:hi, None]
        risk = np.log(pa_row / pu_col + 1.0)
        payoff = weight * risk + cu * pu_col - ca * pa_row
        feasible = (1.0 - weight * risk) > 0.0 if weight != 0.0 else np.ones_like(payoff, dtype=bool)
        k_user = np.where(feasible, payoff, np.inf)
        k_attacker = np.where(feasible, payoff, -np.inf)

        block_min = k_user.min(axis=0)
        block_arg = k_user.argmin(axis=0) + lo
        better = block_min < col_min  # strict: earlier rows win ties
        col_min = np.where(better, block_min, col_min)
        col_arg = np.where(better, block_arg, col_arg)

        row_max[lo:hi] = k_attacker.max(axis=1)
        row_arg[lo:hi] = k_attacker.argmax(axis=1)
    row_arg[~np.isfinite(row_max)] = -1
    col_arg[~np.isfinite(col_min)] = -1
    return col_min, col_arg, row_max, row_arg
