"""Truncated power series arithmetic and finite-difference derivatives.

Series are 1-D arrays ``a`` with ``f(x0 + t) = sum_j a[j] t**j``. All
operations truncate to the length of their first argument.
"""
import math
from functools import lru_cache

import numpy as np


def mul(a, b):
    n = len(a)
    return np.convolve(a, b[:n])[:n]


def inv(a):
    a = np.asarray(a)
    if a[0] == 0:
        raise ZeroDivisionError("series with zero constant term is not invertible")
    n = len(a)
    b = np.zeros(n, dtype=np.result_type(a, float))
    b[0] = 1.0 / a[0]
    for k in range(1, n):
        b[k] = -np.dot(a[1:k + 1], b[k - 1::-1][:k]) / a[0]
    return b


def sqrt(a):
    a = np.asarray(a)
    if a[0] <= 0:
        raise ValueError("series square root needs a positive constant term")
    n = len(a)
    b = np.zeros(n, dtype=np.result_type(a, float))
    b[0] = math.sqrt(a[0])
    for k in range(1, n):
        acc = np.dot(b[1:k], b[k - 1:0:-1]) if k > 1 else 0.0
        b[k] = (a[k] - acc) / (2.0 * b[0])
    return b


def power_of_x(x0, order, p=2):
    """Series of ``x**p`` around ``x0`` (non-negative integer ``p``)."""
    out = np.zeros(order + 1)
    for j in range(min(p, order) + 1):
        out[j] = math.comb(p, j) * x0 ** (p - j)
    return out


def to_derivatives(coeffs):
    return np.array([c * math.factorial(j) for j, c in enumerate(coeffs)])


def to_coefficients(derivs):
    return np.array([d / math.factorial(j) for j, d in enumerate(derivs)])


def evaluate(coeffs, dx):
    """Evaluate a Taylor polynomial at offset ``dx`` (Horner)."""
    dx = np.asarray(dx, dtype=float)
    out = np.zeros_like(dx, dtype=np.result_type(coeffs[0], float))
    for c in coeffs[::-1]:
        out = out * dx + c
    return out


@lru_cache(maxsize=None)
def _central_stencil(p):
    # offsets in units of h/2 and weights of the order-p central difference
    offs = [p - 2 * j for j in range(p + 1)]
    wts = [(-1) ** j * math.comb(p, j) for j in range(p + 1)]
    return tuple(offs), tuple(wts)


def derivatives(f, x0, max_order, h, levels=3):
    """Derivatives ``f^(p)(x0)`` for ``p = 0..max_order``.

    Central differences of step ``h`` are Richardson-extrapolated over
    ``levels`` halvings, giving truncation error O(h**(2*levels)).
    ``f`` may return scalars or arrays (real or complex).
    """
    cache = {}
    unit = h / 2.0 ** levels  # finest half-step

    def fval(k):
        if k not in cache:
            cache[k] = np.asarray(f(x0 + k * unit / 2.0))
        return cache[k]

    out = [fval(0)]
    for p in range(1, max_order + 1):
        offs, wts = _central_stencil(p)
        table = []
        for lev in range(levels):
            hh = h / 2.0 ** lev
            acc = 0
            for o, w in zip(offs, wts):
                # x0 + o*hh/2 in multiples of unit/2
                acc = acc + w * fval(o * 2 ** (levels - lev))
            table.append(acc / hh ** p)
        # Richardson: error expansion in even powers of h
        for m in range(1, levels):
            fac = 4.0 ** m
            table = [(fac * table[i + 1] - table[i]) / (fac - 1.0)
                     for i in range(len(table) - 1)]
        out.append(table[0])
    return out
