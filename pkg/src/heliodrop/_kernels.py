"""Compiled inner loops for the time integrator.

Complex fields are passed as interleaved float64 views (re, im, re, ...)
so the loops vectorize. The operators mirror :mod:`heliodrop.functional`
node for node; the numpy versions there are the reference.
"""

import math

import numpy as np
from numba import njit

# c rho^(1+gamma) is below double round-off relative to b rho here
POWER_CUTOFF = 1e-10


@njit(cache=True, fastmath=True)
def rhs_kernel(z, out, rho, v, amp, hi, kinetic, b, repulsion, power, d, dx,
               classical, floor):
    """out = -i [-(kinetic) psi'' + V psi] on nodes 1..hi-1, zero elsewhere.

    Node 0 and nodes >= hi are the walls; their values are treated as zero.
    """
    n = rho.size
    inv = 1.0 / (dx * dx)
    for j in range(n):
        rho[j] = z[2 * j] * z[2 * j] + z[2 * j + 1] * z[2 * j + 1]
    rho[0] = 0.0
    for j in range(hi, n):
        rho[j] = 0.0
    v[0] = 0.0
    v[n - 1] = 0.0
    for j in range(1, n - 1):
        v[j] = b * rho[j] - 2.0 * d * inv * (rho[j + 1] - 2.0 * rho[j] + rho[j - 1])
    for j in range(1, hi):
        if rho[j] > POWER_CUTOFF:
            v[j] += repulsion * rho[j] ** power
    if classical:
        for j in range(n):
            amp[j] = math.sqrt(rho[j] + floor)
        for j in range(1, hi):
            # subtract U_q = -(kinetic) a'' / a
            v[j] += kinetic * inv * (amp[j + 1] - 2.0 * amp[j] + amp[j - 1]) / amp[j]
    for k in range(2 * n):
        out[k] = 0.0
    kin = kinetic * inv
    for j in range(1, hi):
        re = z[2 * j]
        im = z[2 * j + 1]
        if j + 1 < hi:
            re_r = z[2 * j + 2]
            im_r = z[2 * j + 3]
        else:
            re_r = 0.0
            im_r = 0.0
        h_re = -kin * (re_r - 2.0 * re + z[2 * j - 2]) + v[j] * re
        h_im = -kin * (im_r - 2.0 * im + z[2 * j - 1]) + v[j] * im
        out[2 * j] = h_im
        out[2 * j + 1] = -h_re


@njit(cache=True, fastmath=True)
def combine(out, y, h, coeffs, f0, f1, f2, f3, f4):
    """out = y + h (c0 f0 + c1 f1 + c2 f2 + c3 f3 + c4 f4) on float views."""
    c0 = h * coeffs[0]
    c1 = h * coeffs[1]
    c2 = h * coeffs[2]
    c3 = h * coeffs[3]
    c4 = h * coeffs[4]
    for k in range(y.size):
        out[k] = y[k] + (c0 * f0[k] + c1 * f1[k] + c2 * f2[k] + c3 * f3[k] + c4 * f4[k])


@njit(cache=True)
def all_finite(z):
    for k in range(z.size):
        if not math.isfinite(z[k]):
            return False
    return True
