"""Compiled inner loops for lattice sums."""

import math

import numba as nb


@nb.njit(cache=True, nogil=True)
def pnorm(x, y, p):
    ax = abs(x)
    ay = abs(y)
    if p == 2.0:
        return math.sqrt(ax * ax + ay * ay)
    if p == 1.0:
        return ax + ay
    big = max(ax, ay)
    if math.isinf(p) or big == 0.0:
        return big
    t = min(ax, ay) / big
    return big * (1.0 + t**p) ** (1.0 / p)


@nb.njit(cache=True, nogil=True)
def zeta_half_plane(u0, u1, v0, v1, p, s, radius, euclid_radius):
    """Sum ||m u + n v||_p^{-s} over the half plane n > 0 or (n = 0, m > 0) for the
    vectors with p-norm <= radius. ``euclid_radius`` must bound their Euclidean length.

    Coefficients are visited n-major with m ascending; the running sum is
    Neumaier-compensated. Returns (sum, number of terms).
    """
    uu = u0 * u0 + u1 * u1
    uv = u0 * v0 + u1 * v1
    vv = v0 * v0 + v1 * v1
    det = abs(u0 * v1 - u1 * v0)
    r2 = euclid_radius * euclid_radius
    nmax = int(math.floor(euclid_radius * math.sqrt(uu) / det)) + 1
    total = 0.0
    comp = 0.0
    count = 0
    for n in range(0, nmax + 1):
        disc = (uv * n) ** 2 - uu * (vv * n * n - r2)
        if disc < 0.0:
            continue
        sq = math.sqrt(disc)
        lo = int(math.ceil((-uv * n - sq) / uu)) - 1
        hi = int(math.floor((-uv * n + sq) / uu)) + 1
        if n == 0:
            lo = 1
        for m in range(lo, hi + 1):
            x = m * u0 + n * v0
            y = m * u1 + n * v1
            r = pnorm(x, y, p)
            if r > radius:
                continue
            term = r ** (-s)
            t = total + term
            if abs(total) >= abs(term):
                comp += (total - t) + term
            else:
                comp += (term - t) + total
            total = t
            count += 1
    return total + comp, count
