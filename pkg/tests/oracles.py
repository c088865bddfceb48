"""Brute-force reference implementations used only by the tests.

Everything here is written per pixel / per pair / per definition in plain
Python so it shares no code path with the vectorized library.
"""

import functools
import math

from scipy import integrate, optimize


def quant_color(px, bins):
    r, g, b = (int(v) * bins // 256 for v in px)
    return (r * bins + g) * bins + b


def color_grid(arr, bins):
    h, w = arr.shape[:2]
    return [[quant_color(arr[y, x], bins) for x in range(w)] for y in range(h)]


def gch(arr, bins=4):
    grid = color_grid(arr, bins)
    h, w = len(grid), len(grid[0])
    hist = [0.0] * bins**3
    for row in grid:
        for c in row:
            hist[c] += 1
    return [v / (h * w) for v in hist]


def bic_interior(arr, bins=4):
    grid = color_grid(arr, bins)
    h, w = len(grid), len(grid[0])
    out = []
    for y in range(h):
        row = []
        for x in range(w):
            ok = True
            for dy, dx in ((0, 1), (0, -1), (1, 0), (-1, 0)):
                yy, xx = y + dy, x + dx
                if 0 <= yy < h and 0 <= xx < w and grid[yy][xx] != grid[y][x]:
                    ok = False
            row.append(ok)
        out.append(row)
    return out


def ccv_component_sizes(arr, bins=4):
    """Union-find over 8-connected same-color neighbours."""
    grid = color_grid(arr, bins)
    h, w = len(grid), len(grid[0])
    parent = list(range(h * w))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for y in range(h):
        for x in range(w):
            for dy, dx in ((0, 1), (1, -1), (1, 0), (1, 1)):
                yy, xx = y + dy, x + dx
                if 0 <= yy < h and 0 <= xx < w and grid[yy][xx] == grid[y][x]:
                    a, b = find(y * w + x), find(yy * w + xx)
                    if a != b:
                        parent[a] = b
    counts = {}
    for i in range(h * w):
        counts[find(i)] = counts.get(find(i), 0) + 1
    return [[counts[find(y * w + x)] for x in range(w)] for y in range(h)]


def acc(arr, distances, bins=4):
    """Enumerate every ordered in-bounds pixel pair at each chessboard distance."""
    grid = color_grid(arr, bins)
    h, w = len(grid), len(grid[0])
    ncol = bins**3
    out = []
    for d in distances:
        same = [0] * ncol
        total = [0] * ncol
        for y in range(h):
            for x in range(w):
                for yy in range(h):
                    for xx in range(w):
                        if max(abs(yy - y), abs(xx - x)) == d:
                            c = grid[y][x]
                            total[c] += 1
                            if grid[yy][xx] == c:
                                same[c] += 1
        out.extend(same[c] / total[c] if total[c] else 0.0 for c in range(ncol))
    return out


def average_precision(relevance):
    """AP straight from the definition: mean of precision@k over relevant ranks."""
    R = sum(relevance)
    precisions = []
    for k in range(1, len(relevance) + 1):
        if relevance[k - 1]:
            precisions.append(sum(relevance[:k]) / k)
    return sum(precisions) / R


def precision_at_k(relevance, k):
    return sum(1 for r in relevance[:k] if r) / k


def _t_pdf(x, df):
    c = math.gamma((df + 1) / 2) / (math.sqrt(df * math.pi) * math.gamma(df / 2))
    return c * (1 + x * x / df) ** (-(df + 1) / 2)


@functools.lru_cache(maxsize=None)
def t_quantile(p, df):
    """Root of CDF(t) = p with the CDF from adaptive quadrature of the density."""

    def cdf_minus_p(t):
        area, _ = integrate.quad(_t_pdf, 0.0, t, args=(df,), epsabs=1e-14, epsrel=1e-13)
        return 0.5 + area - p

    return optimize.brentq(cdf_minus_p, -1e3, 1e3, xtol=1e-14, rtol=1e-14, maxiter=500)


def mean_ci(values, level):
    n = len(values)
    mean = math.fsum(values) / n
    s = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (n - 1))
    hw = t_quantile((1 + level) / 2, n - 1) * s / math.sqrt(n)
    return mean, mean - hw, mean + hw
