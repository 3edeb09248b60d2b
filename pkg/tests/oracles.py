"""Independent reference implementations used to check the package kernels.

These are written for clarity, not speed, and share no code with the package.
"""

from __future__ import annotations

import math


def _strip_ws(s):
    out = ""
    for ch in s:
        if not ch.isspace():
            out += ch
    return out


def _ngrams(s, n):
    grams = []
    i = 0
    while i + n <= len(s):
        grams.append(s[i:i + n])
        i += 1
    return grams


def _count(items, x):
    c = 0
    for it in items:
        if it == x:
            c += 1
    return c


def brute_chrf(hyp, ref, max_n=6, beta=2.0):
    """Character n-gram F-beta, averaging P and R over orders with reference n-grams."""
    h = _strip_ws(hyp)
    r = _strip_ws(ref)
    if h == "" and r == "":
        return 1.0
    ps = []
    rs = []
    for n in range(1, max_n + 1):
        hg = _ngrams(h, n)
        rg = _ngrams(r, n)
        if len(rg) == 0:
            continue
        overlap = 0
        for g in set(hg):
            overlap += min(_count(hg, g), _count(rg, g))
        ps.append(overlap / len(hg) if len(hg) > 0 else 0.0)
        rs.append(overlap / len(rg))
    if not rs:
        return 0.0
    p = sum(ps) / len(ps)
    rr = sum(rs) / len(rs)
    if beta * beta * p + rr == 0:
        return 0.0
    return (1 + beta * beta) * p * rr / (beta * beta * p + rr)


def brute_coverage(source, target, sim):
    """Mean over source items of the best score against any target item.

    ``sim(target_item, source_item)`` is called with the same argument order the
    package uses for the gold->pred direction.
    """
    if not target:
        return 0.0
    total = 0.0
    for s in source:
        best = None
        for t in target:
            v = sim(t, s)
            if best is None or v > best:
                best = v
        total += best
    return total / len(source)


def table_tuples(grid):
    """``grid``: (columns, [(row_header, cells)]) -> 'r | c | v' strings for non-None cells."""
    columns, rows = grid
    out = []
    for header, cells in rows:
        for j in range(len(columns)):
            if cells[j] is not None:
                out.append(header + " | " + columns[j] + " | " + cells[j])
    return out


def brute_numeric(gold, pred):
    """rmse, error rate %, and squared-error sums split by the sign of pred - gold."""
    n = len(gold)
    sq = 0
    wrong = 0
    over = 0
    under = 0
    for g, p in zip(gold, pred):
        d = p - g
        sq += d * d
        if d != 0:
            wrong += 1
        if d > 0:
            over += d * d
        if d < 0:
            under += d * d
    return math.sqrt(sq / n), 100.0 * wrong / n, over, under
