"""Independent reference computations, written in plain Python so they share
no code path with the package."""

import math
from fractions import Fraction


def brute_force_split(rows, labels, min_gain=None):
    """Exhaustive midpoint search with exact rational Gini arithmetic.

    Returns ``(feature, threshold, decrease)`` for the largest decrease,
    ties to the lower feature then lower threshold, or ``None`` if no
    split exists (or none beats ``min_gain`` when given).
    """
    n = len(labels)

    def gini(ys):
        m = len(ys)
        p1 = Fraction(sum(ys), m)
        return 1 - p1 * p1 - (1 - p1) * (1 - p1)

    parent = gini(labels)
    best = None
    for f in range(len(rows[0])):
        values = sorted(set(r[f] for r in rows))
        for lo, hi in zip(values, values[1:]):
            thr = lo + (hi - lo) / 2.0
            left = [y for r, y in zip(rows, labels) if r[f] <= thr]
            right = [y for r, y in zip(rows, labels) if r[f] > thr]
            dec = parent - Fraction(len(left), n) * gini(left) - Fraction(len(right), n) * gini(right)
            if min_gain is not None and dec <= min_gain:
                continue
            if best is None or dec > best[2]:
                best = (f, thr, dec)
    return best


def pairwise_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p > q else 0.5 if p == q else 0.0
    return total / (len(pos) * len(neg))


def kde_direct(x, data, bandwidth):
    h = bandwidth
    return sum(math.exp(-0.5 * ((x - d) / h) ** 2) / (h * math.sqrt(2 * math.pi)) for d in data) / len(data)


def kde2_direct(x, y, xs, ys, hx, hy):
    c = 1.0 / (2 * math.pi * hx * hy)
    tot = 0.0
    for a, b in zip(xs, ys):
        tot += c * math.exp(-0.5 * (((x - a) / hx) ** 2 + ((y - b) / hy) ** 2))
    return tot / len(xs)


def kappa_by_hand(pred, actual):
    n = len(pred)
    po = Fraction(sum(p == a for p, a in zip(pred, actual)), n)
    pe = sum(Fraction(sum(p == c for p in pred) * sum(a == c for a in actual), n * n) for c in (0, 1))
    return (po - pe) / (1 - pe)


def pearson(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)
