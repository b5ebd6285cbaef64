"""Pure-Python versions of the routines in ``_kernels.pyx``.

Used when the compiled extension is unavailable.  The recurrences perform the
same floating-point operations in the same order, so results agree bit for bit.
"""


def _count(diag, offsq, x, pivmin):
    neg = 0
    d = diag[0] - x
    if abs(d) < pivmin:
        d = -pivmin
    if d < 0.0:
        neg += 1
    for a, e2 in zip(diag[1:], offsq):
        d = (a - x) - e2 / d
        if abs(d) < pivmin:
            d = -pivmin
        if d < 0.0:
            neg += 1
    return neg


def sturm_count(diag, offsq, x, pivmin):
    """Number of eigenvalues strictly below ``x``."""
    return _count(list(diag), list(offsq), float(x), float(pivmin))


def bisect_eigenvalue(diag, offsq, k, lo, hi, tol, pivmin):
    """Eigenvalue of index ``k`` (0-based, ascending) inside ``[lo, hi]``."""
    diag = list(diag)
    offsq = list(offsq)
    it = 0
    while hi - lo > tol and it < 400:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _count(diag, offsq, mid, pivmin) > k:
            hi = mid
        else:
            lo = mid
        it += 1
    return 0.5 * (lo + hi)
