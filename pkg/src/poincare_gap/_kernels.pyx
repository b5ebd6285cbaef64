# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Sturm-sequence kernels for symmetric tridiagonal matrices."""

from libc.math cimport fabs


cdef Py_ssize_t _count(const double[::1] diag, const double[::1] offsq,
                       double x, double pivmin) noexcept nogil:
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i, neg = 0
    cdef double d = diag[0] - x
    if fabs(d) < pivmin:
        d = -pivmin
    if d < 0.0:
        neg += 1
    for i in range(1, n):
        d = (diag[i] - x) - offsq[i - 1] / d
        if fabs(d) < pivmin:
            d = -pivmin
        if d < 0.0:
            neg += 1
    return neg


def sturm_count(const double[::1] diag, const double[::1] offsq, double x,
                double pivmin):
    """Number of eigenvalues strictly below ``x``."""
    return _count(diag, offsq, x, pivmin)


def bisect_eigenvalue(const double[::1] diag, const double[::1] offsq, Py_ssize_t k,
                      double lo, double hi, double tol, double pivmin):
    """Eigenvalue of index ``k`` (0-based, ascending) inside ``[lo, hi]``."""
    cdef double mid
    cdef int it = 0
    with nogil:
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
