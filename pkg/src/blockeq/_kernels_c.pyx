# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernels for the hot entry-tuple operations.

Entries stay Python ints (arbitrary precision is the whole point); Cython only
removes the interpreter overhead of the loops.  Semantics must match
blockeq._kernels_py exactly; tests/test_kernels.py enforces this.
"""

BACKEND = "c"


def mat_mul(Py_ssize_t p, Py_ssize_t q, tuple a, Py_ssize_t r, tuple b):
    """Product of a (p x q) by b (q x r), both flat row-major tuples."""
    cdef Py_ssize_t i, j, k, ai, oi, bk
    cdef list out = [0] * (p * r)
    cdef object aik, acc
    for i in range(p):
        ai = i * q
        oi = i * r
        for k in range(q):
            aik = a[ai + k]
            if aik != 0:
                bk = k * r
                for j in range(r):
                    acc = out[oi + j]
                    out[oi + j] = acc + aik * b[bk + j]
    return tuple(out)


def row_add(tuple entries, Py_ssize_t rows, Py_ssize_t cols,
            Py_ssize_t dst, Py_ssize_t src, object c):
    """Left-multiply by I + c*E[dst,src]: row dst += c * row src."""
    cdef Py_ssize_t j, d = dst * cols, s = src * cols
    cdef list out = list(entries)
    for j in range(cols):
        out[d + j] = out[d + j] + c * entries[s + j]
    return tuple(out)


def col_add(tuple entries, Py_ssize_t rows, Py_ssize_t cols,
            Py_ssize_t src, Py_ssize_t dst, object c):
    """Right-multiply by I + c*E[src,dst]: col dst += c * col src."""
    cdef Py_ssize_t i, base
    cdef list out = list(entries)
    for i in range(rows):
        base = i * cols
        out[base + dst] = out[base + dst] + c * entries[base + src]
    return tuple(out)


def row_negate(tuple entries, Py_ssize_t rows, Py_ssize_t cols, Py_ssize_t i):
    cdef Py_ssize_t j, base = i * cols
    cdef list out = list(entries)
    for j in range(cols):
        out[base + j] = -out[base + j]
    return tuple(out)


def col_negate(tuple entries, Py_ssize_t rows, Py_ssize_t cols, Py_ssize_t j):
    cdef Py_ssize_t i
    cdef list out = list(entries)
    for i in range(rows):
        out[i * cols + j] = -out[i * cols + j]
    return tuple(out)
