# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of :mod:`polyinv._kernels_py`.

The term-dict kernels keep Python ints as monomial keys but do the rational
arithmetic directly on the GMP structs behind gmpy2's ``mpq``, writing into
coefficients this module owns.  The modular echelon stores rows as C arrays
of 64-bit residues and multiplies in Montgomery form.
"""

from heapq import heapify, heappop, heappush

from cpython.mem cimport PyMem_Free, PyMem_Malloc
from gmpy2 cimport GMPy_MPQ_New, import_gmpy2, mpq, mpq_ptr, mpq_set, mpq_srcptr, mpq_t
from libc.string cimport memmove, memset

from gmpy2 import mpq as _mpq

from .limits import checkpoint

import_gmpy2()

BACKEND = "cython"

cdef extern from "gmp.h":
    void mpq_init(mpq_ptr x)
    void mpq_clear(mpq_ptr x)
    void mpq_mul(mpq_ptr rop, mpq_srcptr a, mpq_srcptr b)
    void mpq_add(mpq_ptr rop, mpq_srcptr a, mpq_srcptr b)
    void mpq_sub(mpq_ptr rop, mpq_srcptr a, mpq_srcptr b)
    void mpq_neg(mpq_ptr rop, mpq_srcptr a)
    int mpq_sgn(mpq_srcptr a)

ctypedef unsigned long long u64

cdef extern from *:
    """
    typedef unsigned __int128 polyinv_u128;

    static inline unsigned long long polyinv_redc(polyinv_u128 t, unsigned long long p,
                                                  unsigned long long nprime) {
        unsigned long long m = (unsigned long long)t * nprime;
        unsigned long long r = (unsigned long long)((t + (polyinv_u128)m * p) >> 64);
        return r >= p ? r - p : r;
    }

    static inline unsigned long long polyinv_mont_mul(unsigned long long a, unsigned long long b,
                                                      unsigned long long p, unsigned long long nprime) {
        return polyinv_redc((polyinv_u128)a * b, p, nprime);
    }

    static inline unsigned long long polyinv_to_mont(unsigned long long a, unsigned long long p) {
        return (unsigned long long)((((polyinv_u128)a) << 64) % p);
    }
    """
    u64 polyinv_redc(u64 t, u64 p, u64 nprime) nogil
    u64 polyinv_mont_mul(u64 a, u64 b, u64 p, u64 nprime) nogil
    u64 polyinv_to_mont(u64 a, u64 p) nogil

cdef long _POLL = 4096


cdef inline mpq _new_product(mpq a, mpq b):
    cdef mpq r = GMPy_MPQ_New(NULL)
    mpq_mul(r.q, a.q, b.q)
    return r


cdef inline mpq _copy(object a):
    if not isinstance(a, mpq):
        return _mpq(a)
    cdef mpq r = GMPy_MPQ_New(NULL)
    mpq_set(r.q, (<mpq>a).q)
    return r


def mul_terms(dict a, dict b):
    if len(a) > len(b):
        a, b = b, a
    cdef dict out = {}
    cdef list bitems = list(b.items())
    cdef mpq ca, cb, v
    cdef object ka, kb, k
    cdef mpq_t tmp
    cdef Py_ssize_t rows = 0
    mpq_init(tmp)
    try:
        for ka, ca in a.items():
            rows += 1
            if not rows & 63:
                checkpoint()
            for kb, cb in bitems:
                k = ka + kb
                v = out.get(k)
                if v is None:
                    out[k] = _new_product(ca, cb)
                else:
                    # values in ``out`` are created here, so in-place is safe
                    mpq_mul(tmp, ca.q, cb.q)
                    mpq_add(v.q, v.q, tmp)
    finally:
        mpq_clear(tmp)
    return {k: v for k, v in out.items() if mpq_sgn((<mpq>v).q)}


def addmul_terms(dict acc, dict b, mpq c, shift):
    """In place: ``acc += c * X^shift * b``."""
    cdef mpq cb, v, r
    cdef object kb, k
    cdef mpq_t tmp
    mpq_init(tmp)
    try:
        for kb, cb in b.items():
            k = kb + shift
            v = acc.get(k)
            if v is None:
                acc[k] = _new_product(c, cb)
            else:
                # ``acc`` may share coefficient objects with other polynomials
                mpq_mul(tmp, c.q, cb.q)
                mpq_add(tmp, v.q, tmp)
                if mpq_sgn(tmp):
                    r = GMPy_MPQ_New(NULL)
                    mpq_set(r.q, tmp)
                    acc[k] = r
                else:
                    del acc[k]
    finally:
        mpq_clear(tmp)


def nf_reduce(dict p, leads, tails, guard, bint top_only=False):
    """Reduce ``p`` (dict, consumed) by monic reducers; see the Python twin."""
    cdef object k, kg, lk, q, m, tk
    cdef mpq c, tc, v, r
    cdef Py_ssize_t i, nleads = len(leads)
    cdef long steps = 0
    cdef list heap, rem = []
    cdef object tail
    cdef mpq_t tmp
    for k in list(p):
        p[k] = _copy(p[k])
    heap = [-k for k in p]
    heapify(heap)
    mpq_init(tmp)
    try:
        while heap:
            k = -heappop(heap)
            c = p.pop(k, None)
            if c is None:
                continue
            kg = k | guard
            i = 0
            while i < nleads:
                lk = leads[i]
                if (kg - lk) & guard == guard:
                    break
                i += 1
            if i == nleads:
                rem.append((k, c))
                if top_only:
                    rem.extend(sorted(p.items(), reverse=True))
                    return rem
                continue
            q = k - lk
            tail = tails[i]
            for tk, tc in tail:
                m = tk + q
                v = p.get(m)
                mpq_mul(tmp, c.q, tc.q)
                if v is None:
                    r = GMPy_MPQ_New(NULL)
                    mpq_neg(r.q, tmp)
                    p[m] = r
                    heappush(heap, -m)
                else:
                    mpq_sub(v.q, v.q, tmp)
                    if not mpq_sgn(v.q):
                        del p[m]
            steps += 1
            if steps % _POLL == 0:
                checkpoint()
    finally:
        mpq_clear(tmp)
    return rem


cdef u64 _neg_inverse_2_64(u64 p):
    cdef u64 inv = p
    cdef int _
    for _ in range(6):
        inv *= 2 - p * inv
    return (~inv) + 1


cdef class ModEchelon:
    """Incremental echelon form over Z/p for an odd prime p < 2**63.

    Rows are kept in echelon form while inserting; :meth:`kernel` finishes
    the back substitution, so the result matches the Python twin exactly.
    """

    cdef readonly Py_ssize_t ncols
    cdef readonly object p
    cdef u64 _p, _np, _r1
    cdef u64 **_rows
    cdef Py_ssize_t *_piv
    cdef Py_ssize_t _rank
    cdef u64 *_scratch

    def __cinit__(self, Py_ssize_t ncols, p):
        self._rows = NULL
        self._piv = NULL
        self._scratch = NULL
        self._rank = 0

    def __init__(self, Py_ssize_t ncols, p):
        if ncols < 0:
            raise ValueError("negative column count")
        if p < 3 or p % 2 == 0 or p >= 2 ** 63:
            raise ValueError("modulus must be an odd prime below 2**63")
        self.ncols = ncols
        self.p = p
        self._p = p
        self._np = _neg_inverse_2_64(self._p)
        self._r1 = polyinv_to_mont(1, self._p)
        self._rows = <u64 **>PyMem_Malloc((ncols + 1) * sizeof(u64 *))
        self._piv = <Py_ssize_t *>PyMem_Malloc((ncols + 1) * sizeof(Py_ssize_t))
        self._scratch = <u64 *>PyMem_Malloc((ncols + 1) * sizeof(u64))
        if self._rows == NULL or self._piv == NULL or self._scratch == NULL:
            raise MemoryError()

    def __dealloc__(self):
        cdef Py_ssize_t i
        if self._rows != NULL:
            for i in range(self._rank):
                PyMem_Free(self._rows[i])
            PyMem_Free(self._rows)
        PyMem_Free(self._piv)
        PyMem_Free(self._scratch)

    @property
    def rank(self):
        return self._rank

    @property
    def pivots(self):
        return [self._piv[i] for i in range(self._rank)]

    cdef void _axpy(self, u64 *row, const u64 *b, u64 f, Py_ssize_t start) noexcept nogil:
        # row[j] -= f * b[j] for j >= start
        cdef u64 fm = polyinv_to_mont(f, self._p)
        cdef u64 p = self._p, np = self._np, t, bj
        cdef Py_ssize_t j
        for j in range(start, self.ncols):
            bj = b[j]
            if bj:
                t = polyinv_mont_mul(bj, fm, p, np)
                row[j] = row[j] - t if row[j] >= t else row[j] + (p - t)

    def add(self, row):
        """Insert ``row`` (ints mod p); True iff it was independent."""
        cdef Py_ssize_t n = self.ncols, i, j, c, k
        cdef u64 *r = self._scratch
        cdef u64 f, inv, p = self._p
        if len(row) != n:
            raise ValueError(f"row of length {len(row)} for {n} columns")
        for j, v in enumerate(row):
            r[j] = v % self.p
        with nogil:
            for i in range(self._rank):
                c = self._piv[i]
                f = r[c]
                if f:
                    self._axpy(r, self._rows[i], f, c)
            c = -1
            for j in range(n):
                if r[j]:
                    c = j
                    break
        if c < 0:
            return False
        inv = pow(int(r[c]), -1, self.p)
        cdef u64 *new = <u64 *>PyMem_Malloc(n * sizeof(u64))
        if new == NULL:
            raise MemoryError()
        cdef u64 invm = polyinv_to_mont(inv, p)
        with nogil:
            for j in range(n):
                new[j] = polyinv_mont_mul(r[j], invm, p, self._np) if r[j] else 0
            k = self._rank
            while k > 0 and self._piv[k - 1] > c:
                k -= 1
            memmove(&self._rows[k + 1], &self._rows[k], (self._rank - k) * sizeof(u64 *))
            memmove(&self._piv[k + 1], &self._piv[k], (self._rank - k) * sizeof(Py_ssize_t))
            self._rows[k] = new
            self._piv[k] = c
            self._rank += 1
        return True

    cdef void _back_substitute(self) noexcept nogil:
        cdef Py_ssize_t i, k, c
        cdef u64 f
        i = self._rank - 1
        while i >= 0:
            c = self._piv[i]
            for k in range(i):
                f = self._rows[k][c]
                if f:
                    self._axpy(self._rows[k], self._rows[i], f, c)
            i -= 1

    def kernel(self):
        """Basis of the right kernel, one vector per free column, ascending."""
        cdef Py_ssize_t n = self.ncols, f, i
        cdef u64 p = self._p
        with nogil:
            self._back_substitute()
        cdef char *is_piv = <char *>PyMem_Malloc(n + 1)
        if is_piv == NULL:
            raise MemoryError()
        memset(is_piv, 0, n + 1)
        for i in range(self._rank):
            is_piv[self._piv[i]] = 1
        out = []
        try:
            for f in range(n):
                if is_piv[f]:
                    continue
                v = [0] * n
                v[f] = 1
                for i in range(self._rank):
                    if self._rows[i][f]:
                        v[self._piv[i]] = p - self._rows[i][f]
                out.append(v)
        finally:
            PyMem_Free(is_piv)
        return out


def monomial_row_mod(vals, monos, p):
    """``[prod(vals[i]**alpha[i]) mod p for alpha in monos]``."""
    cdef Py_ssize_t n = len(vals), m = len(monos), i, j, e, dmax = 0, s
    if m == 0:
        return []
    for alpha in monos:
        s = sum(alpha)
        if s > dmax:
            dmax = s
    if p % 2 == 0 or p >= 2 ** 63 or p < 3:
        from ._kernels_py import monomial_row_mod as slow
        return slow(vals, monos, p)
    cdef u64 P = p, NP = _neg_inverse_2_64(P), one = polyinv_to_mont(1, P), acc
    cdef u64 *pw = <u64 *>PyMem_Malloc(n * (dmax + 1) * sizeof(u64) + 1)
    if pw == NULL:
        raise MemoryError()
    out = [0] * m
    try:
        for i in range(n):
            acc = polyinv_to_mont(<u64>(vals[i] % p), P)
            pw[i * (dmax + 1)] = one
            for e in range(1, dmax + 1):
                pw[i * (dmax + 1) + e] = polyinv_mont_mul(pw[i * (dmax + 1) + e - 1], acc, P, NP)
        for j in range(m):
            alpha = monos[j]
            acc = one
            for i in range(n):
                e = alpha[i]
                if e:
                    acc = polyinv_mont_mul(acc, pw[i * (dmax + 1) + e], P, NP)
            out[j] = polyinv_redc(acc, P, NP)
    finally:
        PyMem_Free(pw)
    return out
