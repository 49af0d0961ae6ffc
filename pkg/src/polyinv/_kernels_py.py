"""Pure-Python implementations of the hot inner loops.

Polynomials reach these functions as dicts mapping a packed monomial (a
Python int) to a nonzero coefficient.  Monomial product is integer
addition on the packed form.  ``_ckernels`` mirrors this module function for
function; :mod:`polyinv.kernels` picks one at import time.
"""

from heapq import heapify, heappop, heappush

from .limits import checkpoint

BACKEND = "python"

_POLL = 4096


def mul_terms(a, b):
    if len(a) > len(b):
        a, b = b, a
    out = {}
    get = out.get
    bitems = list(b.items())
    for rows, (ka, ca) in enumerate(a.items(), 1):
        if not rows & 63:
            checkpoint()
        for kb, cb in bitems:
            k = ka + kb
            c = get(k)
            if c is None:
                out[k] = ca * cb
            else:
                out[k] = c + ca * cb
    return {k: c for k, c in out.items() if c}


def addmul_terms(acc, b, c, shift):
    """In place: ``acc += c * X^shift * b``."""
    get = acc.get
    for kb, cb in b.items():
        k = kb + shift
        v = get(k)
        if v is None:
            acc[k] = c * cb
        else:
            v += c * cb
            if v:
                acc[k] = v
            else:
                del acc[k]


def nf_reduce(p, leads, tails, guard, top_only=False):
    """Reduce ``p`` (dict, consumed) by monic reducers.

    ``leads[i]`` is the leading key of reducer ``i`` and ``tails[i]`` its
    remaining terms as a list of ``(key, coeff)``.  Keys are order keys, so
    integer comparison is the monomial order and ``guard`` is the borrow
    mask used for divisibility tests.  Returns the remainder as a list of
    ``(key, coeff)`` in decreasing order.  With ``top_only`` the reduction
    stops at the first irreducible term and the rest of ``p`` is returned
    unreduced.
    """
    heap = [-k for k in p]
    heapify(heap)
    rem = []
    nleads = len(leads)
    steps = 0
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
                rest = sorted(p.items(), reverse=True)
                rem.extend(rest)
                return rem
            continue
        q = k - lk
        get = p.get
        for tk, tc in tails[i]:
            m = tk + q
            v = get(m)
            if v is None:
                p[m] = -c * tc
                heappush(heap, -m)
            else:
                v -= c * tc
                if v:
                    p[m] = v
                else:
                    del p[m]
        steps += 1
        if steps % _POLL == 0:
            checkpoint()
    return rem


def reduce_row_mod(row, basis, pivots, p):
    """Reduce ``row`` (list of ints mod p, modified in place) by an echelon basis.

    ``basis[i]`` has a 1 in column ``pivots[i]`` and zeros in every other
    pivot column.  Returns the index of the first nonzero entry, or -1.
    """
    for b, c in zip(basis, pivots):
        f = row[c]
        if f:
            for j in range(c, len(row)):
                bj = b[j]
                if bj:
                    row[j] = (row[j] - f * bj) % p
    for j, v in enumerate(row):
        if v:
            return j
    return -1


class ModEchelon:
    """Incremental reduced echelon form over Z/p."""

    def __init__(self, ncols, p):
        self.ncols = ncols
        self.p = p
        self.basis = []
        self.pivots = []

    @property
    def rank(self):
        return len(self.pivots)

    def add(self, row):
        """Insert ``row`` (ints mod p); True iff it was independent."""
        p = self.p
        row = [v % p for v in row]
        if len(row) != self.ncols:
            raise ValueError(f"row of length {len(row)} for {self.ncols} columns")
        c = reduce_row_mod(row, self.basis, self.pivots, p)
        if c < 0:
            return False
        inv = pow(row[c], -1, p)
        row = [v * inv % p for v in row]
        for b in self.basis:
            f = b[c]
            if f:
                for j in range(c, self.ncols):
                    if row[j]:
                        b[j] = (b[j] - f * row[j]) % p
        k = 0
        while k < len(self.pivots) and self.pivots[k] < c:
            k += 1
        self.basis.insert(k, row)
        self.pivots.insert(k, c)
        return True

    def kernel(self):
        """Basis of the right kernel, one vector per free column, ascending."""
        p = self.p
        pivset = set(self.pivots)
        out = []
        for f in range(self.ncols):
            if f in pivset:
                continue
            v = [0] * self.ncols
            v[f] = 1
            for b, c in zip(self.basis, self.pivots):
                if b[f]:
                    v[c] = (-b[f]) % p
            out.append(v)
        return out


def monomial_row_mod(vals, monos, p):
    """``[prod(vals[i]**alpha[i]) mod p for alpha in monos]``."""
    dmax = max((sum(a) for a in monos), default=0)
    powers = []
    for r in vals:
        pw = [1]
        for _ in range(dmax):
            pw.append(pw[-1] * r % p)
        powers.append(pw)
    row = []
    for alpha in monos:
        acc = 1
        for i, e in enumerate(alpha):
            if e:
                acc = acc * powers[i][e] % p
        row.append(acc)
    return row
