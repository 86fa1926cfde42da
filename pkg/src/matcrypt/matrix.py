"""Matrices over direct sums of Galois rings.

Exact products and inverses (Gaussian elimination per CRT summand with unit
pivots), Kronecker products, the two linear representations of wreath
products, ring-change group embeddings, and word evaluation over generator
sets.  Vectors are rows acting on the right.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import (
    DegreeMismatch,
    ArityMismatch,
    IncompatibleDegrees,
    IndexOutOfRange,
    NonInvertible,
    NoSuchEmbedding,
    RingMismatch,
    ShapeMismatch,
)
from .ring import (
    GaloisRingSpec,
    RingElement,
    RingSpec,
    _padd,
    _pmul,
    _pneg,
    _ppow,
    _preduce,
    _psub,
)


@dataclass(frozen=True)
class Matrix:
    n: int
    ring: RingSpec
    rows: tuple  # n tuples of n RingElements

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __mul__(self, other: "Matrix") -> "Matrix":
        return mat_mul(self, other)

    def inv(self) -> "Matrix":
        return mat_inv(self)

    def pow(self, e: int) -> "Matrix":
        if e < 0:
            return mat_inv(self).pow(-e)
        out = identity(self.n, self.ring)
        base = self
        while e:
            if e & 1:
                out = mat_mul(out, base)
            base = mat_mul(base, base)
            e >>= 1
        return out

    def is_identity(self) -> bool:
        return self == identity(self.n, self.ring)

    def key(self):
        """Hashable content key (entry coefficients only)."""
        return tuple(tuple(e.coeffs for e in row) for row in self.rows)


@dataclass(frozen=True)
class GroupWord:
    """Word over an abstract generator set: +i is generator i (1-based), -i its inverse."""
    letters: tuple[int, ...]

    def __post_init__(self):
        if any(x == 0 for x in self.letters):
            raise IndexOutOfRange("zero letter in group word")

    def inv(self) -> "GroupWord":
        return GroupWord(tuple(-x for x in reversed(self.letters)))

    def __len__(self):
        return len(self.letters)


def matrix(ring: RingSpec, int_rows) -> Matrix:
    """Build a matrix from integer entries (mapped through Z -> R)."""
    n = len(int_rows)
    rows = tuple(
        tuple(v if isinstance(v, RingElement) else ring.from_int(v) for v in row)
        for row in int_rows)
    if any(len(row) != n for row in rows):
        raise ShapeMismatch("matrix must be square")
    return Matrix(n, ring, rows)


@lru_cache(maxsize=None)
def identity(n: int, ring: RingSpec) -> Matrix:
    one, zero = ring.one(), ring.zero()
    return Matrix(n, ring, tuple(
        tuple(one if i == j else zero for j in range(n)) for i in range(n)))


def int_rows(a: Matrix):
    """Entries as CRT-recombined integers (rank-1 summands only); for display."""
    return [[a.ring.to_int(e) for e in row] for row in a.rows]


def _check_pair(a: Matrix, b: Matrix) -> None:
    if a.ring != b.ring:
        raise RingMismatch("matrices over different rings")
    if a.n != b.n:
        raise ShapeMismatch(f"degree {a.n} vs {b.n}")


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    _check_pair(a, b)
    n, ring = a.n, a.ring
    summands = ring.summands
    arows, brows = a.rows, b.rows
    out = []
    for i in range(n):
        arow = arows[i]
        row = []
        for j in range(n):
            per = []
            for s, g in enumerate(summands):
                q = g.q
                if g.r == 1:
                    acc = 0
                    for k in range(n):
                        acc += arow[k].coeffs[s][0] * brows[k][j].coeffs[s][0]
                    per.append((acc % q,))
                else:
                    accl = [0] * (2 * g.r - 1)
                    for k in range(n):
                        x = arow[k].coeffs[s]
                        y = brows[k][j].coeffs[s]
                        for ii, xi in enumerate(x):
                            if xi:
                                for jj, yj in enumerate(y):
                                    accl[ii + jj] += xi * yj
                    per.append(_preduce(accl, g.modulus, q))
            row.append(RingElement(ring, tuple(per)))
        out.append(tuple(row))
    return Matrix(n, ring, tuple(out))


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    _check_pair(a, b)
    return Matrix(a.n, a.ring, tuple(
        tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a.rows, b.rows)))


def mat_scale(a: Matrix, c: RingElement) -> Matrix:
    return Matrix(a.n, a.ring, tuple(
        tuple(c * x for x in row) for row in a.rows))


# --- per-summand dense elimination ----------------------------------------

def _summand_entries(a: Matrix, s: int):
    return [[a.rows[i][j].coeffs[s] for j in range(a.n)] for i in range(a.n)]


def _summand_inv(mat, g: GaloisRingSpec):
    """Invert over a local ring: Gaussian elimination with unit pivots."""
    n = len(mat)
    p, q, mod = g.p, g.q, g.modulus
    one, zero = g.one(), g.zero()
    a = [row[:] + [one if i == j else zero for j in range(n)]
         for i, row in enumerate(mat)]
    for col in range(n):
        piv = None
        for i in range(col, n):
            if any(c % p for c in a[i][col]):
                piv = i
                break
        if piv is None:
            raise NonInvertible("no unit pivot")
        a[col], a[piv] = a[piv], a[col]
        inv_p = _ppow(a[col][col], g.units_order() - 1, mod, q)
        a[col] = [_pmul(inv_p, c, mod, q) for c in a[col]]
        for i in range(n):
            if i != col and any(a[i][col]):
                f = a[i][col]
                a[i] = [_psub(c, _pmul(f, d, mod, q), q)
                        for c, d in zip(a[i], a[col])]
    return [row[n:] for row in a]


def _summand_det(mat, g: GaloisRingSpec):
    """Determinant over a local ring via elimination (unit pivots, no scaling)."""
    n = len(mat)
    p, q, mod = g.p, g.q, g.modulus
    a = [row[:] for row in mat]
    sign = 1
    det = g.one()
    for col in range(n):
        piv = None
        for i in range(col, n):
            if any(c % p for c in a[i][col]):
                piv = i
                break
        if piv is None:
            # determinant is a non-unit: expand the rest exactly by cofactors
            sub = [row[col:] for row in a[col:]]
            d = _cofactor_det(sub, g)
            d = _pmul(det, d, mod, q)
            return d if sign == 1 else _pneg(d, q)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            sign = -sign
        pivot = a[col][col]
        det = _pmul(det, pivot, mod, q)
        inv_p = _ppow(pivot, g.units_order() - 1, mod, q)
        for i in range(col + 1, n):
            if any(a[i][col]):
                f = _pmul(a[i][col], inv_p, mod, q)
                a[i] = [_psub(c, _pmul(f, d, mod, q), q)
                        for c, d in zip(a[i], a[col])]
    return det if sign == 1 else _pneg(det, q)


def _cofactor_det(mat, g: GaloisRingSpec):
    n = len(mat)
    q, mod = g.q, g.modulus
    if n == 1:
        return mat[0][0]
    acc = g.zero()
    for j in range(n):
        if not any(mat[0][j]):
            continue
        minor = [row[:j] + row[j + 1:] for row in mat[1:]]
        term = _pmul(mat[0][j], _cofactor_det(minor, g), mod, q)
        acc = _padd(acc, term, q) if j % 2 == 0 else _psub(acc, term, q)
    return acc


def mat_inv(a: Matrix) -> Matrix:
    parts = []
    for s, g in enumerate(a.ring.summands):
        parts.append(_summand_inv(_summand_entries(a, s), g))
    rows = tuple(
        tuple(RingElement(a.ring, tuple(parts[s][i][j]
                                        for s in range(len(a.ring.summands))))
              for j in range(a.n))
        for i in range(a.n))
    return Matrix(a.n, a.ring, rows)


def mat_det(a: Matrix) -> RingElement:
    return RingElement(a.ring, tuple(
        _summand_det(_summand_entries(a, s), g)
        for s, g in enumerate(a.ring.summands)))


def is_invertible(a: Matrix) -> bool:
    try:
        mat_inv(a)
        return True
    except NonInvertible:
        return False


# --- Kronecker and wreath representations ---------------------------------

def mat_kron(a: Matrix, b: Matrix) -> Matrix:
    if a.ring != b.ring:
        raise RingMismatch("Kronecker factors over different rings")
    na, nb = a.n, b.n
    n = na * nb
    rows = []
    for i in range(n):
        ia, ib = divmod(i, nb)
        row = []
        for j in range(n):
            ja, jb = divmod(j, nb)
            row.append(a.rows[ia][ja] * b.rows[ib][jb])
        rows.append(tuple(row))
    return Matrix(n, a.ring, tuple(rows))


def kron_all(ms: list[Matrix]) -> Matrix:
    out = ms[0]
    for m in ms[1:]:
        out = mat_kron(out, m)
    return out


# permutations: 0-indexed tuples, k[i] = image of i; compose left-to-right
def perm_id(m: int) -> tuple:
    return tuple(range(m))


def perm_inverse(k: tuple) -> tuple:
    out = [0] * len(k)
    for i, j in enumerate(k):
        out[j] = i
    return tuple(out)


def perm_compose(k1: tuple, k2: tuple) -> tuple:
    """Apply k1 first, then k2."""
    return tuple(k2[k1[i]] for i in range(len(k1)))


def _tuple_index(a: tuple, n: int) -> int:
    idx = 0
    for x in a:
        idx = idx * n + x
    return idx


def _index_tuple(idx: int, n: int, m: int) -> tuple:
    out = []
    for _ in range(m):
        out.append(idx % n)
        idx //= n
    return tuple(reversed(out))


def block_perm_matrix(k: tuple, n: int, ring: RingSpec) -> Matrix:
    """Degree n*m matrix permuting coordinate blocks: block row i -> block column k[i]."""
    m = len(k)
    one, zero = ring.one(), ring.zero()
    rows = []
    for i in range(n * m):
        bi, a = divmod(i, n)
        target = k[bi] * n + a
        rows.append(tuple(one if j == target else zero for j in range(n * m)))
    return Matrix(n * m, ring, tuple(rows))


def tensor_perm_matrix(k: tuple, n: int, ring: RingSpec) -> Matrix:
    """Degree n^m matrix moving tensor slot i to slot k[i] on pure tensors."""
    m = len(k)
    kinv = perm_inverse(k)
    one, zero = ring.one(), ring.zero()
    size = n ** m
    rows = []
    for idx in range(size):
        a = _index_tuple(idx, n, m)
        b = tuple(a[kinv[j]] for j in range(m))
        target = _tuple_index(b, n)
        rows.append(tuple(one if j == target else zero for j in range(size)))
    return Matrix(size, ring, tuple(rows))


def wreath_rep(hs: list[Matrix], k: tuple, mode: str) -> Matrix:
    """Linear representation of the wreath element (h_1..h_m; k).

    Acting on row tuples (u_1..u_m): component j of the image is
    u_i^{h_i} with i = k^{-1}(j).  ``imprimitive`` acts on the m-fold direct
    sum (degree n*m), ``product`` on the m-fold tensor power (degree n^m).
    """
    m = len(hs)
    if len(k) != m:
        raise ArityMismatch(f"{m} matrices but permutation of {len(k)} points")
    ring = hs[0].ring
    n = hs[0].n
    for h in hs:
        if h.ring != ring:
            raise RingMismatch("wreath coordinates over different rings")
        if h.n != n:
            raise DegreeMismatch("wreath coordinates of different degrees")
    if mode == "imprimitive":
        zero = ring.zero()
        rows = []
        for i in range(m):
            for a in range(n):
                row = [zero] * (n * m)
                jb = k[i]
                for b in range(n):
                    row[jb * n + b] = hs[i].rows[a][b]
                rows.append(tuple(row))
        return Matrix(n * m, ring, tuple(rows))
    if mode == "product":
        return mat_mul(kron_all(hs), tensor_perm_matrix(k, n, ring))
    raise ArityMismatch(f"unknown wreath mode {mode!r}")


# --- ring-change embeddings ------------------------------------------------

@dataclass(frozen=True)
class SubringEmbedding:
    """Unital embedding R -> R', per-summand (same p, m; source r divides target r).

    Summand i of the source maps into summand i of the target; ``roots[i]``
    is the image of the source generator x, a root of the source modulus.
    """
    src: RingSpec
    dst: RingSpec
    roots: tuple  # per summand: coefficient tuple over the dst summand

    def apply(self, a: RingElement) -> RingElement:
        out = []
        for gs, gd, root, cs in zip(self.src.summands, self.dst.summands,
                                    self.roots, a.coeffs):
            acc = gd.zero()
            power = gd.one()
            for c in cs:
                if c:
                    acc = _padd(acc, tuple(x * c % gd.q for x in power), gd.q)
                power = _pmul(power, root, gd.modulus, gd.q)
            out.append(acc)
        return RingElement(self.dst, tuple(out))

    def preimage(self, b: RingElement):
        """Inverse of apply, or None when b is outside the subring."""
        decode = _embedding_decode(self)
        out = []
        for s, (gs, gd) in enumerate(zip(self.src.summands, self.dst.summands)):
            sel_rows, inv_sub = decode[s]
            target = b.coeffs[s]
            rhs = [target[i] for i in sel_rows]
            cand = []
            for i in range(gs.r):
                acc = 0
                for j in range(gs.r):
                    acc += inv_sub[i][j] * rhs[j]
                cand.append(acc % gs.q)
            out.append(tuple(cand))
        cand_elem = RingElement(self.src, tuple(out))
        if self.apply(cand_elem) == b:
            return cand_elem
        return None


def _poly_eval(coeffs, at: tuple, g: GaloisRingSpec) -> tuple:
    """Evaluate a polynomial with integer coefficients at a point of summand g."""
    acc = g.zero()
    power = g.one()
    for c in coeffs:
        c = c % g.q
        if c:
            acc = _padd(acc, tuple(x * c % g.q for x in power), g.q)
        power = _pmul(power, at, g.modulus, g.q)
    return acc


def _find_root(modulus_src: tuple, g: GaloisRingSpec) -> tuple:
    """Root in summand g of a monic polynomial irreducible mod p (Hensel lift)."""
    if g.residue_order > 1 << 16:
        raise NoSuchEmbedding("target residue field too large for root search")
    deriv = tuple(i * c for i, c in enumerate(modulus_src))[1:]
    root = None
    for idx in range(g.residue_order):
        coeffs, v = [], idx
        for _ in range(g.r):
            coeffs.append(v % g.p)
            v //= g.p
        t = tuple(coeffs)
        val = _poly_eval(modulus_src, t, g)
        if all(c % g.p == 0 for c in val):
            root = t
            break
    if root is None:
        raise NoSuchEmbedding("modulus has no root in the target ring")
    for _ in range(g.m + 2):
        val = _poly_eval(modulus_src, root, g)
        if all(c == 0 for c in val):
            return root
        dval = _poly_eval(deriv, root, g)
        dinv = _ppow(dval, g.units_order() - 1, g.modulus, g.q)
        root = _psub(root, _pmul(val, dinv, g.modulus, g.q), g.q)
    raise NoSuchEmbedding("Hensel lifting did not converge")


@lru_cache(maxsize=None)
def find_embedding(src: RingSpec, dst: RingSpec) -> SubringEmbedding:
    """Canonical unital embedding src -> dst (summand i into summand i)."""
    if len(src.summands) != len(dst.summands):
        raise NoSuchEmbedding("summand counts differ")
    roots = []
    for gs, gd in zip(src.summands, dst.summands):
        if gs.p != gd.p or gs.m != gd.m or gd.r % gs.r != 0:
            raise NoSuchEmbedding(
                f"no embedding GR({gs.p}^{gs.m},{gs.r}) -> GR({gd.p}^{gd.m},{gd.r})")
        roots.append(_find_root(gs.modulus, gd))
    return SubringEmbedding(src, dst, tuple(roots))


@lru_cache(maxsize=None)
def _embedding_decode(emb: SubringEmbedding):
    """Per summand: (selected row indices, inverse r x r integer matrix mod q).

    Columns of the coordinate matrix are the dst coordinates of root^i; an
    invertible row-submatrix mod p exists because the root powers are a basis
    of the subring.
    """
    out = []
    for gs, gd, root in zip(emb.src.summands, emb.dst.summands, emb.roots):
        cols = []
        power = gd.one()
        for _ in range(gs.r):
            cols.append(power)
            power = _pmul(power, root, gd.modulus, gd.q)
        # select gs.r rows of the (gd.r x gs.r) matrix invertible mod p
        zq = GaloisRingSpec(gd.p, gd.m, 1, (0, 1))
        sel = _select_invertible_rows(cols, gs.r, gd)
        sub = [[(cols[j][i],) for j in range(gs.r)] for i in sel]
        inv = _summand_inv(sub, zq)
        inv_int = [[inv[i][j][0] for j in range(gs.r)] for i in range(gs.r)]
        out.append((sel, inv_int))
    return tuple(out)


def _select_invertible_rows(cols, r, g: GaloisRingSpec):
    """Greedy unit-pivot row selection over the residue field F_p."""
    p = g.p
    rows = list(range(g.r))
    work = [[cols[j][i] % g.q for j in range(r)] for i in range(g.r)]
    sel = []
    used_cols = []
    cur = [row[:] for row in work]
    for j in range(r):
        found = None
        for i in rows:
            if i in sel:
                continue
            if cur[i][j] % p:
                found = i
                break
        if found is None:
            raise NoSuchEmbedding("embedding coordinate matrix is degenerate")
        sel.append(found)
        used_cols.append(j)
        pv = cur[found][j]
        pinv = pow(pv, -1, p)
        for i in rows:
            if i != found and cur[i][j] % p:
                f = cur[i][j] * pinv % p
                cur[i] = [(a - f * b) % p for a, b in zip(cur[i], cur[found])]
    return tuple(sel)


def regular_rep_block(a_coeffs: tuple, g: GaloisRingSpec):
    """r x r integer matrix over Z_{p^m}: row i = coefficients of a * x^i."""
    rows = []
    cur = a_coeffs
    for _ in range(g.r):
        rows.append(cur)
        cur = _pmul(cur, (0, 1) + (0,) * (g.r - 2), g.modulus, g.q) \
            if g.r >= 2 else cur
    return rows


def ring_change(a: Matrix, target) -> Matrix:
    """Group monomorphism images under a ring change.

    target is one of ("extend-to", R2), ("rep-to", d) for the regular
    representation over the prime subring Z_{p^m}, or
    ("crt-lift", R_big, summand_index).
    """
    kind = target[0]
    if kind == "extend-to":
        dst = target[1]
        emb = find_embedding(a.ring, dst)
        rows = tuple(tuple(emb.apply(e) for e in row) for row in a.rows)
        return Matrix(a.n, dst, rows)
    if kind == "rep-to":
        d = target[1]
        if len(a.ring.summands) != 1:
            raise NoSuchEmbedding("rep-to needs a single-summand ring")
        g = a.ring.summands[0]
        if g.r != d:
            raise IncompatibleDegrees(f"rep-to degree {d} != ring rank {g.r}")
        dst = RingSpec((GaloisRingSpec(g.p, g.m, 1, (0, 1)),))
        n = a.n * d
        rows = [[dst.zero()] * n for _ in range(n)]
        for i in range(a.n):
            for j in range(a.n):
                block = regular_rep_block(a.rows[i][j].coeffs[0], g)
                for bi in range(d):
                    for bj in range(d):
                        rows[i * d + bi][j * d + bj] = RingElement(
                            dst, ((block[bi][bj],),))
        return Matrix(n, dst, tuple(tuple(r) for r in rows))
    if kind == "crt-lift":
        big, idx = target[1], target[2]
        if len(a.ring.summands) != 1 or a.ring.summands[0] != big.summands[idx]:
            raise NoSuchEmbedding("source ring is not the chosen summand")
        rows = []
        for i in range(a.n):
            row = []
            for j in range(a.n):
                coeffs = []
                for s, g in enumerate(big.summands):
                    if s == idx:
                        coeffs.append(a.rows[i][j].coeffs[0])
                    else:
                        coeffs.append(g.one() if i == j else g.zero())
                row.append(RingElement(big, tuple(coeffs)))
            rows.append(tuple(row))
        return Matrix(a.n, big, tuple(rows))
    raise NoSuchEmbedding(f"unknown ring-change kind {kind!r}")


def crt_project(a: Matrix, positions: tuple, sub: RingSpec) -> Matrix:
    """Restriction of a to the summands listed in positions, as a matrix over sub."""
    rows = tuple(
        tuple(RingElement(sub, tuple(e.coeffs[s] for s in positions)) for e in row)
        for row in a.rows)
    return Matrix(a.n, sub, rows)


# --- words and vectors ------------------------------------------------------

def word_eval(gens: list[Matrix], w) -> Matrix:
    """Ordered product of generators/inverses; the empty word is the identity."""
    letters = w.letters if isinstance(w, GroupWord) else tuple(w)
    if not gens:
        raise IndexOutOfRange("empty generator list")
    n, ring = gens[0].n, gens[0].ring
    out = identity(n, ring)
    inv_cache: dict[int, Matrix] = {}
    for x in letters:
        i = abs(x) - 1
        if x == 0 or i >= len(gens):
            raise IndexOutOfRange(f"letter {x} outside 1..{len(gens)}")
        if x > 0:
            out = mat_mul(out, gens[i])
        else:
            if i not in inv_cache:
                inv_cache[i] = mat_inv(gens[i])
            out = mat_mul(out, inv_cache[i])
    return out


def vector_act(v: tuple, g: Matrix) -> tuple:
    """Right action of g on a row vector of RingElements."""
    if len(v) != g.n:
        raise ShapeMismatch(f"vector length {len(v)} vs degree {g.n}")
    out = []
    for j in range(g.n):
        acc = g.ring.zero()
        for i in range(g.n):
            if not v[i].is_zero():
                acc = acc + v[i] * g.rows[i][j]
        out.append(acc)
    return tuple(out)


def vector(ring: RingSpec, ints) -> tuple:
    return tuple(v if isinstance(v, RingElement) else ring.from_int(v)
                 for v in ints)
