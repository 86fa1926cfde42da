"""Brute-force oracles and attack experiments.

The enumeration oracle BFS-closes a generator set and answers membership,
conjugacy and transporter queries by exhaustive search, providing ground
truth for the tree-directed solvers.  The attacks implemented here are the
conjugacy linear-algebra attack over GL(n, F_q), the linear-solve attack on
group homomorphisms, and the small-group coset attack on the word
cryptosystem.  Every attack verifies its own output before reporting success.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .errors import (
    AttackFailure,
    CapExceeded,
    InsecurityWarning,
    NoSolutionSpace,
    ShapeMismatch,
)
from .matrix import (
    Matrix,
    RingElement,
    identity,
    is_invertible,
    mat_add,
    mat_inv,
    mat_mul,
    mat_scale,
    vector_act,
)
from .ring import RingSpec, ring_inv
from .rng import Rng
from .words import FreeWord, fw_inv, fw_mul


# ---------------------------------------------------------------------------
# exhaustive enumeration
# ---------------------------------------------------------------------------

@dataclass
class EnumeratedGroup:
    elements: dict          # key -> Matrix
    words: dict             # key -> tuple of generator letters
    gens: tuple
    cap: int

    def __len__(self):
        return len(self.elements)

    def contains(self, g: Matrix) -> bool:
        return g.key() in self.elements

    def matrices(self):
        return self.elements.values()


def enumerate_group(gens, cap: int) -> EnumeratedGroup:
    """BFS closure of the generator set; CapExceeded past cap elements."""
    gens = list(gens)
    if not gens:
        raise ShapeMismatch("cannot enumerate an empty generator set")
    start = identity(gens[0].n, gens[0].ring)
    elements = {start.key(): start}
    words = {start.key(): ()}
    frontier = [start]
    while frontier:
        nxt = []
        for a in frontier:
            aw = words[a.key()]
            for i, g in enumerate(gens):
                b = mat_mul(a, g)
                k = b.key()
                if k not in elements:
                    if len(elements) >= cap:
                        raise CapExceeded(
                            f"group closure exceeds cap {cap}")
                    elements[k] = b
                    words[k] = aw + (i + 1,)
                    nxt.append(b)
        frontier = nxt
    return EnumeratedGroup(elements, words, tuple(gens), cap)


def oracle_solve(problem: str, enum: EnumeratedGroup, query):
    """Exhaustive ground truth: membership, conjugacy or ltp with witnesses."""
    if problem == "membership":
        g = query
        k = g.key()
        if k in enum.elements:
            return True, enum.words[k]
        return False, None
    if problem == "conjugacy":
        f, g = query
        for h in enum.matrices():
            if mat_mul(mat_mul(mat_inv(h), g), h) == f:
                return True, h
        return False, None
    if problem == "ltp":
        u, v = query
        for g in enum.matrices():
            if vector_act(u, g) == tuple(v):
                return True, g
        return False, None
    raise ShapeMismatch(f"unknown oracle problem {problem!r}")


# ---------------------------------------------------------------------------
# linear algebra over the ring (per-summand valuation Gaussian)
# ---------------------------------------------------------------------------

def _val(c: int, p: int, m: int) -> int:
    """p-adic valuation of a coefficient vector entry inside Z_{p^m}."""
    if c == 0:
        return m
    v = 0
    while c % p == 0:
        c //= p
        v += 1
    return v


def _elem_val(cs: tuple, p: int, m: int) -> int:
    return min(_val(c, p, m) for c in cs)


def solve_linear(ring: RingSpec, columns: list, target) -> list | None:
    """Solve sum_i c_i * columns[i] = target for ring scalars c_i.

    columns and target are equal-length tuples of RingElements.  Works per
    CRT summand by Gaussian elimination with minimum-valuation pivots, which
    is exact over each local summand.
    """
    if not columns:
        return None
    height = len(target)
    per_summand = []
    for s, gs in enumerate(ring.summands):
        sol = _solve_local(
            [[col[i].coeffs[s] for col in columns] for i in range(height)],
            [target[i].coeffs[s] for i in range(height)], gs)
        if sol is None:
            return None
        per_summand.append(sol)
    out = []
    for j in range(len(columns)):
        out.append(RingElement(ring, tuple(per_summand[s][j]
                                           for s in range(len(ring.summands)))))
    return out


def _solve_local(rows, rhs, gs) -> list | None:
    """Solve over one Galois ring summand; rows of coefficient tuples."""
    from .ring import _pmul, _psub, _ppow
    p, m, q, mod = gs.p, gs.m, gs.q, gs.modulus
    nrow = len(rows)
    ncol = len(rows[0]) if nrow else 0
    a = [row[:] + [rhs[i]] for i, row in enumerate(rows)]
    piv_cols = []
    row_at = 0
    for col in range(ncol):
        best, best_val = None, m + 1
        for i in range(row_at, nrow):
            val = _elem_val(a[i][col], p, m)
            if val < best_val:
                best, best_val = i, val
        if best is None or best_val >= m:
            continue
        a[row_at], a[best] = a[best], a[row_at]
        pivot = a[row_at][col]
        # pivot = p^v * unit; normalize the unit part away
        unit = tuple(c // (p ** best_val) for c in pivot)
        uinv = _ppow(unit, gs.units_order() - 1, mod, q)
        a[row_at] = [_pmul(c, uinv, mod, q) for c in a[row_at]]
        for i in range(nrow):
            if i == row_at:
                continue
            val_i = _elem_val(a[i][col], p, m)
            if val_i >= best_val:
                f = tuple(c // (p ** best_val) for c in a[i][col])
                a[i] = [_psub(c, _pmul(f, d, mod, q), q)
                        for c, d in zip(a[i], a[row_at])]
        piv_cols.append((row_at, col, best_val))
        row_at += 1
        if row_at == nrow:
            break
    sol = [gs.zero() for _ in range(ncol)]
    for i, col, val in piv_cols:
        b = a[i][ncol]
        pv = p ** val
        if any(c % pv for c in b):
            return None
        sol[col] = tuple((c // pv) % q for c in b)
    # verify (free columns may make the system inconsistent rows)
    for i in range(nrow):
        acc = gs.zero()
        from .ring import _padd
        for j in range(ncol):
            acc = _padd(acc, _pmul(rows[i][j], sol[j], mod, q), q)
        if acc != tuple(c % q for c in rhs[i]):
            return None
    return sol


def _vectorize(mat: Matrix) -> tuple:
    return tuple(mat.rows[i][j] for i in range(mat.n) for j in range(mat.n))


def span_basis(ring: RingSpec, gens: list[Matrix], cap_rounds: int | None = None):
    """A generating list for the matrix algebra module spanned by products
    of the generators (with the identity), grown until stable."""
    n = gens[0].n
    basis: list[Matrix] = []
    vectors: list[tuple] = []

    def try_add(mat: Matrix) -> bool:
        vec = _vectorize(mat)
        if solve_linear(ring, vectors, vec) is not None:
            return False
        basis.append(mat)
        vectors.append(vec)
        return True

    try_add(identity(n, ring))
    for g in gens:
        try_add(g)
    rounds = 0
    cap_rounds = cap_rounds if cap_rounds is not None else n * n
    changed = True
    while changed and rounds < cap_rounds:
        changed = False
        rounds += 1
        for b in list(basis):
            for g in gens:
                if try_add(mat_mul(b, g)):
                    changed = True
    return basis, vectors


# ---------------------------------------------------------------------------
# conjugacy linear-algebra attack
# ---------------------------------------------------------------------------

@dataclass
class ScspReport:
    h: Matrix
    span_dim: int
    draws: int
    warned: bool
    seed: int


def scsp_linear_attack(n: int, q: int, gens_h2: list[Matrix], f: Matrix,
                       g: Matrix, seed: int, max_draws: int = 64) -> ScspReport:
    """Find h in <gens_h2> (up to algebra closure) with h^-1 g h = f.

    Solves h f = g h inside the algebra spanned by the subgroup and samples
    random solutions until one is invertible; the conjugation identity is
    verified before returning.  Warns when n >= q/2, where random solutions
    are no longer invertible with high probability.
    """
    ring = f.ring
    warned = False
    if 2 * n >= q:
        warned = True
        warnings.warn(InsecurityWarning(
            f"degree {n} is not below q/2 = {q/2}; the random-solution "
            "argument does not apply"))
    basis, _ = span_basis(ring, gens_h2)
    # h = sum c_t B_t with h f - g h = 0: columns are vectorized B_t f - g B_t
    columns = [_vectorize(mat_add(mat_mul(b, f),
                                  mat_scale(mat_mul(g, b), _minus_one(ring))))
               for b in basis]
    null = _nullspace(ring, columns)
    if not null:
        raise NoSolutionSpace("the conjugation system has only the zero solution")
    rng = Rng(seed)
    for draw in range(1, max_draws + 1):
        # random element of the solution space, as basis coefficients
        combo = [ring.zero()] * len(basis)
        for vec in null:
            r = _random_elem(ring, rng)
            combo = [acc + r * c for acc, c in zip(combo, vec)]
        h = None
        for c, bmat in zip(combo, basis):
            term = mat_scale(bmat, c)
            h = term if h is None else mat_add(h, term)
        if h is None or not is_invertible(h):
            continue
        if mat_mul(mat_mul(mat_inv(h), g), h) == f:
            return ScspReport(h, len(basis), draw, warned, seed)
    raise AttackFailure(f"no invertible verified solution in {max_draws} draws")


def _minus_one(ring: RingSpec) -> RingElement:
    return -ring.one()


def _random_elem(ring: RingSpec, rng: Rng) -> RingElement:
    return ring.element([tuple(rng.below(g.q) for _ in range(g.r))
                         for g in ring.summands])


def _nullspace(ring: RingSpec, columns: list) -> list:
    """Basis-ish spanning set of {c : sum c_i columns_i = 0} over a field ring.

    Only used over single-summand fields (m = 1), where plain Gaussian
    elimination yields an exact nullspace basis; each output vector is a
    tuple of scalar coefficients re-expressed as matrix-space vectors.
    """
    g = ring.summands[0]
    if len(ring.summands) != 1 or g.m != 1:
        raise ShapeMismatch("nullspace solver expects a single finite field")
    ncols = len(columns)
    height = len(columns[0]) if ncols else 0
    rows = [[columns[j][i] for j in range(ncols)] for i in range(height)]
    # Gaussian elimination over the field
    pivots = {}
    work = [row[:] for row in rows]
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(work)):
            if not work[i][c].is_zero():
                piv = i
                break
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        inv = ring_inv(work[r][c])
        work[r] = [x * inv for x in work[r]]
        for i in range(len(work)):
            if i != r and not work[i][c].is_zero():
                f_ = work[i][c]
                work[i] = [x - f_ * y for x, y in zip(work[i], work[r])]
        pivots[c] = r
        r += 1
    free_cols = [c for c in range(ncols) if c not in pivots]
    out = []
    one, zero = ring.one(), ring.zero()
    for fc in free_cols:
        coeffs = [zero] * ncols
        coeffs[fc] = one
        for c, ri in pivots.items():
            coeffs[c] = -work[ri][fc]
        out.append(tuple(coeffs))
    return out


# ---------------------------------------------------------------------------
# linearity attack on homomorphisms
# ---------------------------------------------------------------------------

INCONCLUSIVE = "inconclusive"


@dataclass
class LinearityReport:
    prediction: Matrix | str
    span_dim: int
    consistent: bool  # the span solve reproduces images on sampled products


def linearity_attack(gens: list[Matrix], images: list[Matrix],
                     query: Matrix) -> LinearityReport:
    """Predict f(query) assuming f extends to a linear map on the span.

    Solves query = sum c_i b_i over the span of generator products (each
    basis element carries its image) and predicts sum c_i f(b_i).  The
    consistency flag reports whether the same prediction rule reproduces the
    multiplicative images on sampled generator products.
    """
    ring = query.ring
    basis, vectors = span_basis(ring, gens)
    img_table = _image_table(gens, images, basis)
    coeffs = solve_linear(ring, vectors, _vectorize(query))
    if coeffs is None:
        pred: Matrix | str = INCONCLUSIVE
    else:
        pred = None
        for c, bimg in zip(coeffs, img_table):
            term = mat_scale(bimg, c)
            pred = term if pred is None else mat_add(pred, term)
    consistent = _consistency_check(ring, gens, images, basis, vectors, img_table)
    return LinearityReport(pred, len(basis), consistent)


def _image_table(gens, images, basis) -> list[Matrix]:
    """Images of the span basis elements under the homomorphism.

    Basis elements are products of generators by construction; their images
    are the corresponding products of generator images.
    """
    lookup = {g.key(): img for g, img in zip(gens, images)}
    n = gens[0].n
    ring = gens[0].ring
    out = []
    for b in basis:
        img = _product_image(b, gens, images, lookup, n, ring)
        out.append(img)
    return out


def _product_image(b, gens, images, lookup, n, ring):
    if b.is_identity():
        return identity(images[0].n, images[0].ring)
    if b.key() in lookup:
        return lookup[b.key()]
    # reconstruct b as a product of generators by BFS over short words
    frontier = [(identity(n, ring), identity(images[0].n, images[0].ring))]
    seen = {frontier[0][0].key()}
    for _ in range(12):
        nxt = []
        for mat, img in frontier:
            for g, gi in zip(gens, images):
                m2 = mat_mul(mat, g)
                if m2.key() in seen:
                    continue
                seen.add(m2.key())
                i2 = mat_mul(img, gi)
                if m2 == b:
                    return i2
                nxt.append((m2, i2))
        frontier = nxt
        if not frontier:
            break
    raise AttackFailure("could not express a span element as a generator product")


def _consistency_check(ring, gens, images, basis, vectors, img_table) -> bool:
    for i, g in enumerate(gens):
        for j, h in enumerate(gens):
            prod = mat_mul(g, h)
            coeffs = solve_linear(ring, vectors, _vectorize(prod))
            if coeffs is None:
                return False
            pred = None
            for c, bimg in zip(coeffs, img_table):
                term = mat_scale(bimg, c)
                pred = term if pred is None else mat_add(pred, term)
            if pred != mat_mul(images[i], images[j]):
                return False
    return True


# ---------------------------------------------------------------------------
# small-group coset attack on the word cryptosystem
# ---------------------------------------------------------------------------

@dataclass
class CosetAttack:
    table: list          # (model element key, representative X-word)
    searched: dict       # free word letters -> model image key of the f-image
    bound: int
    pk: object
    model: object

    def decrypt(self, cipher: FreeWord):
        """Model image of the plaintext, or INCONCLUSIVE."""
        from .homcrypt import f_inverse_word
        for key, rep_word in self.table:
            q = fw_mul(cipher, fw_inv(rep_word))
            hit = self.searched.get(q.letters)
            if hit is not None and hit == self.model.identity_key():
                return key
        return INCONCLUSIVE


def coset_attack(pk, model, length_bound: int) -> CosetAttack:
    """List the model group, pick coset representatives f^-1(h_i), and decide
    cosets by bounded-length search over products of public generators."""
    from .homcrypt import f_inverse_word

    if model.order() > 4096:
        raise CapExceeded("model group too large for the coset attack")
    # one representative word per model element, by BFS over Y letters
    reps: dict = {}
    k = pk.presentation.k
    frontier = [FreeWord(k, ())]
    reps[model.identity_key()] = FreeWord(k, ())
    while frontier and len(reps) < model.order():
        nxt = []
        for w in frontier:
            for letter in range(1, k + 1):
                for sgn in (1, -1):
                    w2 = fw_mul(w, FreeWord(k, (sgn * letter,)))
                    key = model.eval_key(w2)
                    if key not in reps:
                        reps[key] = w2
                        nxt.append(w2)
        frontier = nxt
    table = [(key, f_inverse_word(pk, w)) for key, w in reps.items()]
    # bounded-length search table: products of X-generators and inverses
    searched: dict = {(): model.identity_key()}
    steps = []
    for idx, xw in enumerate(pk.x_words):
        y = pk.f_table[idx] + 1
        inv = tuple(-x for x in reversed(xw))
        steps.append((tuple(xw), model.gen_key(y, 1)))
        steps.append((inv, model.gen_key(y, -1)))
    frontier2 = [((), model.identity_key())]
    for _ in range(length_bound):
        nxt = []
        for letters, img in frontier2:
            for chunk, gk in steps:
                buf = list(letters)
                for x in chunk:
                    if buf and buf[-1] == -x:
                        buf.pop()
                    else:
                        buf.append(x)
                w2 = tuple(buf)
                if w2 not in searched:
                    img2 = model.mul_key(img, gk)
                    searched[w2] = img2
                    nxt.append((w2, img2))
        frontier2 = nxt
    return CosetAttack(table, searched, length_bound, pk, model)
