"""Homomorphic public-key cryptosystem over a free group.

The plaintext space is a finitely presented group H = <Y; R>; ciphertexts
live in a hidden subgroup G of the free group on Y.  The secret key is a
permutation sigma of Y.  Each public generator is
x_y = phi_sigma^-1(r_y y r'_y) with r_y, r'_y random products of conjugated
relators, and the public bijection f maps x_y back to y.  Decryption applies
sigma letterwise; it is a group homomorphism onto H, so products of
ciphertexts decrypt to products of plaintexts.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DegenerateKey, IndexOutOfRange, ShapeMismatch
from .matrix import Matrix, mat_inv, mat_mul
from .rng import Rng
from .words import FreeWord, fw_inv, fw_mul

KEYGEN_RETRIES = 64


# ---------------------------------------------------------------------------
# concrete models of the plaintext group
# ---------------------------------------------------------------------------

class PermModel:
    """Generators realized as permutations (tuples mapping i -> images[i])."""

    def __init__(self, perms):
        self.perms = [tuple(p) for p in perms]
        self.deg = len(self.perms[0])
        if any(len(p) != self.deg for p in self.perms):
            raise ShapeMismatch("permutation degrees differ")
        self._order = None

    def identity_key(self):
        return tuple(range(self.deg))

    def gen_key(self, letter: int, sign: int):
        p = self.perms[letter - 1]
        return p if sign > 0 else _perm_inv(p)

    def mul_key(self, a, b):
        return tuple(b[a[i]] for i in range(self.deg))

    def eval_key(self, word) -> tuple:
        letters = word.letters if isinstance(word, FreeWord) else word
        out = self.identity_key()
        for x in letters:
            out = self.mul_key(out, self.gen_key(abs(x), 1 if x > 0 else -1))
        return out

    def order(self) -> int:
        if self._order is None:
            seen = {self.identity_key()}
            frontier = [self.identity_key()]
            while frontier:
                nxt = []
                for a in frontier:
                    for i in range(1, len(self.perms) + 1):
                        b = self.mul_key(a, self.gen_key(i, 1))
                        if b not in seen:
                            seen.add(b)
                            nxt.append(b)
                frontier = nxt
            self._order = len(seen)
        return self._order


def _perm_inv(p: tuple) -> tuple:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


class MatrixModel:
    """Generators realized as invertible matrices."""

    def __init__(self, mats):
        self.mats = list(mats)
        self._invs = [mat_inv(m) for m in mats]
        self._order = None

    def identity_key(self):
        from .matrix import identity
        return identity(self.mats[0].n, self.mats[0].ring).key()

    def gen_key(self, letter: int, sign: int):
        m = self.mats[letter - 1] if sign > 0 else self._invs[letter - 1]
        return m.key()

    def mul_key(self, a, b):
        ma = self._matrix_of(a)
        mb = self._matrix_of(b)
        return mat_mul(ma, mb).key()

    def _matrix_of(self, key):
        from .ring import RingElement
        ring = self.mats[0].ring
        rows = tuple(tuple(RingElement(ring, cs) for cs in row) for row in key)
        return Matrix(self.mats[0].n, ring, rows)

    def eval_key(self, word):
        letters = word.letters if isinstance(word, FreeWord) else word
        from .matrix import word_eval
        return word_eval(self.mats, letters).key()

    def order(self) -> int:
        if self._order is None:
            from .analysis import enumerate_group
            self._order = len(enumerate_group(self.mats, 1 << 20))
        return self._order


@dataclass(frozen=True)
class Presentation:
    k: int
    relations: tuple
    model: object = None

    def __post_init__(self):
        if self.k < 2:
            raise ShapeMismatch("alphabet size must be >= 2")
        if self.model is not None:
            ident = self.model.identity_key()
            for r in self.relations:
                if self.model.eval_key(r) != ident:
                    raise ShapeMismatch(
                        "a relation does not hold in the supplied model")


def presentation(k: int, relations, model=None) -> Presentation:
    return Presentation(k, tuple(FreeWord(k, tuple(r)) for r in relations), model)


# --- fixtures ----------------------------------------------------------------

def klein_four() -> Presentation:
    return presentation(
        2, [(1, 1), (2, 2), (-1, -2, 1, 2)],
        PermModel([(1, 0, 3, 2), (2, 3, 0, 1)]))


def sym3() -> Presentation:
    # transposition and 3-cycle
    return presentation(
        2, [(1, 1), (2, 2, 2), (1, 2, 1, 2)],
        PermModel([(1, 0, 2), (1, 2, 0)]))


def dihedral4() -> Presentation:
    # rotation of order 4 and a reflection
    return presentation(
        2, [(1, 1, 1, 1), (2, 2), (1, 2, 1, 2)],
        PermModel([(1, 2, 3, 0), (3, 2, 1, 0)]))


# ---------------------------------------------------------------------------
# keys
# ---------------------------------------------------------------------------

@dataclass
class HomPublicKey:
    presentation: Presentation
    x_words: tuple       # k letter-tuples over Y
    f_table: tuple       # index into x_words -> Y generator index (0-based)


@dataclass
class HomSecretKey:
    sigma: tuple         # permutation of 0..k-1


def phi_apply(sigma: tuple, w: FreeWord) -> FreeWord:
    """The free-group automorphism induced by the generator permutation."""
    return FreeWord(w.k, tuple(
        (sigma[x - 1] + 1) if x > 0 else -(sigma[-x - 1] + 1)
        for x in w.letters))


def sample_relator(pres: Presentation, target_length: int, seed: int) -> FreeWord:
    """A freely reduced product of conjugated relators w^-1 r^+-1 w.

    The reduced length never exceeds 4 * target_length; with no relations the
    result is always the empty word.
    """
    rng = Rng(seed)
    out = FreeWord(pres.k, ())
    if not pres.relations or target_length <= 0:
        return out
    bound = 4 * target_length
    pieces = rng.randint(1, 3)
    for _ in range(pieces):
        r = rng.choice(pres.relations)
        if rng.chance(0.5):
            r = fw_inv(r)
        clen = rng.randint(0, max(0, target_length // 2))
        conj = []
        for _ in range(clen):
            g = rng.randint(1, pres.k)
            conj.append(g if rng.chance(0.5) else -g)
        w = FreeWord(pres.k, tuple(conj))
        cand = fw_mul(out, fw_mul(fw_mul(fw_inv(w), r), w))
        if len(cand) > bound:
            break
        out = cand
    return out


def assemble_keypair(pres: Presentation, sigma: tuple, paddings):
    """Deterministic key assembly from explicit sigma and relator paddings.

    paddings[i] = (r letters, r' letters) for generator i; the public word
    for y_i is phi_sigma^-1(r * y_i * r').
    """
    k = pres.k
    sigma = tuple(sigma)
    if sorted(sigma) != list(range(k)):
        raise DegenerateKey("sigma is not a permutation")
    sigma_inv = tuple(_perm_inv(sigma))
    x_words = []
    for i in range(k):
        r, rp = paddings[i]
        w = fw_mul(fw_mul(FreeWord(k, tuple(r)), FreeWord(k, (i + 1,))),
                   FreeWord(k, tuple(rp)))
        x = phi_apply(sigma_inv, w)
        if x.is_empty():
            raise DegenerateKey(f"public word for generator {i + 1} is empty")
        x_words.append(x.letters)
    if len(set(x_words)) != k:
        raise DegenerateKey("public words collide")
    return (HomPublicKey(pres, tuple(x_words), tuple(range(k))),
            HomSecretKey(sigma))


def hc_keygen(pres: Presentation, seed: int):
    """Random keypair; resamples degenerate paddings a bounded number of times."""
    rng = Rng(seed)
    sigma = tuple(rng.shuffle(list(range(pres.k))))
    for _ in range(KEYGEN_RETRIES):
        paddings = []
        for _i in range(pres.k):
            length = rng.randint(pres.k, 2 * pres.k)
            r = sample_relator(pres, length, rng.fork(1).seed)
            rp = sample_relator(pres, length, rng.fork(2).seed)
            paddings.append((r.letters, rp.letters))
        try:
            pk, sk = assemble_keypair(pres, sigma, paddings)
        except DegenerateKey:
            continue
        # shuffle the published order of the x-words
        order = rng.shuffle(list(range(pres.k)))
        pk.x_words = tuple(pk.x_words[i] for i in order)
        pk.f_table = tuple(order)
        return pk, sk
    raise DegenerateKey(f"no usable paddings after {KEYGEN_RETRIES} attempts")


def f_inverse_word(pk: HomPublicKey, w: FreeWord) -> FreeWord:
    """Replace every Y letter by its public x-word (sign-respecting)."""
    k = pk.presentation.k
    back = [None] * k
    for idx, y in enumerate(pk.f_table):
        back[y] = FreeWord(k, pk.x_words[idx])
    out = FreeWord(k, ())
    for x in w.letters:
        piece = back[abs(x) - 1]
        out = fw_mul(out, piece if x > 0 else fw_inv(piece))
    return out


def hc_encrypt(pk: HomPublicKey, message: FreeWord, seed: int,
               pad_length: int | None = None) -> FreeWord:
    """E(M): pad every letter with relator products, then pull back through f.

    pad_length overrides the default target length (drawn uniformly from
    [k, 2k]) of each sampled relator product; shorter paddings keep
    ciphertexts within reach of the bounded coset attack in tests.
    """
    k = pk.presentation.k
    if any(abs(x) > k for x in message.letters):
        raise IndexOutOfRange("message letter outside the alphabet")
    rng = Rng(seed)
    out = FreeWord(k, ())
    for x in message.letters:
        length = pad_length if pad_length is not None else rng.randint(k, 2 * k)
        s = sample_relator(pk.presentation, length, rng.fork(1).seed)
        sp = sample_relator(pk.presentation, length, rng.fork(2).seed)
        chunk = fw_mul(fw_mul(s, FreeWord(k, (x,))), sp)
        out = fw_mul(out, f_inverse_word(pk, chunk))
    return out


def hc_decrypt(sk: HomSecretKey, cipher: FreeWord) -> FreeWord:
    """D(C): the letterwise sigma image (a homomorphism onto H)."""
    return phi_apply(sk.sigma, cipher)
