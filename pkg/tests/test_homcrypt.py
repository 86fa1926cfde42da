"""Free-group homomorphic cryptosystem."""

import pytest

from matcrypt.errors import DegenerateKey, IndexOutOfRange, ShapeMismatch
from matcrypt.homcrypt import (
    HomSecretKey,
    PermModel,
    assemble_keypair,
    dihedral4,
    f_inverse_word,
    hc_decrypt,
    hc_encrypt,
    hc_keygen,
    klein_four,
    phi_apply,
    presentation,
    sample_relator,
    sym3,
)
from matcrypt.rng import Rng
from matcrypt.words import FreeWord, fw, fw_mul

KLEIN = klein_four()
FIXTURES = [klein_four(), sym3(), dihedral4()]


def random_message(rng: Rng, k: int, max_len: int = 20) -> FreeWord:
    letters = []
    for _ in range(rng.randint(1, max_len)):
        g = rng.randint(1, k)
        letters.append(g if rng.chance(0.5) else -g)
    return FreeWord(k, tuple(letters))


def test_fixture_models():
    assert KLEIN.model.order() == 4
    assert sym3().model.order() == 6
    assert dihedral4().model.order() == 8


def test_presentation_rejects_bad_model():
    with pytest.raises(ShapeMismatch):
        presentation(2, [(1, 1, 1)], PermModel([(1, 0), (0, 1)]))


def test_sample_relator():
    # no relations: always the empty word
    free = presentation(2, [])
    for s in range(10):
        assert sample_relator(free, 5, s).is_empty()
    # normal-closure property: every sample evaluates to the model identity
    for s in range(40):
        w = sample_relator(KLEIN, 4, s)
        assert KLEIN.model.eval_key(w) == KLEIN.model.identity_key()
        assert len(w) <= 16
    assert sample_relator(KLEIN, 4, 9) == sample_relator(KLEIN, 4, 9)


def test_keygen_worked_example():
    # sigma = (y1 y2); r_y1 = y1^2, r'_y1 = empty; r_y2 = empty, r'_y2 = y2^2
    pk, sk = assemble_keypair(KLEIN, (1, 0), [((1, 1), ()), ((), (2, 2))])
    assert pk.x_words == ((2, 2, 2), (1, 1, 1))
    assert pk.f_table == (0, 1)  # f(y2^3) = y1, f(y1^3) = y2
    assert sk.sigma == (1, 0)


def test_keygen_trivial():
    # identity sigma and empty paddings: X = Y and f = identity
    pk, sk = assemble_keypair(KLEIN, (0, 1), [((), ()), ((), ())])
    assert pk.x_words == ((1,), (2,))
    msg = fw(2, [1, -2, 1])
    assert hc_encrypt(pk, msg, 0, pad_length=0) == msg
    assert hc_decrypt(sk, msg) == msg


def test_keygen_determinism_and_consistency():
    pk1, sk1 = hc_keygen(KLEIN, 42)
    pk2, sk2 = hc_keygen(KLEIN, 42)
    assert pk1.x_words == pk2.x_words and sk1.sigma == sk2.sigma
    # consistency invariant: phi_sigma(x_word) = r y r' with r, r' killed
    # by the model, so its image equals the image of y
    for idx, xw in enumerate(pk1.x_words):
        y = pk1.f_table[idx] + 1
        img = KLEIN.model.eval_key(phi_apply(sk1.sigma, FreeWord(2, xw)))
        assert img == KLEIN.model.eval_key(FreeWord(2, (y,)))


def test_keygen_degenerate():
    # r = y1^-1 collapses r * y1 * r' to the empty word
    with pytest.raises(DegenerateKey):
        assemble_keypair(KLEIN, (1, 0), [((-1,), ()), ((), ())])
    with pytest.raises(DegenerateKey):
        assemble_keypair(KLEIN, (0, 0), [((), ()), ((), ())])


def test_encrypt_worked_example():
    pk, sk = assemble_keypair(KLEIN, (1, 0), [((1, 1), ()), ((), (2, 2))])
    # one-letter message y1 padded with s = y1 y2 y1^-1 y2^-1, s' empty
    chunk = fw_mul(fw(2, [1, 2, -1, -2]), fw(2, [1]))
    cipher = f_inverse_word(pk, chunk)
    assert cipher.letters == (2, 2, 2, 1, 1, 1, -2, -2, -2, -1, -1, -1, 2, 2, 2)
    plain = hc_decrypt(sk, cipher)
    assert plain.letters == (1, 1, 1, 2, 2, 2, -1, -1, -1, -2, -2, -2, 1, 1, 1)
    assert KLEIN.model.eval_key(plain) == KLEIN.model.eval_key(fw(2, [1]))


def test_decrypt_letterwise():
    sk = HomSecretKey((1, 0))
    assert hc_decrypt(sk, fw(2, [1, 2])).letters == (2, 1)
    ident = HomSecretKey((0, 1))
    w = fw(2, [1, -2, 1])
    assert hc_decrypt(ident, w) == w


def test_encrypt_rejects_foreign_letters():
    pk, _ = hc_keygen(KLEIN, 1)
    with pytest.raises(IndexOutOfRange):
        hc_encrypt(pk, FreeWord(3, (3,)), 0)


@pytest.mark.parametrize("pres", FIXTURES,
                         ids=["klein4", "s3", "d4"])
def test_roundtrip(pres):
    pk, sk = hc_keygen(pres, 7)
    rng = Rng(123)
    for _ in range(60):
        msg = random_message(rng, pres.k)
        cipher = hc_encrypt(pk, msg, rng.below(1 << 30))
        plain = hc_decrypt(sk, cipher)
        assert pres.model.eval_key(plain) == pres.model.eval_key(msg)


@pytest.mark.parametrize("pres", FIXTURES, ids=["klein4", "s3", "d4"])
def test_homomorphic_property(pres):
    pk, sk = hc_keygen(pres, 9)
    rng = Rng(321)
    for _ in range(25):
        m1 = random_message(rng, pres.k, 8)
        m2 = random_message(rng, pres.k, 8)
        c1 = hc_encrypt(pk, m1, rng.below(1 << 30))
        c2 = hc_encrypt(pk, m2, rng.below(1 << 30))
        plain = hc_decrypt(sk, fw_mul(c1, c2))
        assert pres.model.eval_key(plain) == \
            pres.model.eval_key(fw_mul(m1, m2))


def test_ciphertext_length_linear():
    pk, _ = hc_keygen(KLEIN, 3)
    rng = Rng(55)
    k = KLEIN.k
    max_x = max(len(w) for w in pk.x_words)
    # |E(M)| <= |M| * (longest x-word) * (1 + two paddings of length <= 8k)
    bound_per_letter = max_x * (1 + 2 * 4 * 2 * k)
    for t in (1, 5, 10, 20):
        msg = random_message(rng, k, t)
        cipher = hc_encrypt(pk, msg, rng.below(1 << 30))
        assert len(cipher) <= bound_per_letter * len(msg)


def test_encrypt_determinism():
    pk, _ = hc_keygen(KLEIN, 5)
    msg = fw(2, [1, 2, -1])
    assert hc_encrypt(pk, msg, 77) == hc_encrypt(pk, msg, 77)
