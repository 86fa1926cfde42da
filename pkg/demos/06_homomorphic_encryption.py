#!/usr/bin/env python3
"""The free-group homomorphic cryptosystem.

Plaintexts are words in a finitely presented group H; ciphertexts live in a
hidden free-group subgroup.  Decryption is a letterwise generator
permutation -- a group homomorphism, so products of ciphertexts decrypt to
products of plaintexts.
"""

from matcrypt.homcrypt import (
    assemble_keypair,
    hc_decrypt,
    hc_encrypt,
    hc_keygen,
    klein_four,
    sym3,
)
from matcrypt.words import FreeWord, fw, fw_mul

print("=== key generation over the Klein four group ===")
pres = klein_four()
pk, sk = hc_keygen(pres, seed=2024)
print("public generator words:", pk.x_words)
print("public bijection f (x-word index -> generator):", pk.f_table)
print("secret permutation sigma:", sk.sigma)

print("\n=== encrypt / decrypt ===")
msg = fw(2, [1, 2, -1])
cipher = hc_encrypt(pk, msg, seed=7)
plain = hc_decrypt(sk, cipher)
print(f"message {msg.letters} -> ciphertext of {len(cipher)} letters")
print("decrypted word:", plain.letters[:12], "...")
print("equal in H:", pres.model.eval_key(plain) == pres.model.eval_key(msg))

print("\n=== the homomorphic property ===")
m1, m2 = fw(2, [1]), fw(2, [2, 1])
c1 = hc_encrypt(pk, m1, seed=1)
c2 = hc_encrypt(pk, m2, seed=2)
d = hc_decrypt(sk, fw_mul(c1, c2))
print("D(E(m1) * E(m2)) = m1 * m2 in H:",
      pres.model.eval_key(d) == pres.model.eval_key(fw_mul(m1, m2)))

print("\n=== a worked small key (explicit paddings) ===")
pk0, sk0 = assemble_keypair(pres, (1, 0), [((1, 1), ()), ((), (2, 2))])
print("sigma = swap; paddings y1^2 and y2^2 give x-words:", pk0.x_words)
c0 = hc_encrypt(pk0, FreeWord(2, (1,)), seed=0, pad_length=0)
print("unpadded encryption of y1:", c0.letters, "-> decrypts to",
      hc_decrypt(sk0, c0).letters)

print("\n=== over S_3 ===")
pres3 = sym3()
pk3, sk3 = hc_keygen(pres3, seed=5)
ok = all(
    pres3.model.eval_key(hc_decrypt(sk3, hc_encrypt(pk3, FreeWord(2, w), seed=s)))
    == pres3.model.eval_key(FreeWord(2, w))
    for s, w in enumerate([(1,), (2,), (1, 2), (2, -1, 2)]))
print("round trips over S_3:", ok)
