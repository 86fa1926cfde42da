#!/usr/bin/env python3
"""The three key-agreement simulations.

Two-party commutator exchange, its multi-party extension over a single
public channel, and the identity-word protocol that degenerates to classical
Diffie-Hellman over Z_p^*.
"""

import warnings

from matcrypt.matrix import int_rows, matrix, vector
from matcrypt.protocol import (
    AagConfig,
    GdhConfig,
    MatrixAction,
    PowerAction,
    aag_run,
    gdh_run,
    multiparty_run,
)
from matcrypt.ring import Zmod
from matcrypt.words import build_solvable_pair

warnings.simplefilter("ignore")

z5 = Zmod(5)
A = matrix(z5, [[1, 1], [0, 1]])
B = matrix(z5, [[1, 0], [1, 1]])

print("=== two-party commutator exchange over GL(2, Z_5) ===")
key_a, key_b, transcript = aag_run(AagConfig([A], [B], [1], [1]))
print("key on both sides:", int_rows(key_a), "equal:", key_a == key_b)
print("public channel carried", len(transcript.records),
      "conjugated generator lists")

print("\n=== multi-party extension ===")
z7 = Zmod(7)
gens = [matrix(z7, [[1, 1], [0, 1]]), matrix(z7, [[1, 0], [1, 1]])]
for s in (2, 4, 8):
    configs = [(gens, [1 + (i % 2), -1 - ((i + 1) % 2)]) for i in range(s)]
    keys, tr, ops = multiparty_run(s, configs, seed=1)
    agree = all(k == keys[0] for k in keys)
    worst = max(op["compute"] for op in ops)
    print(f"s={s}: all {s} keys agree: {agree}; "
          f"messages: {len(tr.records)}; worst compute ops: {worst}")

print("\n=== identity-word protocol: Diffie-Hellman specialization ===")
act = PowerAction(7, 3)
pair = build_solvable_pair(1)
ka, kb, _ = gdh_run(GdhConfig(act, pair, 5, 5))
print(f"p=7, x0=3, secrets 5/5: shared key {ka} "
      f"(exponent 25 = 1 mod 6, so 3^1 = 3)")

print("\n=== identity-word protocol on a metabelian matrix action ===")
mgens = [matrix(z5, [[2, 1], [0, 1]]), matrix(z5, [[1, 1], [0, 3]])]
mact = MatrixAction(mgens, mgens, vector(z5, [1, 2]))
pair2 = build_solvable_pair(2)
ka, kb, _ = gdh_run(GdhConfig(mact, pair2, [1, 2, -1], [2, 2, 1]))
print("keys agree:", mact.key_of(ka) == mact.key_of(kb),
      "- key point:", [z5.to_int(e) for e in ka])
