#!/usr/bin/env python3
"""Identity word pairs: the engine of the generalized key agreement.

Shows the commutator recursion for solvable groups (letter count 2*4^(n-1)),
the exponent-identity variant, and validation against matrix groups.
"""

import warnings

from matcrypt.matrix import matrix
from matcrypt.ring import Zmod
from matcrypt.words import (
    build_exponent_pair,
    build_solvable_pair,
    satisfies_w1,
    validate_pair,
)

warnings.simplefilter("ignore")

print("=== commutator pairs W_A,n / W_B,n ===")
for n in range(1, 6):
    pair = build_solvable_pair(n)
    print(f"n={n}: {len(pair.wa):4d} letters,"
          f" strict terminal condition: {satisfies_w1(pair)}")

pair2 = build_solvable_pair(2)
print("\nW_A,2 =", pair2.wa.letters)
print("schedule of W_A,2:", pair2.schedule_a)

print("\n=== exponent-identity pairs from x^m = 1 ===")
for m in (1, 3, 5):
    p = build_exponent_pair(m)
    print(f"m={m}: wa = {p.wa.letters}, wb = {p.wb.letters}")

print("\n=== validation on the upper-triangular (metabelian) group ===")
z5 = Zmod(5)
gens = [matrix(z5, [[2, 1], [0, 1]]), matrix(z5, [[1, 1], [0, 3]])]
rep = validate_pair(pair2, gens, gens, trials=60, seed=7)
print(f"(W1) {rep.w1_ok}, (W2) holds on {rep.trials} samples: {rep.w2_ok},"
      f" distinct key values: {rep.distinct_keys}")

print("\n=== the abelian pair fails on a nonabelian group ===")
nonab = [matrix(z5, [[1, 1], [0, 1]]), matrix(z5, [[1, 0], [1, 1]])]
rep1 = validate_pair(build_solvable_pair(1), nonab, nonab, trials=60, seed=7)
print("(W2) on free nonabelian generators:", rep1.w2_ok,
      "- counterexample found" if rep1.counterexample else "")
