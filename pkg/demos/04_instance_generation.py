#!/usr/bin/env python3
"""Trapdoored instance generation from secret derivation trees.

The secret key is a labeled tree: base groups at the leaves, group
operations at the internal nodes.  Evaluating it yields the public key -- a
generator list for a matrix group over a finite ring.  The integer-factoring
example lives here: a two-leaf tree over Z_15 whose decomposition reveals
the factors 3 and 5.
"""

import warnings

from matcrypt.analysis import enumerate_group
from matcrypt.cli import tree_to_obj
from matcrypt.instance import (
    base_special_linear,
    base_unipotent,
    direct_same_degree,
    leaf,
    leaf_embed,
    subgroup_sample,
    tensor,
    tree_eval,
    tree_random,
    tree_size,
    wreath_imprimitive,
)
from matcrypt.matrix import int_rows, matrix
from matcrypt.ring import Zmod
from matcrypt.serialize import dumps, fingerprint

warnings.simplefilter("ignore")

print("=== the factoring instance over Z_15 ===")
t = direct_same_degree(leaf(base_unipotent(3)), leaf(base_unipotent(5)))
inst = tree_eval(t)
print("public generators:", [int_rows(g) for g in inst.gens])
print("group order:", len(enumerate_group(list(inst.gens), 100)))
print("the tree (the secret) knows the factorization; the ring Z_15 alone",
      "\ndoes not reveal which summand each generator lives on.")

h = matrix(Zmod(3), [[1, 2], [0, 1]])
print("\nembedding [[1,2],[0,1]] from the 3-leaf:",
      int_rows(leaf_embed(t, 0, h)))

print("\n=== a composite tree ===")
t2 = wreath_imprimitive(tensor(leaf(base_unipotent(3)),
                               leaf(base_special_linear(2, 3))), 2)
inst2 = tree_eval(t2)
print(f"degree {inst2.n} over a ring of order {inst2.ring.order},"
      f" {len(inst2.gens)} generators, tree size L(T) = {tree_size(t2)}")

print("\n=== random instances are deterministic in the seed ===")
for seed in (1, 2, 3):
    tr = tree_random(60, seed)
    fp = fingerprint(tree_to_obj(tr))
    ir = tree_eval(tr)
    print(f"seed {seed}: degree {ir.n:2d}, ring order {ir.ring.order:6d}, "
          f"secret fingerprint {fp[:16]}...")

print("\n=== subgroup sampling for the commutator protocol ===")
gens_a, gens_b = subgroup_sample(t2, seed=5)
print(f"sampled {len(gens_a)} + {len(gens_b)} generators from leaf images")
