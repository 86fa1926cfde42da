"""Command-line front end.

One binary, subcommand style; every randomized operation takes an explicit
--seed (absence means seed 0), so identical invocations produce byte-identical
artifacts.  Exit codes: 0 success, 1 domain failure (the message names the
failing error), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .errors import MatcryptError
from .rng import Rng


def _write(path: str, obj) -> None:
    from .serialize import dumps
    with open(path, "w") as fh:
        fh.write(dumps(obj))


def _read(path: str):
    with open(path) as fh:
        return json.load(fh)


def _fingerprint(obj) -> str:
    from .serialize import fingerprint
    return fingerprint(obj)


# --- tree / instance file formats -------------------------------------------

def tree_to_obj(t) -> dict:
    from .serialize import ring_to_obj
    if t.is_leaf():
        return {"leaf": {"kind": t.base.kind,
                         "params": _params_obj(t.base.params)}}
    lab = t.label
    out = {"op": {"kind": lab.kind}}
    if lab.m:
        out["op"]["m"] = lab.m
    if lab.d:
        out["op"]["d"] = lab.d
    if lab.kind == "conjugate":
        out["op"]["seed"] = lab.seed
    if lab.target is not None:
        out["op"]["target"] = ring_to_obj(lab.target)
    out["children"] = [tree_to_obj(c) for c in t.children]
    return out


def _params_obj(params) -> list:
    return [list(p) if isinstance(p, tuple) else p for p in params]


def tree_from_obj(obj: dict):
    from .instance import BaseGroupSpec, DerivationTree, OpLabel
    from .serialize import ring_from_obj
    if "leaf" in obj:
        raw = obj["leaf"]
        params = tuple(tuple(p) if isinstance(p, list) else p
                       for p in raw["params"])
        return DerivationTree(base=BaseGroupSpec(raw["kind"], params))
    raw = obj["op"]
    label = OpLabel(raw["kind"], m=raw.get("m", 0), d=raw.get("d", 0),
                    seed=raw.get("seed", 0),
                    target=ring_from_obj(raw["target"]) if "target" in raw else None)
    children = tuple(tree_from_obj(c) for c in obj["children"])
    return DerivationTree(label=label, children=children)


def instance_to_obj(inst) -> dict:
    from .serialize import matrix_to_obj, ring_to_obj
    return {"n": inst.n, "ring": ring_to_obj(inst.ring),
            "gens": [matrix_to_obj(g) for g in inst.gens]}


def homspec_to_obj(h) -> dict:
    """Secret-key file with a homomorphism: the tree plus per-leaf choices."""
    return {"tree": tree_to_obj(h.tree),
            "choices": [list(c) for c in h.choices]}


def homspec_from_obj(obj: dict):
    from .instance import hom_build
    t = tree_from_obj(obj["tree"])
    return hom_build(t, [tuple(c) for c in obj["choices"]])


# --- subcommands --------------------------------------------------------------

def cmd_version(args) -> int:
    print(__version__)
    return 0


def cmd_gen(args) -> int:
    from .instance import (leaf_embed, leaf_random, tree_eval, tree_leaves,
                           tree_random)
    t = tree_random(args.size, args.seed)
    inst = tree_eval(t)
    sec_obj = tree_to_obj(t)
    pub_obj = instance_to_obj(inst)
    _write(args.sec, sec_obj)
    _write(args.pub, pub_obj)
    print(f"secret fingerprint {_fingerprint(sec_obj)}")
    print(f"public fingerprint {_fingerprint(pub_obj)}")
    if args.sample:
        rng = Rng(args.seed ^ 0xA5A5)
        specs = tree_leaves(t)
        lid = rng.below(len(specs))
        elem = leaf_embed(t, lid, leaf_random(specs[lid], rng))
        from .serialize import matrix_to_obj
        _write(args.sample, matrix_to_obj(elem))
        print(f"sample element written to {args.sample}")
    return 0


def cmd_member(args) -> int:
    from .serialize import matrix_from_obj
    from .trapdoor import membership
    t = tree_from_obj(_read(args.sec))
    g = matrix_from_obj(_read(args.elem))
    verdict = membership(t, g)
    print("yes" if verdict.accepted else "no")
    if verdict.accepted and args.witness:
        _write(args.witness, _witness_obj(verdict.witness))
        print(f"witness written to {args.witness}")
    return 0


def _witness_obj(wit):
    from .serialize import matrix_to_obj
    kind = wit[0]
    if kind == "leaf":
        return {"leaf": matrix_to_obj(wit[1])}
    if kind in ("conjugate", "ring"):
        return {kind: _witness_obj(wit[1])}
    if kind in ("crt", "tensor"):
        return {kind: [_witness_obj(w) for w in wit[1]]}
    if kind == "wreath":
        return {"wreath": {"k": list(wit[1]),
                           "parts": [_witness_obj(w) for w in wit[2]]}}
    raise MatcryptError(f"unknown witness kind {kind!r}")


def cmd_ltp(args) -> int:
    from .serialize import matrix_to_obj, vector_from_obj
    from .trapdoor import NoSolution, ltp_solve
    t = tree_from_obj(_read(args.sec))
    u = vector_from_obj(_read(args.u))
    v = vector_from_obj(_read(args.v))
    res = ltp_solve(t, u, v)
    if isinstance(res, NoSolution):
        print("no-solution" + (" (certified)" if res.certified else " (not found)"))
        return 0
    obj = matrix_to_obj(res)
    if args.out:
        _write(args.out, obj)
    print(f"transporter fingerprint {_fingerprint(obj)}")
    return 0


def _random_instance_config(size: int, seed: int):
    from .instance import subgroup_sample, tree_eval, tree_random
    rng = Rng(seed)
    t = tree_random(size, rng.fork(1).seed)
    gens_a, gens_b = subgroup_sample(t, rng.fork(2).seed)
    return t, gens_a, gens_b, rng


def _random_word(rng: Rng, n_gens: int, max_len: int = 6) -> list:
    out = []
    for _ in range(rng.randint(1, max_len)):
        i = rng.randint(1, n_gens)
        out.append(i if rng.chance(0.5) else -i)
    return out


def cmd_aag(args) -> int:
    from .protocol import AagConfig, aag_run
    from .serialize import matrix_to_obj
    t, gens_a, gens_b, rng = _random_instance_config(args.size, args.seed)
    cfg = AagConfig(gens_a, gens_b,
                    _random_word(rng, len(gens_a)), _random_word(rng, len(gens_b)))
    key_a, key_b, transcript = aag_run(cfg)
    assert key_a == key_b
    print(f"key fingerprint {_fingerprint(matrix_to_obj(key_a))}")
    if args.transcript:
        _write(args.transcript, transcript.to_obj())
    return 0


def cmd_mparty(args) -> int:
    from .protocol import multiparty_run
    from .serialize import matrix_to_obj
    t, gens_a, gens_b, rng = _random_instance_config(args.size, args.seed)
    gens = gens_a + gens_b
    configs = [(gens, _random_word(rng, len(gens))) for _ in range(args.parties)]
    keys, transcript, ops = multiparty_run(args.parties, configs, args.seed)
    assert all(k == keys[0] for k in keys)
    print(f"key fingerprint {_fingerprint(matrix_to_obj(keys[0]))}")
    print(f"op counts {json.dumps(ops, separators=(',', ':'))}")
    if args.transcript:
        _write(args.transcript, transcript.to_obj())
    return 0


def cmd_gdh(args) -> int:
    from .protocol import GdhConfig, MatrixAction, PowerAction, gdh_run
    from .words import build_solvable_pair
    rng = Rng(args.seed)
    if args.mode == "dh":
        p = args.p
        pair = build_solvable_pair(1)
        act = PowerAction(p, 2 + rng.below(p - 3))
        sa = _random_unit(rng, p - 1)
        sb = _random_unit(rng, p - 1)
        key_a, key_b, transcript = gdh_run(GdhConfig(act, pair, sa, sb))
        print(f"key {key_a}")
    else:
        from .matrix import matrix, vector
        from .ring import Zmod
        zp = Zmod(args.p)
        gens = [matrix(zp, [[2, 1], [0, 1]]), matrix(zp, [[1, 1], [0, 3]])]
        act = MatrixAction(gens, gens, vector(zp, [1, 2]))
        pair = build_solvable_pair(2)
        cfg = GdhConfig(act, pair, _random_word(rng, len(gens)),
                        _random_word(rng, len(gens)))
        key_a, key_b, transcript = gdh_run(cfg)
        from .serialize import vector_to_obj
        print(f"key fingerprint {_fingerprint(vector_to_obj(zp, key_a))}")
    if args.transcript:
        _write(args.transcript, transcript.to_obj())
    return 0


def _random_unit(rng: Rng, n: int) -> int:
    from math import gcd
    while True:
        x = 1 + rng.below(n - 1)
        if gcd(x, n) == 1:
            return x


def cmd_hom(args) -> int:
    from .homcrypt import (HomPublicKey, HomSecretKey, dihedral4,
                           hc_decrypt, hc_encrypt, hc_keygen, klein_four, sym3)
    from .words import FreeWord

    presets = {"klein4": klein_four, "s3": sym3, "d4": dihedral4}
    if args.hom_cmd == "keygen":
        pres = presets[args.preset]()
        pk, sk = hc_keygen(pres, args.seed)
        pub = {"preset": args.preset, "k": pres.k,
               "relations": [list(r.letters) for r in pres.relations],
               "x_words": [list(w) for w in pk.x_words],
               "f_table": list(pk.f_table)}
        sec = {"preset": args.preset, "sigma": list(sk.sigma)}
        _write(args.pub, pub)
        _write(args.sec, sec)
        print(f"public fingerprint {_fingerprint(pub)}")
        print(f"secret fingerprint {_fingerprint(sec)}")
        return 0
    if args.hom_cmd == "encrypt":
        raw = _read(args.pub)
        pres = presets[raw["preset"]]()
        pk = HomPublicKey(pres, tuple(tuple(w) for w in raw["x_words"]),
                          tuple(raw["f_table"]))
        msg = FreeWord(pres.k, tuple(int(x) for x in args.message.split(",")))
        cipher = hc_encrypt(pk, msg, args.seed, pad_length=args.pad_length)
        _write(args.out, list(cipher.letters))
        print(f"ciphertext fingerprint {_fingerprint(list(cipher.letters))}")
        return 0
    if args.hom_cmd == "decrypt":
        raw = _read(args.sec)
        pres = presets[raw["preset"]]()
        sk = HomSecretKey(tuple(raw["sigma"]))
        cipher = FreeWord(pres.k, tuple(_read(args.cipher)))
        plain = hc_decrypt(sk, cipher)
        if args.out:
            _write(args.out, list(plain.letters))
        print(f"plaintext word {','.join(str(x) for x in plain.letters) or 'empty'}")
        return 0
    raise MatcryptError(f"unknown hom subcommand {args.hom_cmd!r}")


def cmd_attack(args) -> int:
    if args.attack_cmd == "scsp":
        from .analysis import scsp_linear_attack
        from .instance import base_general_linear, leaf_generators
        from .matrix import is_invertible, mat_inv, mat_mul, matrix
        from .ring import Zmod
        rng = Rng(args.seed)
        ring = Zmod(args.q)

        def rand_gl():
            while True:
                m = matrix(ring, [[rng.below(args.q) for _ in range(args.n)]
                                  for _ in range(args.n)])
                if is_invertible(m):
                    return m
        g = rand_gl()
        h = rand_gl()
        f = mat_mul(mat_mul(mat_inv(h), g), h)
        gens = leaf_generators(base_general_linear(args.n, args.q))
        report = scsp_linear_attack(args.n, args.q, gens, f, g, args.seed)
        from .serialize import matrix_to_obj
        print(f"conjugator fingerprint {_fingerprint(matrix_to_obj(report.h))}")
        print(f"span dimension {report.span_dim}, draws {report.draws}")
        return 0
    if args.attack_cmd == "linearity":
        from .analysis import INCONCLUSIVE, linearity_attack
        from .instance import base_general_linear, leaf_generators
        from .matrix import is_invertible, mat_inv, mat_mul, matrix
        from .ring import Zmod
        rng = Rng(args.seed)
        ring = Zmod(args.q)
        gens = leaf_generators(base_general_linear(2, args.q))
        while True:
            c = matrix(ring, [[rng.below(args.q) for _ in range(2)]
                              for _ in range(2)])
            if is_invertible(c):
                break
        cinv = mat_inv(c)
        images = [mat_mul(mat_mul(cinv, g), c) for g in gens]
        while True:
            q = matrix(ring, [[rng.below(args.q) for _ in range(2)]
                              for _ in range(2)])
            if is_invertible(q):
                break
        report = linearity_attack(gens, images, q)
        truth = mat_mul(mat_mul(cinv, q), c)
        verdict = "inconclusive" if report.prediction == INCONCLUSIVE else \
            ("verified" if report.prediction == truth else "wrong")
        print(f"prediction {verdict}; span dimension {report.span_dim}; "
              f"consistent {report.consistent}")
        return 0
    if args.attack_cmd == "coset":
        from .analysis import INCONCLUSIVE, coset_attack
        from .homcrypt import HomPublicKey, dihedral4, klein_four, sym3
        from .words import FreeWord
        presets = {"klein4": klein_four, "s3": sym3, "d4": dihedral4}
        raw = _read(args.pub)
        pres = presets[raw["preset"]]()
        pk = HomPublicKey(pres, tuple(tuple(w) for w in raw["x_words"]),
                          tuple(raw["f_table"]))
        attack = coset_attack(pk, pres.model, args.bound)
        cipher = FreeWord(pres.k, tuple(_read(args.cipher)))
        got = attack.decrypt(cipher)
        if got == INCONCLUSIVE:
            print("inconclusive")
        else:
            print(f"plaintext model element {json.dumps(list(got))}")
        print(f"table size {len(attack.table)}")
        return 0
    raise MatcryptError(f"unknown attack {args.attack_cmd!r}")


def cmd_oracle(args) -> int:
    from .analysis import enumerate_group, oracle_solve
    from .instance import tree_eval
    t = tree_from_obj(_read(args.sec))
    inst = tree_eval(t)
    enum = enumerate_group(list(inst.gens), args.cap)
    if args.oracle_cmd == "enum":
        print(f"order {len(enum)}")
        return 0
    if args.oracle_cmd == "solve":
        from .serialize import matrix_from_obj, vector_from_obj
        if args.problem == "membership":
            g = matrix_from_obj(_read(args.elem))
            ok, wit = oracle_solve("membership", enum, g)
            print("yes" if ok else "no")
        elif args.problem == "ltp":
            u = vector_from_obj(_read(args.u))
            v = vector_from_obj(_read(args.v))
            ok, wit = oracle_solve("ltp", enum, (u, v))
            print("solvable" if ok else "no-solution (certified)")
        elif args.problem == "conjugacy":
            f = matrix_from_obj(_read(args.f))
            g = matrix_from_obj(_read(args.g))
            ok, wit = oracle_solve("conjugacy", enum, (f, g))
            print("conjugate" if ok else "not-conjugate")
        return 0
    raise MatcryptError(f"unknown oracle subcommand {args.oracle_cmd!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="matcrypt")
    sub = ap.add_subparsers(dest="cmd", required=True)

    sub.add_parser("version")

    p = sub.add_parser("gen", help="generate a trapdoored instance")
    p.add_argument("--size", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pub", required=True)
    p.add_argument("--sec", required=True)
    p.add_argument("--sample", default=None,
                   help="optionally write a sampled in-group element")

    p = sub.add_parser("member", help="trapdoor membership test")
    p.add_argument("--sec", required=True)
    p.add_argument("--elem", required=True)
    p.add_argument("--witness", default=None)

    p = sub.add_parser("ltp", help="trapdoor linear transporter")
    p.add_argument("--sec", required=True)
    p.add_argument("--u", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("aag", help="two-party commutator key agreement")
    p.add_argument("--size", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--transcript", default=None)

    p = sub.add_parser("mparty", help="multi-party key agreement")
    p.add_argument("--parties", type=int, default=4)
    p.add_argument("--size", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--transcript", default=None)

    p = sub.add_parser("gdh", help="identity-word key agreement")
    p.add_argument("--mode", choices=("dh", "matrix"), default="matrix")
    p.add_argument("--p", type=int, default=101)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--transcript", default=None)

    p = sub.add_parser("hom", help="homomorphic cryptosystem")
    hsub = p.add_subparsers(dest="hom_cmd", required=True)
    hk = hsub.add_parser("keygen")
    hk.add_argument("--preset", choices=("klein4", "s3", "d4"), default="klein4")
    hk.add_argument("--seed", type=int, default=0)
    hk.add_argument("--pub", required=True)
    hk.add_argument("--sec", required=True)
    he = hsub.add_parser("encrypt")
    he.add_argument("--pub", required=True)
    he.add_argument("--message", required=True,
                    help="comma-separated signed letters, e.g. 1,-2,1")
    he.add_argument("--seed", type=int, default=0)
    he.add_argument("--pad-length", type=int, default=None, dest="pad_length")
    he.add_argument("--out", required=True)
    hd = hsub.add_parser("decrypt")
    hd.add_argument("--sec", required=True)
    hd.add_argument("--cipher", required=True)
    hd.add_argument("--out", default=None)

    p = sub.add_parser("attack", help="attack experiments")
    asub = p.add_subparsers(dest="attack_cmd", required=True)
    a1 = asub.add_parser("scsp")
    a1.add_argument("--q", type=int, default=17)
    a1.add_argument("--n", type=int, default=2)
    a1.add_argument("--seed", type=int, default=0)
    a2 = asub.add_parser("linearity")
    a2.add_argument("--q", type=int, default=5)
    a2.add_argument("--seed", type=int, default=0)
    a3 = asub.add_parser("coset")
    a3.add_argument("--pub", required=True)
    a3.add_argument("--cipher", required=True)
    a3.add_argument("--bound", type=int, default=11)

    p = sub.add_parser("oracle", help="brute-force oracles")
    osub = p.add_subparsers(dest="oracle_cmd", required=True)
    o1 = osub.add_parser("enum")
    o1.add_argument("--sec", required=True)
    o1.add_argument("--cap", type=int, default=100000)
    o2 = osub.add_parser("solve")
    o2.add_argument("--problem", choices=("membership", "ltp", "conjugacy"),
                    required=True)
    o2.add_argument("--sec", required=True)
    o2.add_argument("--cap", type=int, default=100000)
    o2.add_argument("--elem")
    o2.add_argument("--u")
    o2.add_argument("--v")
    o2.add_argument("--f")
    o2.add_argument("--g")
    return ap


_COMMANDS = {
    "version": cmd_version,
    "gen": cmd_gen,
    "member": cmd_member,
    "ltp": cmd_ltp,
    "aag": cmd_aag,
    "mparty": cmd_mparty,
    "gdh": cmd_gdh,
    "hom": cmd_hom,
    "attack": cmd_attack,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return _COMMANDS[args.cmd](args)
    except MatcryptError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
