"""CLI: subcommands, exit codes, file round trips, determinism."""

import json
import warnings

from matcrypt.cli import main, tree_from_obj, tree_to_obj

warnings.simplefilter("ignore")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_version(capsys):
    code, out, _ = run(capsys, "version")
    assert code == 0
    from matcrypt import __version__
    assert out.strip() == __version__


def test_usage_error(capsys):
    assert main(["nonsense"]) == 2
    capsys.readouterr()
    assert main([]) == 2
    capsys.readouterr()


def test_gen_member_pipeline(tmp_path, capsys):
    pub, sec = tmp_path / "pub.json", tmp_path / "sec.json"
    elem = tmp_path / "elem.json"
    wit = tmp_path / "wit.json"
    code, out, _ = run(capsys, "gen", "--size", "40", "--seed", "7",
                       "--pub", str(pub), "--sec", str(sec),
                       "--sample", str(elem))
    assert code == 0
    assert "secret fingerprint" in out and "public fingerprint" in out
    code, out, _ = run(capsys, "member", "--sec", str(sec),
                       "--elem", str(elem), "--witness", str(wit))
    assert code == 0
    assert out.startswith("yes")
    assert wit.exists()


def test_gen_determinism(tmp_path, capsys):
    files = []
    for tag in ("a", "b"):
        pub = tmp_path / f"pub{tag}.json"
        sec = tmp_path / f"sec{tag}.json"
        code, _, _ = run(capsys, "gen", "--size", "50", "--seed", "9",
                         "--pub", str(pub), "--sec", str(sec))
        assert code == 0
        files.append((pub.read_bytes(), sec.read_bytes()))
    assert files[0] == files[1]


def test_secret_file_roundtrip(tmp_path, capsys):
    sec = tmp_path / "sec.json"
    pub = tmp_path / "pub.json"
    run(capsys, "gen", "--size", "45", "--seed", "3",
        "--pub", str(pub), "--sec", str(sec))
    obj = json.loads(sec.read_text())
    t = tree_from_obj(obj)
    assert tree_to_obj(t) == obj


def test_ltp_pipeline(tmp_path, capsys):
    from matcrypt.instance import tree_eval
    from matcrypt.serialize import dumps, vector_to_obj
    from matcrypt.trapdoor import sample_transportable_vector
    from matcrypt.matrix import vector_act
    from matcrypt.rng import Rng
    sec = tmp_path / "sec.json"
    pub = tmp_path / "pub.json"
    run(capsys, "gen", "--size", "40", "--seed", "12",
        "--pub", str(pub), "--sec", str(sec))
    t = tree_from_obj(json.loads(sec.read_text()))
    inst = tree_eval(t)
    rng = Rng(5)
    u = sample_transportable_vector(t, rng)
    v = vector_act(u, inst.gens[0])
    (tmp_path / "u.json").write_text(dumps(vector_to_obj(inst.ring, u)))
    (tmp_path / "v.json").write_text(dumps(vector_to_obj(inst.ring, v)))
    code, out, _ = run(capsys, "ltp", "--sec", str(sec),
                       "--u", str(tmp_path / "u.json"),
                       "--v", str(tmp_path / "v.json"),
                       "--out", str(tmp_path / "g.json"))
    assert code == 0
    assert "transporter fingerprint" in out or "no-solution" in out


def test_protocol_commands(tmp_path, capsys):
    code, out, _ = run(capsys, "aag", "--seed", "3", "--size", "30",
                       "--transcript", str(tmp_path / "tr.json"))
    assert code == 0 and "key fingerprint" in out
    assert (tmp_path / "tr.json").exists()
    code, out, _ = run(capsys, "mparty", "--parties", "4", "--seed", "3",
                       "--size", "30")
    assert code == 0 and "op counts" in out
    code, out, _ = run(capsys, "gdh", "--mode", "dh", "--p", "101",
                       "--seed", "5")
    assert code == 0 and out.startswith("key ")
    code, out, _ = run(capsys, "gdh", "--mode", "matrix", "--p", "5",
                       "--seed", "5")
    assert code == 0 and "key fingerprint" in out


def test_hom_pipeline(tmp_path, capsys):
    pub, sec = tmp_path / "hp.json", tmp_path / "hs.json"
    cipher = tmp_path / "c.json"
    code, out, _ = run(capsys, "hom", "keygen", "--preset", "klein4",
                       "--seed", "3", "--pub", str(pub), "--sec", str(sec))
    assert code == 0
    code, out, _ = run(capsys, "hom", "encrypt", "--pub", str(pub),
                       "--message", "1,2", "--seed", "1", "--out", str(cipher))
    assert code == 0
    code, out, _ = run(capsys, "hom", "decrypt", "--sec", str(sec),
                       "--cipher", str(cipher))
    assert code == 0 and out.startswith("plaintext word")
    # decryption agrees with the library
    from matcrypt.homcrypt import HomSecretKey, hc_decrypt, klein_four
    from matcrypt.words import FreeWord
    pres = klein_four()
    sk = HomSecretKey(tuple(json.loads(sec.read_text())["sigma"]))
    c = FreeWord(2, tuple(json.loads(cipher.read_text())))
    want = pres.model.eval_key(hc_decrypt(sk, c))
    assert want == pres.model.eval_key(FreeWord(2, (1, 2)))


def test_hom_cipher_deterministic(tmp_path, capsys):
    pub, sec = tmp_path / "hp.json", tmp_path / "hs.json"
    run(capsys, "hom", "keygen", "--preset", "s3", "--seed", "4",
        "--pub", str(pub), "--sec", str(sec))
    blobs = []
    for tag in ("x", "y"):
        out = tmp_path / f"c{tag}.json"
        run(capsys, "hom", "encrypt", "--pub", str(pub), "--message", "1,-2",
            "--seed", "9", "--out", str(out))
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1]


def test_attack_commands(tmp_path, capsys):
    code, out, _ = run(capsys, "attack", "scsp", "--q", "17", "--seed", "2")
    assert code == 0 and "conjugator fingerprint" in out
    code, out, _ = run(capsys, "attack", "linearity", "--seed", "2")
    assert code == 0 and "verified" in out
    pub, sec = tmp_path / "hp.json", tmp_path / "hs.json"
    cipher = tmp_path / "c.json"
    run(capsys, "hom", "keygen", "--preset", "klein4", "--seed", "3",
        "--pub", str(pub), "--sec", str(sec))
    run(capsys, "hom", "encrypt", "--pub", str(pub), "--message", "1",
        "--seed", "1", "--pad-length", "1", "--out", str(cipher))
    code, out, _ = run(capsys, "attack", "coset", "--pub", str(pub),
                       "--cipher", str(cipher), "--bound", "11")
    assert code == 0 and "plaintext model element" in out


def test_oracle_commands(tmp_path, capsys):
    pub, sec = tmp_path / "pub.json", tmp_path / "sec.json"
    elem = tmp_path / "elem.json"
    run(capsys, "gen", "--size", "40", "--seed", "7", "--pub", str(pub),
        "--sec", str(sec), "--sample", str(elem))
    code, out, _ = run(capsys, "oracle", "enum", "--sec", str(sec),
                       "--cap", "100000")
    assert code == 0 and out.startswith("order ")
    code, out, _ = run(capsys, "oracle", "solve", "--problem", "membership",
                       "--sec", str(sec), "--elem", str(elem),
                       "--cap", "100000")
    assert code == 0 and out.strip() == "yes"


def test_domain_error_exit_code(tmp_path, capsys):
    code, _, err = run(capsys, "member", "--sec", str(tmp_path / "no.json"),
                       "--elem", str(tmp_path / "no2.json"))
    assert code == 1


def test_every_written_file_reparses_canonically(tmp_path, capsys):
    from matcrypt.serialize import dumps
    files = {
        "pub": tmp_path / "pub.json", "sec": tmp_path / "sec.json",
        "elem": tmp_path / "elem.json", "wit": tmp_path / "wit.json",
        "tr": tmp_path / "tr.json", "hpub": tmp_path / "hp.json",
        "hsec": tmp_path / "hs.json", "cipher": tmp_path / "c.json",
    }
    run(capsys, "gen", "--size", "45", "--seed", "5", "--pub",
        str(files["pub"]), "--sec", str(files["sec"]),
        "--sample", str(files["elem"]))
    run(capsys, "member", "--sec", str(files["sec"]),
        "--elem", str(files["elem"]), "--witness", str(files["wit"]))
    run(capsys, "aag", "--seed", "2", "--size", "30",
        "--transcript", str(files["tr"]))
    run(capsys, "hom", "keygen", "--preset", "d4", "--seed", "2",
        "--pub", str(files["hpub"]), "--sec", str(files["hsec"]))
    run(capsys, "hom", "encrypt", "--pub", str(files["hpub"]),
        "--message", "2,-1", "--seed", "3", "--out", str(files["cipher"]))
    for name, path in files.items():
        raw = path.read_text()
        assert dumps(json.loads(raw)) == raw, name
