"""Instance-file ingestion and the command line front end."""

import json
import shutil
import subprocess

import pytest

from algebroids import cli, instances, zoo
from algebroids.bundles import Section
from algebroids.instances import InstanceError

TRIPLE_FILE = """\
# abelian triple: U = the TM* block of TM+TM*, zero Dorfman table
[patch]
coords = x, y

[subbundle.U]
ambient = TM+TM*
0 = 0, 0, 1, 0
1 = 0, 0, 0, 1

[dorfman.D]
algebroid = TM

[triple]
algebroid = TM
u = U
dorfman = D
"""

FAST = ["--trials", "3", "--max-degree", "1"]


def _strip_timing(text):
    doc = json.loads(text)
    for c in doc["checks"]:
        c.pop("time_s", None)
    return json.dumps(doc, sort_keys=True)


# ---- round trips -------------------------------------------------------

@pytest.mark.parametrize("name", sorted(zoo.ZOO_PRESETS))
def test_preset_emit_ingest_round_trip(name):
    preset = zoo.zoo_preset(name)
    back = instances.ingest_text(instances.emit_instance(preset))
    ok, why = instances.same_object_graph(preset, back)
    assert ok, why


def test_round_trip_detects_mutations():
    preset = zoo.zoo_preset("poisson-xy")
    other = zoo.zoo_preset("poisson-xy")
    other["pi"][0][1] = other["patch"].coordinate(1)
    other["pi"][1][0] = -other["pi"][0][1]
    ok, why = instances.same_object_graph(preset, other)
    assert not ok and "pi" in why


def test_zoo_emit_writes_parseable_file(tmp_path):
    path = tmp_path / "foliation.txt"
    assert cli.main(["zoo", "foliation-x", "--emit", str(path)]) == 0
    data = instances.ingest(str(path))
    assert data.kind == "iis" and data.name == "foliation-x"
    assert data.iis.F_M.rank == 1


# ---- ingest diagnostics --------------------------------------------------

def test_rank_mismatch_names_the_declaration():
    text = ("[patch]\ncoords = x, y\n\n[bundle.A]\nrank = 2\n\n"
            "[anchor.A]\n0 = 1, 0, 3\n1 = 0, 1\n")
    with pytest.raises(InstanceError) as ei:
        instances.ingest_text(text)
    assert "anchor.A" in str(ei.value) and "expected 2" in str(ei.value)
    assert ei.value.line == 8


def test_syntax_error_carries_position():
    with pytest.raises(InstanceError) as ei:
        instances.ingest_text("[patch]\ncoords = x, y\n\n[pi]\n0,1 = x^\n")
    assert ei.value.line == 5 and ei.value.column == 9


def test_undeclared_reference_is_reported():
    text = ("[patch]\ncoords = x\n\n[subbundle.F]\nambient = TM\n0 = 1\n\n"
            "[iis]\nalgebroid = TM\nfoliation = F\nideal = F\n"
            "connection = nabla\n")
    with pytest.raises(InstanceError) as ei:
        instances.ingest_text(text)
    assert "undeclared connection 'nabla'" in str(ei.value)


def test_truncated_file_is_rejected(tmp_path):
    path = tmp_path / "broken.txt"
    path.write_text("[patch]\ncoords = x, y\n\n[pi")
    assert cli.main(["check", "courant", str(path)]) == 2


def test_dependent_frame_rows_are_rejected():
    text = ("[patch]\ncoords = x, y\n\n[subbundle.U]\nambient = TM\n"
            "0 = 1, 0\n1 = 2, 0\n")
    with pytest.raises(InstanceError) as ei:
        instances.ingest_text(text)
    assert "subbundle.U" in str(ei.value)


def test_courant_section_validates_gram():
    text = ("[patch]\ncoords = x\n\n[courant.C]\nrank = 2\n"
            "gram.0 = 0, 1\ngram.1 = 0, 0\n")
    with pytest.raises(InstanceError) as ei:
        instances.ingest_text(text)
    assert "courant.C" in str(ei.value)


# ---- the check verb ------------------------------------------------------

def test_unknown_suite_exits_2():
    with pytest.raises(SystemExit) as ei:
        cli.main(["check", "frobnicate", "poisson-xy"])
    assert ei.value.code == 2


def test_unknown_preset_exits_2(capsys):
    assert cli.main(["check", "courant", "nosuchthing"]) == 2
    assert "no such file or zoo preset" in capsys.readouterr().err


def test_suite_without_inputs_exits_2(capsys):
    assert cli.main(["check", "bialgebra", "poisson-xy"]) == 2
    assert "bialgebra" in capsys.readouterr().err


def test_im2form_failure_names_condition_two(capsys):
    code = cli.main(["check", "im2form", "nonclosed-zdxdy", "--seed", "1"])
    assert code == 1
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema"] == 1
    assert doc["all_passed"] is False
    failing = {c["name"]: c for c in doc["checks"]
               if c["status"] == "fail"}
    assert set(failing) == {"im2form.bracket"}
    assert "IM condition (2)" in failing["im2form.bracket"]["note"]
    residuals = [w["residual"]
                 for w in failing["im2form.bracket"]["witnesses"]]
    assert "(0, 0, -1)" in residuals


def test_failure_witness_reproduces_standalone():
    # the frame-pair witness above, recomputed outside the reporting layer
    patch = zoo.zoo_preset("nonclosed-zdxdy")["patch"]
    from algebroids.algebroid import tangent_algebroid
    alg = tangent_algebroid(patch)
    sigma = zoo.sigma_from_2form(
        patch, zoo.zoo_preset("nonclosed-zdxdy")["omega"])
    d1, d2 = zoo.im2form_defects(alg, sigma, alg.bundle.basis_section(0),
                                 alg.bundle.basis_section(1))
    assert d1.is_zero()
    assert not d2.is_zero()
    assert [str(c) for c in d2.components] == ["0", "0", "-1"]


def test_reports_are_deterministic_minus_timing(tmp_path, capsys):
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    for out in (out1, out2):
        code = cli.main(["check", "im2form", "nonclosed-zdxdy",
                         "--seed", "1", "--out", str(out)])
        assert code == 1
    assert _strip_timing(out1.read_text()) == _strip_timing(out2.read_text())


def test_text_format(capsys):
    code = cli.main(["check", "im2form", "presymplectic-dxdy",
                     "--format", "text"] + FAST)
    assert code == 0
    out = capsys.readouterr().out
    assert "result: PASS" in out and "im2form.antisymmetry" in out


def test_triple_file_suites(tmp_path, capsys):
    path = tmp_path / "triple.txt"
    path.write_text(TRIPLE_FILE)
    assert cli.main(["check", "la-dirac", str(path)] + FAST) == 0
    doc = json.loads(capsys.readouterr().out)
    names = [c["name"] for c in doc["checks"]]
    assert "la_dirac.quotient_flat" in names
    assert cli.main(["lemmas", str(path)] + FAST) == 0
    capsys.readouterr()
    assert cli.main(["check", "all", str(path)] + FAST) == 0
    doc = json.loads(capsys.readouterr().out)
    prefixes = {c["name"].split(".")[0] for c in doc["checks"]}
    # kindless files run every suite their declarations can feed
    assert {"courant", "la_dirac", "manin", "lemmas"} <= prefixes


def test_requested_checks_restrict_all(tmp_path, capsys):
    path = tmp_path / "triple.txt"
    path.write_text(TRIPLE_FILE + "\n[instance]\nchecks = lemmas\n")
    assert cli.main(["check", "all", str(path)] + FAST) == 0
    doc = json.loads(capsys.readouterr().out)
    assert all(c["name"].startswith("lemmas.") for c in doc["checks"])


def test_build_manin_then_recheck(tmp_path, capsys):
    src = tmp_path / "triple.txt"
    src.write_text(TRIPLE_FILE)
    built = tmp_path / "manin.txt"
    assert cli.main(["build-manin", str(src), "--out", str(built)]
                    + FAST) == 0
    capsys.readouterr()
    text = built.read_text()
    assert "[courant.C]" in text and "gram.0" in text and "frame.0" in text
    assert cli.main(["check", "courant", str(built)] + FAST) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["all_passed"] is True
    assert {c["name"] for c in doc["checks"]} == {
        "courant.anchor_morphism", "courant.differential_pairing",
        "courant.jacobi", "courant.leibniz",
        "courant.pairing_invariance", "courant.skew_defect"}


def test_run_is_importable_and_accepts_preset_names():
    report = cli.run("presymplectic-dxdy", "im2form", seed=2, trials=2,
                     max_degree=1)
    assert report.all_passed and report.suite == "im2form"
    assert report.to_dict()["seed"] == 2


def test_explicit_dorfman_entries_parse():
    text = ("[patch]\ncoords = x, y\n\n[dorfman.D]\nalgebroid = TM\n"
            "0,0 = 0, 0, 1, 0\n\n[subbundle.U]\nambient = TM+TM*\n"
            "0 = 0, 0, 1, 0\n1 = 0, 0, 0, 1\n")
    data = instances.ingest_text(text)
    D = data.dorfmans["D"]
    assert D.table[0][0].components[2] == data.patch.one
    assert data.subbundles["U"].ambient.name == "TM+TM*"


@pytest.mark.skipif(shutil.which("algebroids") is None,
                    reason="console script not installed")
def test_console_script(tmp_path):
    src = tmp_path / "triple.txt"
    src.write_text(TRIPLE_FILE)
    proc = subprocess.run(
        ["algebroids", "check", "la-dirac", str(src), "--trials", "2",
         "--max-degree", "1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["all_passed"] is True
