import json

from click.testing import CliRunner

from langcert.cli import main

runner = CliRunner()


def test_check_certifies_a_sound_language():
    result = runner.invoke(main, ["check", "corpus/sound/stlc_cbv.mod"])
    assert result.exit_code == 0
    assert "verdict: certified" in result.output


def test_check_rejects_with_exit_one():
    result = runner.invoke(main, ["check", "corpus/broken/head_swap.mod"])
    assert result.exit_code == 1
    assert "E300" in result.output


def test_check_flags_invalid_input(tmp_path):
    bad = tmp_path / "bad.mod"
    bad.write_text("this is not a language\n")
    result = runner.invoke(main, ["check", str(bad)])
    assert result.exit_code == 2


def test_check_json_report():
    result = runner.invoke(main, ["check", "--json",
                                  "corpus/sound/lists.mod"])
    assert result.exit_code == 0
    rep = json.loads(result.output)
    assert rep["verdict"] == "certified"
    assert rep["diagnostics"] == []


def test_check_explain():
    result = runner.invoke(main, ["check", "--explain", "e210"])
    assert result.exit_code == 0
    assert result.output.startswith("E210:")


def test_typeof_reports_the_inferred_type():
    result = runner.invoke(main, ["typeof", "corpus/sound/stlc_cbv.mod",
                                  "--expr", "abs bool (x\\ x)"])
    assert result.exit_code == 0
    assert result.output.strip() == "arrow bool bool"


def test_typeof_rejects_an_untypable_term():
    result = runner.invoke(main, ["typeof", "corpus/sound/stlc_cbv.mod",
                                  "--expr", "app tt ff"])
    assert result.exit_code == 1
    assert "no type" in result.output


def test_run_prints_the_trace():
    result = runner.invoke(main, ["run", "corpus/sound/stlc_cbv.mod",
                                  "--expr", "app (abs bool (x\\ x)) tt"])
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert lines[0] == "   app (abs bool (x\\ x)) tt"
    assert lines[1] == "-> tt"
    assert lines[2] == "result: value"


def test_fuzz_smoke():
    result = runner.invoke(main, ["fuzz", "corpus/sound/lists.mod",
                                  "--count", "25", "--depth", "4",
                                  "--json"])
    assert result.exit_code == 0
    rep = json.loads(result.output)
    assert rep["stuck"] == []
    assert rep["preservation_violations"] == []


def test_fuzz_exit_one_on_violation():
    result = runner.invoke(main, ["fuzz", "corpus/broken/head_partial.mod",
                                  "--count", "60", "--depth", "5"])
    assert result.exit_code == 1
    assert "STUCK" in result.output


def test_corpus_against_manifest():
    result = runner.invoke(main, ["corpus", "corpus", "--manifest",
                                  "corpus/manifest.json", "--json"])
    assert result.exit_code == 0
    rep = json.loads(result.output)
    assert rep["ok"] is True
    assert len(rep["results"]) == 26


def test_certify_writes_the_certificate(tmp_path):
    out = tmp_path / "stlc.cert.txt"
    result = runner.invoke(main, ["certify", "corpus/sound/stlc_cbv.mod",
                                  "-o", str(out)])
    assert result.exit_code == 0
    text = out.read_text()
    assert "== THEOREM ==" in text
    assert "verdict certified" in text
