import json

import pytest

from dihedralis_cli import (
    EXIT_ENGINE_ERROR,
    EXIT_HYPOTHESES_NOT_MET,
    EXIT_OK,
    main,
    parse_polynomial,
    parse_ramified_set,
)


@pytest.fixture
def run(tmp_path, capsys):
    def _run(*argv):
        code = main(list(argv) + ["--cache-dir", str(tmp_path / "cache")])
        out, err = capsys.readouterr()
        return code, out, err
    return _run


def test_parse_polynomial():
    assert parse_polynomial("x^3 - x + 1") == [1, 0, -1, 1]
    assert parse_polynomial("x**2+23") == [1, 0, 23]
    with pytest.raises(ValueError):
        parse_polynomial("x^2 + 1/2")


def test_parse_ramified_set():
    assert parse_ramified_set("") == ()
    assert parse_ramified_set("2, 11;13") == (2, 11, 13)


def test_classgroup_of_disc(run):
    code, out, _ = run("classgroup", "--disc", "-4")
    report = json.loads(out)
    assert code == EXIT_OK
    assert report["schema"] == 1
    assert report["h"] == "1"


def test_classgroup_of_poly(run):
    code, out, _ = run("classgroup", "--poly", "x^2+23")
    report = json.loads(out)
    assert code == EXIT_OK
    assert report["h"] == "3"
    assert report["invariant_factors"] == ["3"]
    assert report["certification"] == "minkowski-certified"


def test_classpoly(run):
    code, out, _ = run("classpoly", "--disc", "-7")
    assert code == EXIT_OK
    assert json.loads(out)["coefficients"] == ["1", "3375"]


def test_decide_refuses_p_in_S(run):
    code, _, err = run("decide", "--disc", "-23", "--q", "3", "--p", "5", "--ramified-set", "5")
    assert code == EXIT_ENGINE_ERROR
    assert "PContainedInS" in err


def test_decide_hypotheses_not_met(run):
    code, out, _ = run("decide", "--disc", "-23", "--q", "3", "--p", "7", "--ramified-set", "2")
    report = json.loads(out)
    assert code == EXIT_HYPOTHESES_NOT_MET
    assert report["verdict"] == "HypothesesNotMet"
    assert report["violated"] == ["S meets S0 at 2 (S1)"]


def test_decide_needs_tower(run):
    code, _, err = run("decide", "--disc", "-23")
    assert code == EXIT_ENGINE_ERROR
    assert "--disc, --q and --p are required" in err


def test_invalid_tower(run):
    code, _, err = run("decide", "--disc", "-20", "--q", "3", "--p", "5")
    assert code == EXIT_ENGINE_ERROR
    assert "InvalidTower" in err


def test_classify_primes(run):
    code, out, _ = run("classify-primes", "--disc", "-23", "--q", "3", "--p", "5", "--bound", "30")
    report = json.loads(out)
    verdicts = {row["ell"]: row["verdict"] for row in report["primes"]}
    assert code == EXIT_OK
    assert verdicts["5"] == "excluded_p"
    assert verdicts["11"] == "S2"
    assert verdicts["19"] == "S2"
    assert "S3" not in verdicts.values()


def test_minimal_s(run):
    code, out, _ = run("minimal-s", "--disc", "-23", "--q", "3", "--p", "5")
    assert code == EXIT_OK
    assert json.loads(out)["minimal_S"] == ["inf"]
    code, _, err = run("minimal-s", "--disc", "-23", "--q", "3", "--p", "2")
    assert code == EXIT_ENGINE_ERROR
    assert "EvenPrime" in err


def test_rep_check_nonsplit(run):
    code, out, _ = run("rep-check", "--nonsplit")
    checks = json.loads(out)["checks"]
    assert code == EXIT_OK
    assert set(checks) == {"nonsplit"}
    assert checks["nonsplit"] == {"n": 3, "split_max_order": 6, "nonsplit_max_order": 12}


def test_rep_check_s4(run):
    code, out, _ = run("rep-check", "--s4-example")
    s4 = json.loads(out)["checks"]["s4"]
    assert code == EXIT_OK
    assert s4["dihedral"] is False
    assert s4["image_order"] == 24
    assert s4["modules"] == ["I(chi/chi^sigma)"]


def test_unknown_table(run):
    code, _, err = run("table", "--table", "h15-p5", "--bound", "100")
    assert code == EXIT_ENGINE_ERROR
    assert "Unknown table id" in err


def test_table_markdown_with_errors(run):
    code, out, _ = run("table", "--table", "h1-q3-p5", "--bound", "20", "--format", "md")
    assert code == EXIT_OK
    assert "InvalidTower" in out
    assert "errors: 6" in out
