import json

import pytest

from engines.dihedral_orchestrator import prime_discriminant
from engines.table_builder import (
    COLUMNS,
    TableSpec,
    build_table,
    case_set,
    render,
    summarize,
)


@pytest.mark.parametrize("table_id, kind, q, p, h", [
    ("h15-q3-p5", "classnumber", 3, 5, 15),
    ("h21-q7-p3", "classnumber", 7, 3, 21),
    ("prime-disc(3,5)", "prime", 3, 5, None),
    ("prime-disc-q3-p7", "prime", 3, 7, None),
])
def test_parse(table_id, kind, q, p, h):
    spec = TableSpec.parse(table_id)
    assert (spec.kind, spec.q, spec.p, spec.h) == (kind, q, p, h)


def test_parse_rejects_unknown():
    with pytest.raises(ValueError):
        TableSpec.parse("h15")


def test_class_number_one_discriminants():
    discs = list(TableSpec.parse("h1-q3-p5").discriminants(200))
    assert discs == [-3, -4, -7, -8, -11, -19, -43, -67, -163]


def test_prime_discriminants():
    discs = list(TableSpec.parse("prime-disc(3,5)").discriminants(100))
    assert discs == sorted(discs, key=abs)
    assert {-23, -31, -59, -83} <= set(discs)
    assert -47 not in discs


def test_empty_table(run_config):
    df = build_table("h15-q3-p5", 2, run_config)
    assert df.empty
    assert list(df.columns) == COLUMNS
    assert render(df, "md") == "(no fields)"
    assert summarize(df, "h15-q3-p5").iloc[0]["results"] == "no fields"
    assert case_set(df, "Case2") == set()


def test_rows_record_errors(run_config):
    df = build_table("h1-q3-p5", 20, run_config)
    assert df["d"].tolist() == ["-3", "-4", "-7", "-8", "-11", "-19"]
    assert set(df["error"]) == {"InvalidTower"}
    assert set(df["case"]) == {"N/A"}
    report = json.loads(render(df, "json", "h1-q3-p5", 20))
    assert report["schema"] == 1
    assert report["bound"] == "20"
    assert render(df, "csv").splitlines()[0] == ",".join(COLUMNS)


@pytest.mark.slow
@pytest.mark.parametrize("table_id, bound, count", [
    ("h21-q7-p3", 5867, 18),
    ("h35-q7-p5", 4931, 7),
    ("h33-q11-p3", 1583, 2),
])
def test_tables_without_case2(run_config, table_id, bound, count):
    df = build_table(table_id, bound, run_config)
    assert len(df) == count
    assert case_set(df, "Case1") == {int(d) for d in df["d"]}


@pytest.mark.slow
def test_class_number_15(run_config):
    df = build_table("h15-q3-p5", 19867, run_config)
    assert case_set(df, "Case2") == {-4219, -19867}
    assert len(case_set(df, "Case1")) == 66
    summary = summarize(df, "h15-q3-p5").iloc[0]["results"]
    assert summary == "Case2: -4219, -19867; Case1: all 66 others"


@pytest.mark.slow
def test_prime_discriminants_q3_p11(run_config):
    # 3061 = 1 mod 4, so the field is Q(sqrt -3061) of discriminant -4 * 3061
    df = build_table("prime-disc(3,11)", 3061, run_config)
    assert case_set(df, "Case2") == {-12244}


@pytest.mark.slow
def test_prime_discriminants_q3_p5(run_config):
    df = build_table("prime-disc(3,5)", 3100, run_config)
    expected = {prime_discriminant(ell) for ell in (673, 1193, 1993, 1999, 2819)}
    assert case_set(df, "Case2") == expected
