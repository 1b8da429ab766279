"""
Case tables over families of imaginary quadratic fields.

Table ids:
- hN-qQ-pP: all fields with class number N and |d| <= bound, e.g. h15-q3-p5
- prime-disc(Q,P): fields Q(sqrt(-ell)) for primes ell <= bound with Q || h
"""

import json
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import pandas as pd
from sympy import primerange

from engines.dihedral_orchestrator import TowerSpec, check_case, prime_discriminant
from engines.errors import DihedralisError, StageError
from engines.logging_config import get_logger
from engines.quadform_engine import fundamental_discriminants, reduced_forms
from engines.result_cache import ResultCache
from engines.settings import DEFAULT_CONFIG, SCHEMA_VERSION

logger = get_logger(__name__)

COLUMNS = ["d", "h", "q", "p", "case", "h_M", "certification", "error"]

_CLASS_NUMBER = re.compile(r"^h(\d+)-q(\d+)-p(\d+)$")
_PRIME_DISC = re.compile(r"^prime-disc(?:\((\d+),\s*(\d+)\)|-q(\d+)-p(\d+))$")


@dataclass(frozen=True)
class TableSpec:
    table_id: str
    kind: str
    q: int
    p: int
    h: int = None

    @classmethod
    def parse(cls, table_id):
        table_id = table_id.strip()
        match = _CLASS_NUMBER.match(table_id)
        if match:
            h, q, p = (int(g) for g in match.groups())
            return cls(table_id, "classnumber", q, p, h)
        match = _PRIME_DISC.match(table_id)
        if match:
            groups = [int(g) for g in match.groups() if g is not None]
            q, p = groups
            return cls(table_id, "prime", q, p)
        raise ValueError(f"Unknown table id: {table_id}")

    def discriminants(self, bound):
        """Discriminants of the table's fields, ordered by |d|."""
        if self.kind == "classnumber":
            for d in fundamental_discriminants(bound):
                if len(reduced_forms(d)) == self.h:
                    yield d
            return
        found = []
        for ell in primerange(3, bound + 1):
            d = prime_discriminant(ell)
            h = len(reduced_forms(d))
            if h % self.q == 0 and h % (self.q * self.q):
                found.append(d)
        yield from sorted(found, key=abs)


def _empty_row(d, spec):
    return {"d": str(d), "h": "N/A", "q": str(spec.q), "p": str(spec.p), "case": "N/A",
            "h_M": "N/A", "certification": "N/A", "error": ""}


def table_row(d, spec, config=DEFAULT_CONFIG):
    """One table row; engine errors are recorded in the row."""
    row = _empty_row(d, spec)
    cache = ResultCache(config.cache_dir)
    try:
        tower = TowerSpec.build(d, spec.q, spec.p, strict=False)
        row["h"] = str(tower.h)
        decision = check_case(tower, config, cache)
        row["case"] = decision.case
        row["h_M"] = "N/A" if decision.h_M is None else str(decision.h_M)
        row["certification"] = decision.certification or "N/A"
    except StageError as e:
        logger.error(f"Row {d} of {spec.table_id} failed in {e.stage}: {e.cause}")
        row["error"] = f"{e.stage}: {e.error_name}"
    except DihedralisError as e:
        logger.error(f"Row {d} of {spec.table_id} failed: {e}")
        row["error"] = type(e).__name__
    return row


def _row_star(args):
    return table_row(*args)


def build_table(table_id, bound, config=DEFAULT_CONFIG):
    spec = TableSpec.parse(table_id)
    discs = list(spec.discriminants(bound))
    logger.info(f"Table {spec.table_id}: {len(discs)} fields up to {bound}")
    args = [(d, spec, config) for d in discs]
    if config.jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            rows = list(pool.map(_row_star, args))
    else:
        rows = [table_row(*a) for a in args]

    df = pd.DataFrame(rows, columns=COLUMNS)
    if not df.empty:
        df = df.assign(_abs=df["d"].map(lambda s: abs(int(s)))).sort_values("_abs", kind="stable")
        df = df.drop(columns="_abs").reset_index(drop=True)
    failed = int((df["error"] != "").sum()) if not df.empty else 0
    logger.info(f"Table {spec.table_id} completed: {len(df)} rows, {failed} errors")
    return df


def summarize(df, spec):
    """One line in the layout p | q | fields | results."""
    if isinstance(spec, str):
        spec = TableSpec.parse(spec)
    if spec.kind == "classnumber":
        fields = f"class number {spec.h}"
    else:
        fields = "negative prime discriminants"
    results = []
    for case in ("Case2", "Case1", "Indeterminate"):
        discs = df.loc[df["case"] == case, "d"].tolist() if not df.empty else []
        if not discs:
            continue
        if case == "Case1" and len(discs) > 5:
            results.append(f"{case}: all {len(discs)} others")
        else:
            results.append(f"{case}: {', '.join(discs)}")
    errors = int((df["error"] != "").sum()) if not df.empty else 0
    if errors:
        results.append(f"errors: {errors}")
    return pd.DataFrame([{"p": str(spec.p), "q": str(spec.q), "fields": fields,
                          "results": "; ".join(results) or "no fields"}])


def case_set(df, case):
    return {int(d) for d in df.loc[df["case"] == case, "d"]} if not df.empty else set()


def render(df, fmt="md", table_id=None, bound=None):
    if fmt == "md":
        return df.to_markdown(index=False) if not df.empty else "(no fields)"
    if fmt == "csv":
        return df.to_csv(index=False)
    if fmt == "json":
        report = {
            "schema": SCHEMA_VERSION,
            "table": table_id,
            "bound": None if bound is None else str(bound),
            "rows": df.to_dict(orient="records"),
        }
        return json.dumps(report, indent=2, sort_keys=True)
    raise ValueError(f"Unknown output format: {fmt}")
