"""Result emission: per-trial CSV/JSON records and CCDF tables."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from ..metrics import ccdf, eta_db, mu_db
from .experiment import TrialRecord

RECORD_HEADER = ("trial", "estimator", "snr_db", "tau_c", "eta", "mu", "eta_db", "mu_db", "converged", "iterations")
CCDF_HEADER = ("threshold_db", "fraction", "estimator", "snr_db", "tau_c", "metric")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return repr(v)
    return str(v)


def record_rows(records: list[TrialRecord]):
    for rec in records:
        for name, res in rec.results.items():
            e_db = eta_db(res.eta) if not math.isnan(res.eta) else math.nan
            m_db = mu_db(res.mu) if not math.isnan(res.mu) else math.nan
            yield {
                "trial": rec.trial, "estimator": name, "snr_db": rec.cell.snr_db, "tau_c": rec.cell.tau_c,
                "eta": res.eta, "mu": res.mu, "eta_db": e_db, "mu_db": m_db,
                "converged": not res.failed, "iterations": res.iterations, "error": res.error,
            }


def ccdf_table(records: list[TrialRecord]) -> list[dict]:
    """CCDFs of ``20 log10(1/eta)`` and ``10 log10(1/mu)`` per (cell, estimator).

    Failed trials are excluded from the samples (they are counted separately).
    """
    groups: dict = {}
    for row in record_rows(records):
        if not row["converged"]:
            continue
        for metric in ("eta_db", "mu_db"):
            v = row[metric]
            if isinstance(v, float) and math.isnan(v):
                continue
            key = (row["snr_db"], row["tau_c"], row["estimator"], metric)
            groups.setdefault(key, []).append(v)
    table = []
    for (snr, tau_c, name, metric), samples in groups.items():
        for t, f in ccdf(samples):
            table.append({"threshold_db": t, "fraction": f, "estimator": name,
                          "snr_db": snr, "tau_c": tau_c, "metric": metric})
    return table


def _csv_text(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row[k]) for k in header])
    return buf.getvalue()


def _json_default(v):
    raise TypeError(v)


def _jsonable(row):
    out = {}
    for k, v in row.items():
        if isinstance(v, float) and (math.isnan(v) or math.isinf(v)):
            v = None if math.isnan(v) else ("inf" if v > 0 else "-inf")
        out[k] = v
    return out


def render(rows, header, fmt: str = "csv") -> str:
    rows = list(rows)
    if fmt == "csv":
        return _csv_text(rows, header)
    if fmt == "json":
        return json.dumps([_jsonable(r) for r in rows], indent=1, default=_json_default) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_results(table, path: str | Path | None, fmt: str = "csv", kind: str = "records") -> str:
    """Write ``records`` (list of TrialRecord) or a ``ccdf`` table; returns the text."""
    if kind == "records":
        text = render(record_rows(table), RECORD_HEADER, fmt)
    elif kind == "ccdf":
        text = render(table, CCDF_HEADER, fmt)
    else:
        raise ValueError(f"unknown result kind {kind!r}")
    if path is not None and str(path) != "-":
        Path(path).write_text(text)
    return text
