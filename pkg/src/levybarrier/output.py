"""CSV emission with provenance headers.

Every file starts with a `# config_sha256=... seed=...` comment line, then
a column header.  Floats are written with shortest round-trip repr so
byte-identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .estimator import Estimate

ESTIMATE_COLUMNS = ("quantity", "b", "x", "eta", "mean", "std_error", "n_paths")
CHECK_COLUMNS = (
    "name",
    "lhs",
    "lhs_std_error",
    "rhs",
    "rhs_std_error",
    "discrepancy",
    "threshold",
    "passed",
    "skipped",
    "note",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _open_with_header(path: Path, digest: str, seed: int, columns):
    handle = path.open("w", newline="", encoding="utf-8")
    handle.write(f"# config_sha256={digest} seed={seed}\n")
    writer = csv.writer(handle)
    writer.writerow(columns)
    return handle, writer


def write_estimate_rows(path, digest: str, seed: int, rows) -> None:
    """rows: iterable of (quantity, b, x, eta, Estimate)."""
    path = Path(path)
    handle, writer = _open_with_header(path, digest, seed, ESTIMATE_COLUMNS)
    with handle:
        for quantity, b, x, eta, est in rows:
            writer.writerow(
                [
                    quantity,
                    _fmt(b),
                    _fmt(x),
                    _fmt(eta),
                    _fmt(est.mean if isinstance(est, Estimate) else est),
                    _fmt(est.std_error if isinstance(est, Estimate) else None),
                    _fmt(est.n_paths if isinstance(est, Estimate) else None),
                ]
            )


def write_barrier_rows(path, digest: str, seed: int, rows) -> None:
    """rows: iterable of (label, eta, BarrierSearchResult)."""
    path = Path(path)
    columns = (
        "label",
        "eta",
        "b_star",
        "bracket_lo",
        "bracket_hi",
        "iterations",
        "tolerance",
        "rho_lo_mean",
        "rho_lo_std_error",
        "rho_hi_mean",
        "rho_hi_std_error",
        "n_paths",
    )
    handle, writer = _open_with_header(path, digest, seed, columns)
    with handle:
        for label, eta, res in rows:
            writer.writerow(
                [
                    label,
                    _fmt(eta),
                    _fmt(res.b_star),
                    _fmt(res.bracket_lo),
                    _fmt(res.bracket_hi),
                    res.iterations,
                    _fmt(res.tolerance),
                    _fmt(res.rho_at_lo.mean),
                    _fmt(res.rho_at_lo.std_error),
                    _fmt(res.rho_at_hi.mean),
                    _fmt(res.rho_at_hi.std_error),
                    res.rho_at_hi.n_paths,
                ]
            )


def write_check_rows(path, digest: str, seed: int, reports) -> None:
    path = Path(path)
    handle, writer = _open_with_header(path, digest, seed, CHECK_COLUMNS)
    with handle:
        for r in reports:
            writer.writerow(
                [
                    r.name,
                    _fmt(r.lhs),
                    _fmt(r.lhs_std_error),
                    _fmt(r.rhs),
                    _fmt(r.rhs_std_error),
                    _fmt(r.discrepancy),
                    _fmt(r.threshold),
                    str(r.passed).lower(),
                    str(r.skipped).lower(),
                    r.note,
                ]
            )
