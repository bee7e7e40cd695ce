"""Merge vulnerability and detection reports into one Markdown document.

One row per labeled report: vulnerability rows carry FMMPMR / MMPMR / RMMR
at the operating threshold, detection rows carry D-EER and BPCER at the two
conventional APCER budgets.  Rates render as percentages with two decimals;
thresholds keep six significant digits since they live on the score scale.
"""

from __future__ import annotations

import json
from pathlib import Path

from .detection import DetReport
from .errors import DataError
from .vulnerability import VulnReport


def _load_doc(path, fields, kind: str) -> dict:
    path = Path(path)
    if not path.exists():
        raise DataError(f"{kind} report not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed {kind} report {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise DataError(f"{path}: {kind} report must be a JSON object")
    missing = [f for f in fields if f not in doc]
    if missing:
        raise DataError(f"{path}: {kind} report missing fields {missing}")
    return {f: doc[f] for f in fields}


def load_vuln_report(path) -> VulnReport:
    fields = (
        "tau", "tau_source", "target_far", "far", "fmmpmr", "mmpmr", "tar",
        "rmmr", "mode", "n_morphs", "n_trials", "n_nonmated", "n_mated",
    )
    return VulnReport(**_load_doc(path, fields, "vulnerability"))


def load_det_report(path) -> DetReport:
    fields = (
        "eer", "bpcer_at_apcer5", "bpcer_at_apcer10", "n_attack",
        "n_bonafide",
    )
    return DetReport(**_load_doc(path, fields, "detection"))


def _pct(x) -> str:
    return f"{100.0 * float(x):.2f}"


def _table(header, rows) -> list:
    lines = [
        "| " + " | ".join(header) + " |",
        "| " + " | ".join("---" for _ in header) + " |",
    ]
    lines += ["| " + " | ".join(row) + " |" for row in rows]
    return lines


def render_report(vuln=(), det=()) -> str:
    """(label, report) pairs -> Markdown; either list may be empty."""
    lines = ["# Morph evaluation report", ""]
    if vuln:
        lines += ["## Vulnerability", ""]
        rows = [
            [
                label,
                _pct(r.fmmpmr),
                _pct(r.mmpmr),
                _pct(r.rmmr),
                _pct(r.tar),
                f"{r.tau:.6g}",
            ]
            for label, r in vuln
        ]
        lines += _table(
            ["Source", "FMMPMR (%)", "MMPMR (%)", "RMMR (%)", "TAR (%)",
             "Threshold"],
            rows,
        )
        lines += [""]
        for label, r in vuln:
            lines.append(
                f"- {label}: {r.n_morphs} morphs, {r.n_trials} {r.mode} "
                f"trials, threshold {r.tau_source} "
                f"(target FAR {_pct(r.target_far)}%, observed "
                f"{_pct(r.far)}%)."
            )
        lines += [""]
    if det:
        lines += ["## Detection", ""]
        rows = [
            [
                label,
                _pct(r.eer),
                _pct(r.bpcer_at_apcer5),
                _pct(r.bpcer_at_apcer10),
            ]
            for label, r in det
        ]
        lines += _table(
            ["Source", "D-EER (%)", "BPCER (%) @ APCER=5%",
             "BPCER (%) @ APCER=10%"],
            rows,
        )
        lines += [""]
        for label, r in det:
            lines.append(
                f"- {label}: {r.n_attack} attack / {r.n_bonafide} bona fide "
                "samples."
            )
        lines += [""]
    if len(lines) == 2:
        lines += ["No reports supplied.", ""]
    return "\n".join(lines)
