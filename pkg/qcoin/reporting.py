"""
Report rows and their text, JSON and CSV renderings.

All numbers go through ``format_number`` (shortest round-trip decimal), and
rows are always emitted in canonical (N, model) order, so the bytes of a
report never depend on how the trials were scheduled.
"""

import csv
import io
import json
from typing import Any, Dict, Iterable, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field
from rich.console import Console
from rich.table import Table

from . import analysis
from .adversary import ExperimentReport
from .protocol import SessionTranscript
from .utils import format_number
from .verification import CheckResult

ModelName = Literal[
    "paper-eq4",
    "appendix-sum",
    "permutation-exact",
    "monte-carlo",
    "forced-coin-rate",
    "min-gamma",
]
MODEL_ORDER: List[str] = [
    "paper-eq4",
    "appendix-sum",
    "permutation-exact",
    "monte-carlo",
    "forced-coin-rate",
    "min-gamma",
]
COLUMNS = ["n_pairs", "model", "value", "ci_low", "ci_high", "trials", "seed"]
TEXT_WIDTH = 100


class ReportRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_pairs: int = Field(..., ge=1)
    model: ModelName
    value: float = Field(..., ge=0.0, le=1.0)
    ci_low: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    ci_high: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    trials: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = None

    def record(self) -> Dict[str, Any]:
        return {column: getattr(self, column) for column in COLUMNS}


def canonical(rows: Iterable[ReportRow]) -> List[ReportRow]:
    return sorted(rows, key=lambda r: (r.n_pairs, MODEL_ORDER.index(r.model)))


def reference_rows(n: int) -> List[ReportRow]:
    """The three analytical pass probabilities for one N."""
    return [
        ReportRow(n_pairs=n, model="paper-eq4", value=analysis.pass_prob_paper(n)),
        ReportRow(n_pairs=n, model="appendix-sum", value=analysis.pass_prob_appendix_sum(n)),
        ReportRow(n_pairs=n, model="permutation-exact", value=analysis.pass_prob_permutation_model(n)),
    ]


def analysis_rows(max_n: int, p_threshold: float) -> List[ReportRow]:
    rows = []
    for n in range(1, max_n + 1):
        rows.extend(reference_rows(n))
        rows.append(ReportRow(n_pairs=n, model="min-gamma", value=analysis.min_gamma(n, p_threshold)))
    return canonical(rows)


def experiment_rows(report: ExperimentReport) -> List[ReportRow]:
    """Monte Carlo estimate and forced-coin rate next to the reference values."""
    rows = reference_rows(report.n_pairs)
    rows.append(
        ReportRow(
            n_pairs=report.n_pairs,
            model="monte-carlo",
            value=report.estimate,
            ci_low=report.ci_low,
            ci_high=report.ci_high,
            trials=report.trials,
            seed=report.seed,
        )
    )
    rows.append(
        ReportRow(
            n_pairs=report.n_pairs,
            model="forced-coin-rate",
            value=report.forced_coin_rate,
            trials=report.trials,
            seed=report.seed,
        )
    )
    return canonical(rows)


def _text_table(title: str, columns: List[str], body: List[List[str]]) -> str:
    table = Table(title=title)
    for column in columns:
        table.add_column(column)
    for cells in body:
        table.add_row(*cells)
    buffer = io.StringIO()
    console = Console(file=buffer, width=TEXT_WIDTH, color_system=None, force_terminal=False)
    console.print(table)
    return buffer.getvalue()


def _csv(columns: List[str], body: List[List[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(body)
    return buffer.getvalue()


def _row_cells(rows: List[ReportRow]) -> List[List[str]]:
    return [
        [format_number(v) if not isinstance(v, str) else v for v in row.record().values()]
        for row in rows
    ]


def render_rows(rows: List[ReportRow], fmt: str, title: str = "Pass probability") -> str:
    rows = canonical(rows)
    if fmt == "json":
        return json.dumps([r.record() for r in rows]) + "\n"
    if fmt == "csv":
        return _csv(COLUMNS, _row_cells(rows))
    return _text_table(title, COLUMNS, _row_cells(rows))


def discrepancy_note(n: int) -> Optional[str]:
    if analysis.models_disagree(n):
        return (
            f"note: at N={n} the simulated permutation model "
            f"({format_number(analysis.pass_prob_permutation_model(n))}) differs from "
            f"(5/8)^(N-1) ({format_number(analysis.pass_prob_paper(n))})"
        )
    return None


def render_experiment(report: ExperimentReport, fmt: str) -> str:
    rows = experiment_rows(report)
    note = discrepancy_note(report.n_pairs) if report.strategy.startswith("bob:reflect") else None
    if fmt == "json":
        payload = {
            "report": report.model_dump(),
            "rows": [r.record() for r in rows],
            "model_discrepancy": note is not None,
        }
        return json.dumps(payload, sort_keys=True) + "\n"
    if fmt == "csv":
        flag = "true" if note is not None else "false"
        return _csv(COLUMNS + ["model_discrepancy"], [cells + [flag] for cells in _row_cells(rows)])
    summary = [
        f"strategy: {report.strategy}",
        f"successes: {report.successes}/{report.trials}",
        f"parity mismatches: {report.parity_mismatches}",
    ]
    text = "\n".join(summary) + "\n" + render_rows(rows, "text", title=f"{report.strategy} at N={report.n_pairs}")
    if note:
        text += note + "\n"
    return text


def render_toss(transcript: SessionTranscript, fmt: str) -> str:
    fields = {
        "n_pairs": transcript.config.n_pairs,
        "seed": transcript.config.seed,
        "verdict": transcript.verdict.value if transcript.verdict else None,
        "coin": transcript.coin,
        "alice_coin": transcript.alice_coin,
        "bob_coin": transcript.bob_coin,
        "results": "".join(b.bits for b in transcript.bob_outcomes),
    }
    if fmt == "json":
        return json.dumps(fields, sort_keys=True) + "\n"
    if fmt == "csv":
        return _csv(list(fields), [[format_number(v) if not isinstance(v, str) else v for v in fields.values()]])
    return f"coin: {transcript.coin}\nverdict: {fields['verdict']}\n"


def render_checks(results: List[CheckResult], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results]) + "\n"
    body = [[r.name, "pass" if r.passed else "FAIL", r.detail] for r in results]
    if fmt == "csv":
        return _csv(["check", "status", "detail"], body)
    return _text_table("Oracle vs engine", ["check", "status", "detail"], body)
