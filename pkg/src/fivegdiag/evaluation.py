"""Scoring diagnoses against ground truth, in binary and exact-match modes."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .model import Diagnosis, FaultDiagError, FaultType

POSITIVE, NEGATIVE, UNKNOWN = "Fault", "Healthy", "Unknown"


class EmptyInput(FaultDiagError, ValueError):
    pass


@dataclass(frozen=True)
class EvalReport:
    mode: str
    n: int
    accuracy: float
    precision: Optional[float] = None
    recall: Optional[float] = None
    f1: Optional[float] = None
    per_fault_accuracy: Mapping[FaultType, float] = field(default_factory=dict)
    # truth -> prediction -> count
    confusion: Mapping[str, Mapping[str, int]] = field(default_factory=dict)
    macro_f1: Optional[float] = None

    def metrics(self) -> list[tuple[str, float]]:
        rows = [("accuracy", self.accuracy)]
        if self.mode == "binary":
            rows += [("precision", self.precision), ("recall", self.recall), ("f1", self.f1)]
        else:
            rows += [(f"accuracy[{f.value}]", acc) for f, acc in self.per_fault_accuracy.items()]
            if self.macro_f1 is not None:
                rows.append(("macro_f1", self.macro_f1))
        return rows


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def evaluate_binary(pairs: Sequence[tuple[Diagnosis, FaultType]]) -> EvalReport:
    """Fault-vs-healthy metrics. Unparseable answers always count as wrong."""
    if not pairs:
        raise EmptyInput("no predictions to score")
    tp = fp = fn = tn = 0
    for diag, label in pairs:
        actual = label.is_fault
        predicted = diag.detected if diag.parsed else not actual
        if predicted and actual:
            tp += 1
        elif predicted:
            fp += 1
        elif actual:
            fn += 1
        else:
            tn += 1
    precision, recall = _ratio(tp, tp + fp), _ratio(tp, tp + fn)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    confusion = {POSITIVE: {POSITIVE: tp, NEGATIVE: fn}, NEGATIVE: {POSITIVE: fp, NEGATIVE: tn}}
    return EvalReport("binary", len(pairs), (tp + tn) / len(pairs), precision, recall, f1,
                      confusion=confusion)


def evaluate_exact(pairs: Sequence[tuple[Diagnosis, FaultType]], macro_f1: bool = False) -> EvalReport:
    if not pairs:
        raise EmptyInput("no predictions to score")
    order = [f.value for f in FaultType] + [UNKNOWN]
    labels = sorted({lab.value for _, lab in pairs}, key=order.index)
    preds = [(d.predicted_label.value if d.predicted_label else UNKNOWN) for d, _ in pairs]
    columns = sorted(set(labels) | set(preds), key=order.index)
    confusion = {t: {p: 0 for p in columns} for t in labels}
    for (_, lab), pred in zip(pairs, preds):
        confusion[lab.value][pred] += 1
    correct = sum(confusion[t].get(t, 0) for t in labels)
    per_fault = {FaultType(t): confusion[t].get(t, 0) / sum(confusion[t].values())
                 for t in labels if t != FaultType.HEALTHY.value}
    mf1 = None
    if macro_f1:
        scores = []
        for t in labels:
            tp = confusion[t].get(t, 0)
            fp = sum(confusion[o].get(t, 0) for o in labels if o != t)
            fn = sum(confusion[t].values()) - tp
            p, r = _ratio(tp, tp + fp), _ratio(tp, tp + fn)
            scores.append(2 * p * r / (p + r) if p + r else 0.0)
        mf1 = sum(scores) / len(scores)
    return EvalReport("exact", len(pairs), correct / len(pairs), per_fault_accuracy=per_fault,
                      confusion=confusion, macro_f1=mf1)


def _table(rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def render_report(r: EvalReport, format: str = "text") -> str:
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["metric", "value"])
        w.writerow(["n", r.n])
        for name, value in r.metrics():
            w.writerow([name, f"{value:.6f}"])
        return buf.getvalue()
    if format != "text":
        raise ValueError(f"unknown report format {format!r}")
    out = [f"mode: {r.mode}    n: {r.n}", ""]
    out.append(_table([("metric", "value")] + [(k, f"{v:.4f}") for k, v in r.metrics()]))
    cols = list(next(iter(r.confusion.values())))
    out += ["", "confusion (rows: truth, columns: prediction)"]
    out.append(_table([["", *cols]] + [[t, *(str(row.get(c, 0)) for c in cols)]
                                         for t, row in r.confusion.items()]))
    return "\n".join(out) + "\n"
