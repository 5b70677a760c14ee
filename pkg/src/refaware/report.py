"""Category summary tables and the figures written next to them."""
from __future__ import annotations

import csv
import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .categorizer import CATEGORIES, MOVE, PROPAGATION, REFACTORING  # noqa: E402

SUMMARY_COLUMNS = ("Add", "Edit", "Refactored", "Propagated", "Tangled", "Refactored Commits")

_BUCKETS = {
    "Add": ("Add",),
    "Edit": ("Add_Edit",),
    "Refactored": ("Add_Move", "Add_Refactoring"),
    "Propagated": ("Add_Propagation", "Add_Refactoring_Propagation"),
    "Tangled": ("Add_Refactoring_Edit", "Add_Propagation_Edit", "Add_Refactoring_Propagation_Edit"),
}
_REFACTORING_FLAGS = frozenset({MOVE, REFACTORING, PROPAGATION})

# fixed settings keep the PNG bytes reproducible
_SAVE = {"dpi": 100, "metadata": {"Software": None}}


def category_counts(records) -> dict[str, int]:
    counts = dict.fromkeys(CATEGORIES, 0)
    for r in records:
        counts[r.category] += 1
    return counts


def summarize(records) -> dict[str, int]:
    """Added lines bucketed as Add/Edit/Refactored/Propagated/Tangled."""
    counts = category_counts(records)
    row = {name: sum(counts[c] for c in cats) for name, cats in _BUCKETS.items()}
    row["Refactored Commits"] = int(any(r.flags & _REFACTORING_FLAGS for r in records))
    return row


def summary_csv(per_commit) -> str:
    """``per_commit`` is an ordered list of (commit id, records)."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("commit_id",) + SUMMARY_COLUMNS)
    total = dict.fromkeys(SUMMARY_COLUMNS, 0)
    for commit, records in per_commit:
        row = summarize(records)
        for k in SUMMARY_COLUMNS:
            total[k] += row[k]
        w.writerow([commit] + [row[k] for k in SUMMARY_COLUMNS])
    w.writerow(["Total"] + [total[k] for k in SUMMARY_COLUMNS])
    return out.getvalue()


def categories_csv(per_commit) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("commit_id",) + CATEGORIES)
    for commit, records in per_commit:
        counts = category_counts(records)
        w.writerow([commit] + [counts[c] for c in CATEGORIES])
    return out.getvalue()


def plot_category_distribution(per_commit, path) -> None:
    totals = dict.fromkeys(CATEGORIES, 0)
    for _, records in per_commit:
        for c, n in category_counts(records).items():
            totals[c] += n
    fig, ax = plt.subplots(figsize=(9, 4.5))
    xs = range(len(CATEGORIES))
    colors = ["tab:green" if c.startswith("Add") else "tab:red" for c in CATEGORIES]
    ax.bar(xs, [totals[c] for c in CATEGORIES], width=0.7, color=colors)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(CATEGORIES, rotation=90, fontsize=8)
    ax.set_ylabel("changed lines")
    ax.set_title("Line changes per category")
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)


def plot_alberg(curves, path) -> None:
    """Effort/recall curves of the model against the optimal and worst rankings."""
    fig, ax = plt.subplots(figsize=(5, 5))
    styles = {"optimal": ("k", "--"), "model": ("tab:blue", "-"), "worst": ("tab:gray", ":")}
    for name in ("optimal", "model", "worst"):
        xs, ys = curves[name]
        color, ls = styles[name]
        ax.plot(xs, ys, color=color, linestyle=ls, label=name)
    ax.axvline(0.2, color="tab:orange", linewidth=0.8)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    ax.set_xlabel("fraction of churn inspected")
    ax.set_ylabel("fraction of buggy commits found")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
