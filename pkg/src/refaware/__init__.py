"""Refactoring-aware change categorization, metrics and SZZ labeling for
just-in-time defect prediction."""

from .categorizer import CATEGORIES, LineChangeRecord, categorize_commit
from .diffcore import EditList, FileDiff, parse_unified_diff
from .pipeline import CommitAnalyzer
from .vcs import HistoryBuilder, open_repo

__version__ = "0.1.0"

__all__ = [
    "CATEGORIES",
    "CommitAnalyzer",
    "EditList",
    "FileDiff",
    "HistoryBuilder",
    "LineChangeRecord",
    "categorize_commit",
    "open_repo",
    "parse_unified_diff",
]
