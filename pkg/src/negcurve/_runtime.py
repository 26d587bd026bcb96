"""Process-level runtime knobs."""

import os


def thread_count() -> int:
    """Parallelism cap from NEGCURVE_THREADS (default 1, minimum 1)."""
    raw = os.environ.get("NEGCURVE_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
