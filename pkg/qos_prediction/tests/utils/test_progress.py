from __future__ import annotations

from qos_prediction.utils import (
    emit_progress,
    epoch_progress,
    progress_bar,
    progress_callback,
    slugify,
)


class _Recorder:
    def __init__(self) -> None:
        self.total = 0

    def update(self, increment: int) -> None:
        self.total += increment


def test_slugify() -> None:
    assert slugify("FIEMF-abc-d0.05-s1") == "fiemf-abc-d0.05-s1"
    assert slugify("  United States / CA ") == "united-states-ca"


def test_progress_callback_updates_bar() -> None:
    recorder = _Recorder()
    hook = progress_callback(recorder)
    emit_progress(hook)
    emit_progress(hook, 3)
    emit_progress(hook, 0)
    assert recorder.total == 4


def test_progress_helpers_tolerate_missing_bar() -> None:
    assert progress_callback(None) is None
    emit_progress(None)
    assert epoch_progress(10, "train", enabled=False) is None
    assert epoch_progress(0, "train") is None


def test_failing_hook_is_ignored() -> None:
    def _hook(_step: int) -> None:
        raise RuntimeError("closed")

    emit_progress(_hook)


def test_progress_bar_counts_and_closes() -> None:
    bar = progress_bar(3, "cells", unit="cell")
    assert bar is not None
    hook = progress_callback(bar)
    emit_progress(hook, 2)
    assert bar.n == 2
    bar.close()
    assert progress_bar(3, "cells", enabled=False) is None
