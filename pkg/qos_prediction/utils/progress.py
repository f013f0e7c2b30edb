"""tqdm progress for similarity rows, experiment cells and training epochs.

Long-running kernels report through plain ``hook(step)`` callables so they do
not depend on tqdm; :func:`progress_callback` adapts a bar into such a hook.
"""

from __future__ import annotations

import logging
from functools import partial
from typing import Callable, Optional

from tqdm.auto import tqdm

logger = logging.getLogger(__name__)

ProgressHook = Callable[[int], None]


def progress_bar(
    total: int, desc: str, *, unit: str = "item", enabled: bool = True
) -> Optional[tqdm]:
    """A transient bar, or ``None`` when disabled or there is nothing to count."""
    if not enabled or total <= 0:
        return None
    return tqdm(total=total, desc=desc, unit=unit, leave=False, dynamic_ncols=True)


def epoch_progress(total: int, desc: str, *, enabled: bool = True) -> Optional[tqdm]:
    return progress_bar(total, desc, unit="epoch", enabled=enabled)


def _advance(progress: tqdm, increment: int = 1) -> None:
    if increment > 0:
        progress.update(increment)


def progress_callback(progress: Optional[tqdm]) -> Optional[ProgressHook]:
    if progress is None:
        return None
    return partial(_advance, progress)


def emit_progress(hook: Optional[ProgressHook], step: int = 1) -> None:
    """Call ``hook``; a failing hook is logged and otherwise ignored."""
    if hook is None or step <= 0:
        return
    try:
        hook(step)
    except Exception:  # noqa: BLE001
        logger.debug("Progress hook failed", exc_info=True)


__all__ = [
    "ProgressHook",
    "emit_progress",
    "epoch_progress",
    "progress_bar",
    "progress_callback",
]
