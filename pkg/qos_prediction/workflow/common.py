"""Pieces shared by the neighbor, experiment and sweep stages."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, List, Optional, Sequence, TypeVar

from tqdm.auto import tqdm

from qos_prediction.config import Settings, load_settings
from qos_prediction.services.logging import configure_logging, console_kwargs
from qos_prediction.utils.progress import emit_progress, progress_bar, progress_callback

from .stats import StageMetrics

logger = logging.getLogger(__name__)

TItem = TypeVar("TItem")
TResult = TypeVar("TResult")


def resolve_settings(settings: Optional[Settings] = None) -> Settings:
    """``settings`` or the environment's, with the run directories created."""
    resolved = settings or load_settings()
    resolved.ensure_directories()
    return resolved


def configure_logging_for_run(settings: Settings) -> None:
    """Send the run's records to ``data_root/logs`` (or ``log_file``) and the console."""
    log_file = None
    if settings.log_to_file:
        log_file = settings.resolved_log_file()
        if settings.log_file is not None and not log_file.is_absolute():
            log_file = settings.data_root / log_file
    configure_logging(
        log_to_file=settings.log_to_file,
        log_file=log_file,
        log_to_console=settings.log_to_console,
        verbose=settings.verbose,
    )


def stage_progress(
    settings: Settings, total: int, desc: str, *, unit: str = "item"
) -> Optional[tqdm]:
    return progress_bar(total, desc, unit=unit, enabled=settings.show_progress)


def run_ordered(
    items: Sequence[TItem],
    worker: Callable[[TItem], TResult],
    settings: Settings,
    *,
    desc: str,
    unit: str = "item",
    max_workers: Optional[int] = None,
) -> List[TResult]:
    """Apply ``worker`` to each item on a thread pool; results keep the input order.

    The bar advances as items complete. The first exception, in input order,
    propagates once every item has finished.
    """
    if not items:
        return []
    workers = min(max_workers or settings.max_workers, len(items))
    progress = stage_progress(settings, len(items), desc, unit=unit)
    hook = progress_callback(progress)
    try:
        if workers <= 1:
            results = []
            for item in items:
                results.append(worker(item))
                emit_progress(hook)
            return results
        with ThreadPoolExecutor(max_workers=workers, thread_name_prefix=unit) as executor:
            futures = [executor.submit(worker, item) for item in items]
            for _ in as_completed(futures):
                emit_progress(hook)
            return [future.result() for future in futures]
    finally:
        if progress is not None:
            progress.close()


def log_stage_summary(stage: str, metrics: StageMetrics) -> None:
    logger.info(
        "[%s] %d of %d produced, %d from cache, %d failed in %.1fs",
        stage,
        metrics.produced,
        metrics.total,
        metrics.cache_hits,
        metrics.failed,
        metrics.seconds,
        extra=console_kwargs(),
    )
    logger.debug("[%s] metrics %s", stage, metrics.to_dict())


__all__ = [
    "configure_logging_for_run",
    "log_stage_summary",
    "resolve_settings",
    "run_ordered",
    "stage_progress",
]
