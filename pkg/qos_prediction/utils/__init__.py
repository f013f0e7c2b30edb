"""Small helpers: progress reporting and file-name slugs for checkpoints and caches."""

import re

from .progress import (
    ProgressHook,
    emit_progress,
    epoch_progress,
    progress_bar,
    progress_callback,
)

_UNSAFE = re.compile(r"[^a-z0-9.]+")


def slugify(value: str) -> str:
    """Lower-case ``value`` and collapse runs of anything but ``[a-z0-9.]`` into ``-``.

    Dots survive so densities such as ``d0.05`` stay readable.
    """
    return _UNSAFE.sub("-", value.lower()).strip("-.")


__all__ = [
    "ProgressHook",
    "emit_progress",
    "epoch_progress",
    "progress_bar",
    "progress_callback",
    "slugify",
]
