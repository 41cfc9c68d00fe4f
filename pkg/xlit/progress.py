# -*- coding: utf-8 -*-
"""Optional progress bar around the completion loop of a run. The default
bar is drawn by pokrok.
"""
from concurrent.futures import Future
from typing import Callable, Iterable, Iterator, Optional, Sequence, TypeVar
from pokrok import progress_iter


T = TypeVar("T")

ProgressWrapper = Callable[..., Iterable]


class IterableProgress:
    """Process-wide switch for progress display.

    Args:
        default_wrapper: Used when progress is enabled without an explicit
            wrapper. Called as ``wrapper(itr, desc=..., size=...)``.
    """

    def __init__(self, default_wrapper: Optional[ProgressWrapper] = progress_iter) -> None:
        self.enabled = False
        self.wrapper: Optional[ProgressWrapper] = None
        self.default_wrapper = default_wrapper

    def update(
        self, enable: Optional[bool] = None, wrapper: Optional[ProgressWrapper] = None
    ) -> None:
        if enable is not None:
            self.enabled = enable
        if wrapper:
            self.wrapper = wrapper
        elif self.enabled and self.wrapper is None:
            if self.default_wrapper is None:
                raise ValueError("Progress enabled but no wrapper is available")
            self.wrapper = self.default_wrapper

    def reset(self) -> None:
        self.enabled = False
        self.wrapper = None

    def wrap(
        self, itr: Iterable[T], desc: Optional[str] = None, size: Optional[int] = None
    ) -> Iterable[T]:
        """Returns `itr` unchanged unless progress is enabled."""
        if self.enabled and self.wrapper:
            return self.wrapper(itr, desc=desc, size=size)
        return itr

    def results(self, futures: Sequence["Future[T]"], desc: str = "Completing") -> Iterator[T]:
        """Yield the result of each future in order, advancing the bar as
        each one resolves.
        """
        for future in self.wrap(futures, desc=desc, size=len(futures)):
            yield future.result()


ITERABLE_PROGRESS = IterableProgress()
