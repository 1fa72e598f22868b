"""Process memory sampling for benchmark runs."""

import logging
import threading
from collections import deque
from typing import Deque, Dict, Optional

import psutil

logger = logging.getLogger(__name__)


def process_rss_bytes() -> int:
    """Resident set size of the current process, 0 if it cannot be read."""
    try:
        return psutil.Process().memory_info().rss
    except psutil.Error as e:
        logger.debug(f"Could not read process memory: {e}")
        return 0


class MemorySampler:
    """Records RSS before and after a block of work.

    The delta is a physical measurement and varies between runs, so it is
    only logged; result files carry the deterministic cache estimate instead.
    """

    def __init__(self, label: str = '', max_samples: int = 1000):
        self.label = label
        self.before: Optional[int] = None
        self.after: Optional[int] = None
        self.samples: Deque[int] = deque(maxlen=max_samples)
        self._lock = threading.Lock()

    def sample(self) -> int:
        rss = process_rss_bytes()
        with self._lock:
            self.samples.append(rss)
        return rss

    @property
    def delta(self) -> int:
        if self.before is None or self.after is None:
            return 0
        return self.after - self.before

    @property
    def peak(self) -> int:
        with self._lock:
            return max(self.samples, default=0)

    def summary(self) -> Dict[str, int]:
        return {
            'rss_before': self.before or 0,
            'rss_after': self.after or 0,
            'rss_delta': self.delta,
            'rss_peak': self.peak,
        }

    def __enter__(self):
        self.before = self.sample()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.after = self.sample()
        if exc_type is None:
            logger.debug(f"RSS delta {self.delta} bytes", extra={'operation': self.label or 'memory_sample'})
        return False
