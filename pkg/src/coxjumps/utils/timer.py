import logging
import time
from collections import OrderedDict
from functools import wraps

logger = logging.getLogger(__name__)


def timeit(func):
    """Log the wall time of each call at DEBUG level."""

    @wraps(func)
    def timeit_wrapper(*args, **kwargs):
        start = time.perf_counter()
        result = func(*args, **kwargs)
        logger.debug(f"{func.__name__} took {time.perf_counter() - start:.4f} s")
        return result

    return timeit_wrapper


class AverageTimer:
    """Named wall-time laps, optionally smoothed across repeated names.

    Used to time the routes of a validation run: `update(name)` closes the
    lap started at the previous update (or at construction/reset).
    """

    def __init__(self, smoothing: float = 0.0, logger: logging.Logger = None):
        self.smoothing = smoothing
        self.logger = logger or logging.getLogger(__name__)
        self.times = OrderedDict()
        self.reset()

    def reset(self) -> None:
        self.start = self.last_time = time.perf_counter()

    def update(self, name: str = "") -> float:
        now = time.perf_counter()
        dt = now - self.last_time
        if name in self.times:
            dt = self.smoothing * dt + (1 - self.smoothing) * self.times[name]
        self.times[name] = dt
        self.last_time = now
        return dt

    def get_total_time(self) -> float:
        return sum(self.times.values())

    def print(self, text: str = "Timer") -> float:
        laps = ", ".join(f"{key}={val:.3f}" for key, val in self.times.items())
        total = self.get_total_time()
        self.logger.info(f"[{text}] total={total:.3f} s | {laps}")
        self.reset()
        return total

    def get_times(self) -> OrderedDict:
        return self.times
