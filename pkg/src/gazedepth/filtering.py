"""Streaming de-noiser for the raw vergence signal.

Pipeline per sample: validity gate, Hampel (median/MAD) outlier rejection
against the current window, then an exponential moving average.  Everything
runs in diopter space so one tuning behaves the same at every depth.  The
smoothed value is kept inside the [min, max] of the valid vergences in the
window, which bounds the lag the EMA can accumulate behind a refocus.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from statistics import median

from .errors import StreamOrderError
from .geometry import DepthEstimate

# |x - median| in units of standard deviation, for Gaussian-consistent MAD
MAD_CONSISTENCY = 1.4826
# Hampel fallback scale (diopters) when the window MAD is exactly zero;
# without it a constant window would reject every deviation, including
# genuine refocus onsets.
ZERO_MAD_FLOOR = 0.05


class Quality(Enum):
    SETTLED = "Settled"
    WARMUP = "Warmup"
    DEGRADED = "Degraded"


@dataclass(frozen=True, slots=True)
class FilterConfig:
    window: int = 11
    hampel_k: float = 3.0
    ema_alpha: float = 0.3
    min_valid_fraction: float = 0.5

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError("window must be odd and >= 3")
        if self.hampel_k <= 0.0:
            raise ValueError("hampel_k must be positive")
        if not 0.0 < self.ema_alpha <= 1.0:
            raise ValueError("ema_alpha must be in (0, 1]")
        if not 0.0 < self.min_valid_fraction <= 1.0:
            raise ValueError("min_valid_fraction must be in (0, 1]")


@dataclass(frozen=True, slots=True)
class FilteredDepth:
    """One de-noised output sample; vergence/depth are NaN until the filter
    has accepted at least one valid sample."""

    timestamp: float
    vergence: float
    depth: float
    quality: Quality
    rejected: bool

    @property
    def is_settled(self) -> bool:
        return self.quality is Quality.SETTLED


@dataclass
class DepthFilter:
    """Single-owner mutable filter state; one instance per gaze stream."""

    config: FilterConfig = field(default_factory=FilterConfig)

    def __post_init__(self):
        self._buffer: deque[tuple[float, float, bool]] = deque(maxlen=self.config.window)
        self._ema: float | None = None
        self._samples_seen = 0
        self._last_timestamp = -math.inf

    @property
    def samples_seen(self) -> int:
        return self._samples_seen

    def reset(self) -> None:
        """Empty the window and the EMA; the next output is a Warmup one."""
        self._buffer.clear()
        self._ema = None
        self._samples_seen = 0
        self._last_timestamp = -math.inf

    def push(self, estimate: DepthEstimate) -> FilteredDepth:
        """Feed one raw estimate, get one de-noised output."""
        cfg = self.config
        if estimate.timestamp < self._last_timestamp:
            raise StreamOrderError(
                f"timestamp {estimate.timestamp!r} precedes {self._last_timestamp!r}"
            )
        self._last_timestamp = estimate.timestamp
        self._samples_seen += 1

        rejected = False
        if estimate.is_valid:
            # The buffer keeps the raw (pre-substitution) value so that a
            # sustained refocus eventually flips the window median and stops
            # being rejected.
            self._buffer.append((estimate.timestamp, estimate.vergence, True))
            valid = [v for _, v, ok in self._buffer if ok]
            med = median(valid)
            mad = median(abs(v - med) for v in valid)
            scale = MAD_CONSISTENCY * mad if mad > 0.0 else ZERO_MAD_FLOOR
            x = estimate.vergence
            if abs(x - med) > cfg.hampel_k * scale:
                x = med
                rejected = True
            if self._ema is None:
                self._ema = x
            else:
                self._ema = cfg.ema_alpha * x + (1.0 - cfg.ema_alpha) * self._ema
            self._ema = min(max(self._ema, min(valid)), max(valid))
        else:
            self._buffer.append((estimate.timestamp, math.nan, False))

        valid_fraction = sum(1 for _, _, ok in self._buffer if ok) / len(self._buffer)
        if self._samples_seen < cfg.window:
            quality = Quality.WARMUP
        elif valid_fraction < cfg.min_valid_fraction:
            quality = Quality.DEGRADED
        else:
            quality = Quality.SETTLED

        vergence = self._ema if self._ema is not None else math.nan
        depth = 1.0 / vergence if vergence > 0.0 else math.nan
        return FilteredDepth(
            timestamp=estimate.timestamp,
            vergence=vergence,
            depth=depth,
            quality=quality,
            rejected=rejected,
        )
