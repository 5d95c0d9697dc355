"""Layer-switch state machine and visual-cue lifecycle.

Information layers sit at fixed depths; the user selects one by refocusing.
A switch toward a neighbouring layer commits only after the calibrated
vergence has crossed that boundary's threshold and stayed beyond it for a
dwell time.  Each boundary carries a hysteresis band (activate above,
exit below the diopter midpoint) so residual noise at a boundary cannot
chatter.  A guidance cue fades linearly with successful switches.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import BadDepthsError, StreamOrderError
from .filtering import FilteredDepth, Quality

DEFAULT_DWELL = 0.15
DEFAULT_HYSTERESIS_FRACTION = 0.2
# successful switches until the guidance cue is fully faded
CUE_FAMILIARITY_SWITCHES = 20
# guard on the dwell comparison so timestamp roundoff (ulps, not sample
# intervals) cannot defer a commit by a whole sample
DWELL_EPS = 1e-9


class EventKind(Enum):
    HOVER_ENTER = "HoverEnter"
    HOVER_EXIT = "HoverExit"
    ACTIVATE_DETAIL = "ActivateDetail"  # switch toward a nearer layer
    EXIT_DETAIL = "ExitDetail"          # switch toward a farther layer
    CUE_SHOWN = "CueShown"
    CUE_HIDDEN = "CueHidden"


@dataclass(frozen=True, slots=True)
class InteractionEvent:
    timestamp: float
    kind: EventKind
    layer_from: Optional[str] = None
    layer_to: Optional[str] = None
    object: Optional[str] = None

    def to_json_dict(self) -> dict:
        return {
            "t": self.timestamp,
            "kind": self.kind.value,
            "layer_from": self.layer_from,
            "layer_to": self.layer_to,
            "object": self.object,
        }


@dataclass(frozen=True, slots=True)
class Layer:
    id: str
    depth: float

    @property
    def vergence(self) -> float:
        return 1.0 / self.depth


@dataclass(frozen=True, slots=True)
class Boundary:
    """Thresholds between an adjacent (far, near) layer pair, in diopters."""

    far_id: str
    near_id: str
    activate_vergence: float  # crossing above commits toward the near layer
    exit_vergence: float      # crossing below commits toward the far layer


@dataclass(frozen=True)
class LayerConfig:
    layers: tuple[Layer, ...]          # ordered far -> near (decreasing depth)
    boundaries: tuple[Boundary, ...]   # one per adjacent pair
    dwell: float = DEFAULT_DWELL
    hysteresis_fraction: float = DEFAULT_HYSTERESIS_FRACTION

    def index_of(self, layer_id: str) -> int:
        for i, layer in enumerate(self.layers):
            if layer.id == layer_id:
                return i
        raise KeyError(f"unknown layer id {layer_id!r}")


def configure_layers(
    depths: list[float],
    dwell: float = DEFAULT_DWELL,
    hysteresis_fraction: float = DEFAULT_HYSTERESIS_FRACTION,
    ids: Optional[list[str]] = None,
) -> LayerConfig:
    """Build a LayerConfig from strictly-decreasing layer depths (meters).

    Boundary thresholds per adjacent pair: with far/near vergences V_f, V_n,
    the midpoint is M = (V_f + V_n)/2 and the half-band
    h = hysteresis_fraction * (V_n - V_f)/2; activate = M + h, exit = M - h.
    """
    if len(depths) < 2:
        raise BadDepthsError("need at least 2 layer depths")
    if any(d <= 0.0 for d in depths):
        raise BadDepthsError("layer depths must be positive")
    if any(a <= b for a, b in zip(depths, depths[1:])):
        raise BadDepthsError("layer depths must be strictly decreasing (far to near)")
    if dwell < 0.0:
        raise ValueError("dwell must be non-negative")
    if not 0.0 < hysteresis_fraction < 1.0:
        raise ValueError("hysteresis_fraction must be in (0, 1)")
    if ids is None:
        ids = [f"layer{i}" for i in range(len(depths))]
    if len(ids) != len(depths) or len(set(ids)) != len(ids):
        raise ValueError("ids must be unique and match the number of depths")

    layers = tuple(Layer(i, d) for i, d in zip(ids, depths))
    boundaries = []
    for far, near in zip(layers, layers[1:]):
        v_f, v_n = far.vergence, near.vergence
        mid = (v_f + v_n) / 2.0
        half_band = hysteresis_fraction * (v_n - v_f) / 2.0
        boundaries.append(Boundary(far.id, near.id, mid + half_band, mid - half_band))
    return LayerConfig(layers=layers, boundaries=tuple(boundaries), dwell=dwell, hysteresis_fraction=hysteresis_fraction)


@dataclass(frozen=True, slots=True)
class PendingSwitch:
    target_layer: str
    since: float  # timestamp of the first sample beyond the threshold


@dataclass
class InteractionState:
    """Single-owner mutable session state; one per gaze stream."""

    current_layer: str
    pending: Optional[PendingSwitch] = None
    hover_target: Optional[str] = None
    switch_count: int = 0
    last_quality: Optional[Quality] = None
    last_timestamp: float = field(default=-math.inf, repr=False)


def initial_state(config: LayerConfig) -> InteractionState:
    """Fresh state starting on the farthest (portal) layer."""
    return InteractionState(current_layer=config.layers[0].id)


def cue_opacity(switch_count: int, n_familiar: int = CUE_FAMILIARITY_SWITCHES) -> float:
    """Linear cue fade: 1.0 for a new user, 0.0 after n_familiar switches."""
    if n_familiar < 1:
        raise ValueError("n_familiar must be >= 1")
    return max(0.0, 1.0 - switch_count / n_familiar)


def _cue_visible(hover_target: Optional[str], switch_count: int) -> bool:
    return hover_target is not None and cue_opacity(switch_count) > 0.0


def step(
    state: InteractionState,
    config: LayerConfig,
    input: FilteredDepth,
    hover: Optional[str] = None,
) -> list[InteractionEvent]:
    """Advance the state machine by one filtered sample.

    Returns the events emitted at this step, in order: hover enter/exit,
    layer switch, cue shown/hidden.  Degraded or warming-up input clears any
    pending switch and cannot start or commit one.
    """
    t = input.timestamp
    if t < state.last_timestamp:
        raise StreamOrderError(f"timestamp {t!r} precedes {state.last_timestamp!r}")
    state.last_timestamp = t

    was_visible = _cue_visible(state.hover_target, state.switch_count)
    events: list[InteractionEvent] = []

    if hover != state.hover_target:
        if state.hover_target is not None:
            events.append(InteractionEvent(t, EventKind.HOVER_EXIT, object=state.hover_target))
        if hover is not None:
            events.append(InteractionEvent(t, EventKind.HOVER_ENTER, object=hover))
        state.hover_target = hover

    state.last_quality = input.quality
    if input.quality is not Quality.SETTLED:
        state.pending = None
    else:
        v = input.vergence
        k = config.index_of(state.current_layer)
        desired: Optional[int] = None
        if k + 1 < len(config.layers) and v >= config.boundaries[k].activate_vergence:
            desired = k + 1
        elif k > 0 and v <= config.boundaries[k - 1].exit_vergence:
            desired = k - 1

        if desired is None:
            state.pending = None
        else:
            target_id = config.layers[desired].id
            if state.pending is None or state.pending.target_layer != target_id:
                state.pending = PendingSwitch(target_layer=target_id, since=t)
            if t - state.pending.since >= config.dwell - DWELL_EPS:
                kind = EventKind.ACTIVATE_DETAIL if desired > k else EventKind.EXIT_DETAIL
                events.append(
                    InteractionEvent(t, kind, layer_from=state.current_layer, layer_to=target_id)
                )
                state.current_layer = target_id
                state.switch_count += 1
                state.pending = None

    now_visible = _cue_visible(state.hover_target, state.switch_count)
    if now_visible and not was_visible:
        events.append(InteractionEvent(t, EventKind.CUE_SHOWN, object=state.hover_target))
    elif was_visible and not now_visible:
        events.append(InteractionEvent(t, EventKind.CUE_HIDDEN, object=state.hover_target))
    return events


def write_events(events: list[InteractionEvent], path: str) -> None:
    """Append-free JSON Lines dump of an event stream (one event per line)."""
    with open(path, "w", encoding="utf-8") as fh:
        for event in events:
            fh.write(json.dumps(event.to_json_dict()) + "\n")
