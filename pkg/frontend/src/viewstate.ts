// Pure view-state reducer. Everything rendered comes from server-sent
// state: this module holds no interaction thresholds, dwell timers, or cue
// schedules of its own, so disabling it changes nothing server-side.

import type { ConfigEcho, FrameMessage, ServerMessage } from './protocol.js';

export type ConnectionStatus = 'connecting' | 'connected' | 'disconnected';

export interface FeedEntry {
  seq: number;
  t: number;
  label: string;
  kind: string;
}

export interface ViewState {
  status: ConnectionStatus;
  frame: FrameMessage | null;
  feed: FeedEntry[];
  lastError: string | null;
  lastCalibration: string | null;
  /** highest seq seen; used to assert server emission order */
  lastSeq: number;
  seqViolations: number;
  /** control values the user sent that no frame has echoed back yet */
  pendingControls: Partial<ConfigEcho>;
}

export const FEED_LIMIT = 50;

export function initialViewState(): ViewState {
  return {
    status: 'connecting',
    frame: null,
    feed: [],
    lastError: null,
    lastCalibration: null,
    lastSeq: -1,
    seqViolations: 0,
    pendingControls: {},
  };
}

export function setStatus(state: ViewState, status: ConnectionStatus): ViewState {
  return { ...state, status };
}

/** Record a control the user just sent, so the UI can show it as pending
 * until a frame echoes it back. */
export function noteControlSent(state: ViewState, control: Partial<ConfigEcho>): ViewState {
  return { ...state, pendingControls: { ...state.pendingControls, ...control } };
}

function describeEvent(kind: string, layerTo: string | null, object: string | null): string {
  switch (kind) {
    case 'ActivateDetail':
      return `activated ${layerTo ?? '?'}`;
    case 'ExitDetail':
      return `returned to ${layerTo ?? '?'}`;
    case 'HoverEnter':
      return `hover ${object ?? '?'}`;
    case 'HoverExit':
      return `hover off ${object ?? '?'}`;
    case 'CueShown':
      return 'cue shown';
    case 'CueHidden':
      return 'cue hidden';
    default:
      return kind;
  }
}

function ackControls(pending: Partial<ConfigEcho>, echo: ConfigEcho): Partial<ConfigEcho> {
  const still: Partial<ConfigEcho> = {};
  for (const [key, value] of Object.entries(pending)) {
    const echoed = (echo as unknown as Record<string, unknown>)[key];
    if (echoed !== value) {
      (still as Record<string, unknown>)[key] = value;
    }
  }
  return still;
}

export function applyMessage(state: ViewState, msg: ServerMessage): ViewState {
  const seqViolations = msg.seq <= state.lastSeq ? state.seqViolations + 1 : state.seqViolations;
  const next: ViewState = { ...state, lastSeq: Math.max(state.lastSeq, msg.seq), seqViolations };

  switch (msg.type) {
    case 'frame':
      next.frame = msg;
      next.pendingControls = ackControls(state.pendingControls, msg.config);
      return next;
    case 'event': {
      const entry: FeedEntry = {
        seq: msg.seq,
        t: msg.t,
        kind: msg.kind,
        label: describeEvent(msg.kind, msg.layer_to, msg.object),
      };
      next.feed = [...state.feed, entry].slice(-FEED_LIMIT);
      return next;
    }
    case 'error':
      next.lastError = `${msg.code}: ${msg.detail}`;
      return next;
    case 'calibration_result':
      if (msg.kind === 'model') {
        next.lastCalibration = `model gain=${msg.gain?.toFixed(4)} bias=${msg.bias?.toFixed(4)} (${msg.n_points} pts)`;
      } else {
        next.lastCalibration = `point ${msg.n_points}: measured ${msg.measured_vergence?.toFixed(3)} D`;
      }
      return next;
  }
}

/** True when the detail layer (nearest) is the active one. */
export function detailActive(state: ViewState): boolean {
  const frame = state.frame;
  if (!frame) return false;
  const ids = frame.config.layer_ids;
  return ids.length > 0 && frame.layer === ids[ids.length - 1];
}

/** The layer the cue points at: the pending switch target if any,
 * otherwise the neighbour of the current layer (toward detail first). */
export function cueTargetLayer(state: ViewState): string | null {
  const frame = state.frame;
  if (!frame || frame.cue_opacity <= 0) return null;
  if (frame.pending_layer) return frame.pending_layer;
  const ids = frame.config.layer_ids;
  const idx = ids.indexOf(frame.layer);
  if (idx < 0) return null;
  if (idx + 1 < ids.length) return ids[idx + 1];
  return idx > 0 ? ids[idx - 1] : null;
}
