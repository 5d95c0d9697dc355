// Message types for the session protocol (see docs/protocol.md in the
// repository root). One JSON object per newline-terminated line; over
// WebSocket each line arrives as one text frame.

export interface InteractionEvent {
  t: number;
  kind:
    | 'HoverEnter'
    | 'HoverExit'
    | 'ActivateDetail'
    | 'ExitDetail'
    | 'CueShown'
    | 'CueHidden';
  layer_from: string | null;
  layer_to: string | null;
  object: string | null;
}

export interface ConfigEcho {
  target_vergence: number | null;
  scenario: string | null;
  noise_sigma: number;
  outlier_prob: number;
  blink_prob_per_s: number;
  vergence_gain: number;
  vergence_bias: number;
  seed: number;
  sample_rate: number;
  layer_depths: number[];
  layer_ids: string[];
  dwell: number;
  hysteresis_fraction: number;
  calibration: { gain: number; bias: number };
}

export interface FrameMessage {
  type: 'frame';
  seq: number;
  tick: number;
  t: number;
  raw_depth: number | null;
  raw_vergence: number | null;
  validity: string;
  depth: number | null;
  vergence: number | null;
  quality: 'Settled' | 'Warmup' | 'Degraded';
  rejected: boolean;
  layer: string;
  pending_layer: string | null;
  switch_count: number;
  cue_opacity: number;
  blink: boolean;
  events: InteractionEvent[];
  applied: string[];
  config: ConfigEcho;
}

export interface EventMessage extends InteractionEvent {
  type: 'event';
  seq: number;
}

export interface ErrorMessage {
  type: 'error';
  seq: number;
  code: string;
  detail: string;
}

export interface CalibrationResultMessage {
  type: 'calibration_result';
  seq: number;
  kind: 'point' | 'model';
  measured_vergence?: number;
  true_vergence?: number;
  gain?: number;
  bias?: number;
  residual_rms?: number;
  n_points: number;
}

export type ServerMessage =
  | FrameMessage
  | EventMessage
  | ErrorMessage
  | CalibrationResultMessage;

export type ClientMessage =
  | { type: 'set_target'; vergence: number }
  | { type: 'set_scenario'; scenario: string }
  | {
      type: 'set_noise';
      sigma?: number;
      outlier_prob?: number;
      outlier_sigma?: number;
      blink_prob_per_s?: number;
      vergence_gain?: number;
      vergence_bias?: number;
    }
  | { type: 'reset' }
  | { type: 'calibrate_point'; depth: number }
  | { type: 'calibrate_fit' };

const SERVER_TYPES = new Set(['frame', 'event', 'error', 'calibration_result']);

/** Parse one protocol line; returns null for anything unusable. */
export function decodeServerMessage(line: string): ServerMessage | null {
  const text = line.trim();
  if (!text) return null;
  let parsed: unknown;
  try {
    parsed = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof parsed !== 'object' || parsed === null) return null;
  const msg = parsed as { type?: unknown; seq?: unknown };
  if (typeof msg.type !== 'string' || !SERVER_TYPES.has(msg.type)) return null;
  if (typeof msg.seq !== 'number') return null;
  return parsed as ServerMessage;
}

export function encodeClientMessage(msg: ClientMessage): string {
  return JSON.stringify(msg) + '\n';
}
