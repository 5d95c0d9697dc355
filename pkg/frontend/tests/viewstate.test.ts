import { describe, expect, it } from 'vitest';

import type { ConfigEcho, EventMessage, FrameMessage } from '../src/protocol.js';
import {
  FEED_LIMIT,
  applyMessage,
  cueTargetLayer,
  detailActive,
  initialViewState,
  noteControlSent,
  setStatus,
} from '../src/viewstate.js';

function config(overrides: Partial<ConfigEcho> = {}): ConfigEcho {
  return {
    target_vergence: 0.5,
    scenario: null,
    noise_sigma: 0.0035,
    outlier_prob: 0.01,
    blink_prob_per_s: 0.2,
    vergence_gain: 1.0,
    vergence_bias: 0.0,
    seed: 0,
    sample_rate: 120,
    layer_depths: [2.0, 0.5],
    layer_ids: ['portal', 'detail'],
    dwell: 0.15,
    hysteresis_fraction: 0.2,
    calibration: { gain: 1.0, bias: 0.0 },
    ...overrides,
  };
}

function frame(seq: number, overrides: Partial<FrameMessage> = {}): FrameMessage {
  return {
    type: 'frame',
    seq,
    tick: seq,
    t: seq / 120,
    raw_depth: 2.0,
    raw_vergence: 0.5,
    validity: 'Valid',
    depth: 2.0,
    vergence: 0.5,
    quality: 'Settled',
    rejected: false,
    layer: 'portal',
    pending_layer: null,
    switch_count: 0,
    cue_opacity: 1.0,
    blink: false,
    events: [],
    applied: [],
    config: config(),
    ...overrides,
  };
}

function event(seq: number, kind: EventMessage['kind'], t = 0.5): EventMessage {
  return { type: 'event', seq, t, kind, layer_from: 'portal', layer_to: 'detail', object: null };
}

describe('applyMessage', () => {
  it('keeps only event messages in the feed', () => {
    let state = initialViewState();
    state = applyMessage(state, frame(0));
    state = applyMessage(state, frame(1));
    expect(state.feed).toHaveLength(0);
    state = applyMessage(state, event(2, 'ActivateDetail'));
    expect(state.feed).toHaveLength(1);
    expect(state.feed[0].label).toBe('activated detail');
  });

  it('caps the feed at the last 50 entries in emission order', () => {
    let state = initialViewState();
    for (let i = 0; i < 60; i++) {
      state = applyMessage(state, event(i, i % 2 ? 'ActivateDetail' : 'ExitDetail', i));
    }
    expect(state.feed).toHaveLength(FEED_LIMIT);
    expect(state.feed[0].seq).toBe(10);
    const seqs = state.feed.map((e) => e.seq);
    expect(seqs).toEqual([...seqs].sort((a, b) => a - b));
  });

  it('counts sequence-order violations', () => {
    let state = initialViewState();
    state = applyMessage(state, frame(5));
    state = applyMessage(state, frame(6));
    expect(state.seqViolations).toBe(0);
    state = applyMessage(state, frame(6));
    expect(state.seqViolations).toBe(1);
    state = applyMessage(state, frame(3));
    expect(state.seqViolations).toBe(2);
  });

  it('stores errors and calibration results as banner lines', () => {
    let state = initialViewState();
    state = applyMessage(state, { type: 'error', seq: 0, code: 'bad_type', detail: 'nope' });
    expect(state.lastError).toBe('bad_type: nope');
    state = applyMessage(state, {
      type: 'calibration_result',
      seq: 1,
      kind: 'model',
      gain: 1.1,
      bias: 0.2,
      residual_rms: 0,
      n_points: 3,
    });
    expect(state.lastCalibration).toContain('gain=1.1000');
  });
});

describe('control round-trip', () => {
  it('marks a sent control pending until a frame echoes it', () => {
    let state = initialViewState();
    state = noteControlSent(state, { target_vergence: 2.0 });
    expect(state.pendingControls.target_vergence).toBe(2.0);

    // a frame still echoing the old value keeps it pending
    state = applyMessage(state, frame(0, { config: config({ target_vergence: 0.5 }) }));
    expect(state.pendingControls.target_vergence).toBe(2.0);

    // the echo acknowledges it
    state = applyMessage(state, frame(1, { config: config({ target_vergence: 2.0 }) }));
    expect(state.pendingControls.target_vergence).toBeUndefined();
  });
});

describe('derived view state', () => {
  it('detailActive follows the server layer field', () => {
    let state = initialViewState();
    state = applyMessage(state, frame(0, { layer: 'portal' }));
    expect(detailActive(state)).toBe(false);
    state = applyMessage(state, frame(1, { layer: 'detail' }));
    expect(detailActive(state)).toBe(true);
  });

  it('cue targets the pending layer when the server reports one', () => {
    let state = initialViewState();
    state = applyMessage(state, frame(0, { pending_layer: 'detail' }));
    expect(cueTargetLayer(state)).toBe('detail');
  });

  it('cue falls back to the next-nearer neighbour, and hides at zero opacity', () => {
    let state = initialViewState();
    state = applyMessage(state, frame(0, { layer: 'portal' }));
    expect(cueTargetLayer(state)).toBe('detail');
    state = applyMessage(state, frame(1, { layer: 'detail' }));
    expect(cueTargetLayer(state)).toBe('portal');
    state = applyMessage(state, frame(2, { cue_opacity: 0 }));
    expect(cueTargetLayer(state)).toBeNull();
  });

  it('status transitions are explicit', () => {
    let state = initialViewState();
    expect(state.status).toBe('connecting');
    state = setStatus(state, 'connected');
    expect(state.status).toBe('connected');
    state = setStatus(state, 'disconnected');
    expect(state.status).toBe('disconnected');
  });
});
