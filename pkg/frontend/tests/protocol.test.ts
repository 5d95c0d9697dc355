import { describe, expect, it } from 'vitest';

import { decodeServerMessage, encodeClientMessage } from '../src/protocol.js';

describe('decodeServerMessage', () => {
  it('parses a frame line', () => {
    const line =
      JSON.stringify({ type: 'frame', seq: 3, tick: 0, t: 0, events: [], config: {} }) + '\n';
    const msg = decodeServerMessage(line);
    expect(msg?.type).toBe('frame');
    expect(msg?.seq).toBe(3);
  });

  it('parses event, error and calibration_result types', () => {
    for (const type of ['event', 'error', 'calibration_result']) {
      const msg = decodeServerMessage(JSON.stringify({ type, seq: 1 }));
      expect(msg?.type).toBe(type);
    }
  });

  it('rejects unknown types, non-objects and junk', () => {
    expect(decodeServerMessage(JSON.stringify({ type: 'surprise', seq: 1 }))).toBeNull();
    expect(decodeServerMessage('[1,2,3]')).toBeNull();
    expect(decodeServerMessage('{nope')).toBeNull();
    expect(decodeServerMessage('')).toBeNull();
    expect(decodeServerMessage('   ')).toBeNull();
  });

  it('rejects messages without a numeric seq', () => {
    expect(decodeServerMessage(JSON.stringify({ type: 'frame' }))).toBeNull();
  });
});

describe('encodeClientMessage', () => {
  it('emits one newline-terminated JSON line', () => {
    const line = encodeClientMessage({ type: 'set_target', vergence: 2.0 });
    expect(line.endsWith('\n')).toBe(true);
    expect(JSON.parse(line)).toEqual({ type: 'set_target', vergence: 2.0 });
    expect(line.indexOf('\n')).toBe(line.length - 1);
  });
});
