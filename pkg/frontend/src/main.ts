// Playground wiring: connection -> reducer -> render loop, plus the
// control panel that turns user input into protocol messages. The focus
// slider is the vergence surrogate: dragging it is "refocusing".

import { SessionConnection, sessionUrl } from './connection.js';
import type { ClientMessage } from './protocol.js';
import {
  applyMessage,
  initialViewState,
  noteControlSent,
  setStatus,
  type ViewState,
} from './viewstate.js';
import { collectDom, render } from './render.js';

function query<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function main(): void {
  const dom = collectDom(document);
  dom.scene.dataset.detailId = 'detail';

  let state: ViewState = initialViewState();
  let dirty = true;
  const mutate = (next: ViewState) => {
    state = next;
    dirty = true;
  };

  const host = window.location.hostname || '127.0.0.1';
  const port = window.location.port || '8765';
  const connection = new SessionConnection(sessionUrl(host, port), {
    onMessage: (msg) => mutate(applyMessage(state, msg)),
    onStatus: (status) => mutate(setStatus(state, status)),
  });
  connection.connect();

  const send = (msg: ClientMessage) => {
    if (!connection.send(msg)) {
      mutate({ ...state, lastError: 'not connected: control dropped' });
    }
  };

  // focus slider: the 1-D vergence surrogate
  const focus = query<HTMLInputElement>('focus-slider');
  const focusValue = query<HTMLElement>('focus-value');
  let lastSent = 0;
  const sendFocus = () => {
    const vergence = Number(focus.value);
    focusValue.textContent = `${vergence.toFixed(2)} D (${(1 / vergence).toFixed(2)} m)`;
    const now = performance.now();
    if (now - lastSent > 33) {
      lastSent = now;
      send({ type: 'set_target', vergence });
      mutate(noteControlSent(state, { target_vergence: vergence }));
    }
  };
  focus.addEventListener('input', sendFocus);
  focus.addEventListener('change', sendFocus);

  const noise = query<HTMLInputElement>('noise-slider');
  const noiseValue = query<HTMLElement>('noise-value');
  noise.addEventListener('change', () => {
    const sigma = Number(noise.value);
    noiseValue.textContent = `${(sigma * 1000).toFixed(1)} mrad`;
    send({ type: 'set_noise', sigma });
    mutate(noteControlSent(state, { noise_sigma: sigma }));
  });

  query<HTMLButtonElement>('btn-reset').addEventListener('click', () => send({ type: 'reset' }));
  for (const [id, scenario] of [
    ['btn-scenario-step', 'step:2.0,0.5,2.0'],
    ['btn-scenario-sweep', 'sweep:0.5,2.0,6.0'],
  ] as const) {
    query<HTMLButtonElement>(id).addEventListener('click', () => {
      send({ type: 'set_scenario', scenario });
      mutate(noteControlSent(state, { scenario }));
    });
  }
  for (const depth of [0.5, 1.0, 2.0]) {
    query<HTMLButtonElement>(`btn-cal-${String(depth).replace('.', '_')}`).addEventListener(
      'click',
      () => send({ type: 'calibrate_point', depth }),
    );
  }
  query<HTMLButtonElement>('btn-cal-fit').addEventListener('click', () => send({ type: 'calibrate_fit' }));

  const loop = () => {
    if (dirty) {
      dirty = false;
      render(state, dom);
    }
    requestAnimationFrame(loop);
  };
  requestAnimationFrame(loop);
}

main();
