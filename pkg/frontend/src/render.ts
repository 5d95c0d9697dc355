// DOM rendering. Pure projection of ViewState: layers, cue, gauge, and
// feed are drawn from the latest frame's fields; nothing here decides when
// a switch or cue change happens.

import type { ViewState } from './viewstate.js';
import { cueTargetLayer, detailActive } from './viewstate.js';

export interface Dom {
  statusBanner: HTMLElement;
  errorLine: HTMLElement;
  scene: HTMLElement;
  portalCard: HTMLElement;
  detailCard: HTMLElement;
  cue: HTMLElement;
  gaugeRaw: HTMLElement;
  gaugeFiltered: HTMLElement;
  gaugeMarkers: HTMLElement;
  readout: HTMLElement;
  feedList: HTMLElement;
  calibrationLine: HTMLElement;
}

export function collectDom(root: Document): Dom {
  const get = (id: string): HTMLElement => {
    const el = root.getElementById(id);
    if (!el) throw new Error(`missing element #${id}`);
    return el;
  };
  return {
    statusBanner: get('status-banner'),
    errorLine: get('error-line'),
    scene: get('scene'),
    portalCard: get('portal-card'),
    detailCard: get('detail-card'),
    cue: get('cue'),
    gaugeRaw: get('gauge-raw'),
    gaugeFiltered: get('gauge-filtered'),
    gaugeMarkers: get('gauge-markers'),
    readout: get('readout'),
    feedList: get('feed-list'),
    calibrationLine: get('calibration-line'),
  };
}

// display range of the vergence gauge, diopters (presentation only)
const GAUGE_MIN = 0.2;
const GAUGE_MAX = 2.8;

function gaugeFraction(vergence: number): number {
  const f = (vergence - GAUGE_MIN) / (GAUGE_MAX - GAUGE_MIN);
  return Math.max(0, Math.min(1, f));
}

function fmt(x: number | null | undefined, digits = 2): string {
  return x == null ? '--' : x.toFixed(digits);
}

export function render(state: ViewState, dom: Dom): void {
  dom.statusBanner.textContent = state.status;
  dom.statusBanner.className = `banner ${state.status}`;
  dom.errorLine.textContent = state.lastError ?? '';
  dom.calibrationLine.textContent = state.lastCalibration ?? '';

  const frame = state.frame;
  if (!frame) return;

  // layer cards: the active layer is crisp and forward, the other recedes
  const inDetail = detailActive(state);
  dom.detailCard.classList.toggle('active', inDetail);
  dom.portalCard.classList.toggle('active', !inDetail);
  dom.scene.dataset.layer = frame.layer;

  // guidance cue: green circle on the layer the server says it points at
  const cueLayer = cueTargetLayer(state);
  if (cueLayer && frame.cue_opacity > 0) {
    dom.cue.style.opacity = String(frame.cue_opacity);
    dom.cue.style.display = 'block';
    const targetCard = cueLayer === dom.scene.dataset.detailId ? dom.detailCard : dom.portalCard;
    const sceneBox = dom.scene.getBoundingClientRect();
    const box = targetCard.getBoundingClientRect();
    dom.cue.style.left = `${box.left - sceneBox.left + box.width / 2}px`;
    dom.cue.style.top = `${box.top - sceneBox.top + box.height / 2}px`;
  } else {
    dom.cue.style.display = 'none';
  }

  // vergence gauge: raw tick, filtered needle, layer markers from the echo
  if (frame.raw_vergence != null) {
    dom.gaugeRaw.style.display = 'block';
    dom.gaugeRaw.style.left = `${100 * gaugeFraction(frame.raw_vergence)}%`;
  } else {
    dom.gaugeRaw.style.display = 'none';
  }
  if (frame.vergence != null) {
    dom.gaugeFiltered.style.display = 'block';
    dom.gaugeFiltered.style.left = `${100 * gaugeFraction(frame.vergence)}%`;
  } else {
    dom.gaugeFiltered.style.display = 'none';
  }
  if (!dom.gaugeMarkers.hasChildNodes()) {
    for (const depth of frame.config.layer_depths) {
      const marker = document.createElement('div');
      marker.className = 'gauge-marker';
      marker.style.left = `${100 * gaugeFraction(1 / depth)}%`;
      marker.title = `${depth} m`;
      dom.gaugeMarkers.appendChild(marker);
    }
  }

  dom.readout.textContent =
    `depth ${fmt(frame.depth)} m | vergence ${fmt(frame.vergence)} D | ` +
    `${frame.quality}${frame.rejected ? ' (outlier rejected)' : ''} | ` +
    `layer ${frame.layer} | switches ${frame.switch_count} | cue ${frame.cue_opacity.toFixed(2)}`;

  // event feed, newest first, server emission order within
  const items = state.feed
    .slice()
    .reverse()
    .map((e) => `<li class="feed-${e.kind}"><span class="t">${e.t.toFixed(2)}s</span> ${e.label}</li>`)
    .join('');
  if (dom.feedList.innerHTML !== items) {
    dom.feedList.innerHTML = items;
  }
}
