/** Browser wiring: binds the controller to the page.
 *
 * All state lives in the controller; this file only translates DOM events
 * into controller calls and controller output into DOM updates.
 */

import { ApiClient } from "./api.js";
import { Controller, Sinks } from "./controller.js";
import type { ViewName } from "./wire.js";

const VIEW_SIZE = 512;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function makeSinks(): Sinks {
  const banner = el<HTMLDivElement>("banner");
  const summary = el<HTMLPreElement>("summary");
  const buildState = el<HTMLSpanElement>("build-state");
  const overlay = el<HTMLCanvasElement>("stc-overlay");
  const images: Record<ViewName, HTMLImageElement> = {
    stc: el<HTMLImageElement>("stc-image"),
    mesh: el<HTMLImageElement>("mesh-image"),
  };
  const urls: Partial<Record<ViewName, string>> = {};

  return {
    setImage(view, blob) {
      const url = URL.createObjectURL(blob);
      const old = urls[view];
      urls[view] = url;
      images[view].src = url;
      if (old) URL.revokeObjectURL(old);
    },
    setCursorOutline(points) {
      const ctx = overlay.getContext("2d");
      if (!ctx) return;
      ctx.clearRect(0, 0, overlay.width, overlay.height);
      if (!points || points.length === 0) return;
      ctx.strokeStyle = "#ff4040";
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      points.forEach(([c, r], i) => {
        if (i === 0) ctx.moveTo(c, r);
        else ctx.lineTo(c, r);
      });
      ctx.closePath();
      ctx.stroke();
    },
    setBanner(message) {
      banner.textContent = message ?? "";
      banner.style.display = message ? "block" : "none";
    },
    setSummary(result) {
      if (result === null) {
        summary.textContent = "nothing picked";
        return;
      }
      const lines = [`object ${result.id} at t=${result.t}`];
      for (const [name, value] of Object.entries(result.summary.properties)) {
        lines.push(`  ${name}: ${value === null ? "absent" : value}`);
      }
      const life = result.summary.lifespan;
      if (life) {
        lines.push(
          `  remaining lifespan: ${life.steps}${life.censored ? " (censored)" : ""}`,
        );
      }
      summary.textContent = lines.join("\n");
    },
    setBuildState(state, detail) {
      buildState.textContent = detail ? `${state}: ${detail}` : state;
    },
  };
}

function pixelFromEvent(img: HTMLImageElement, ev: MouseEvent): [number, number] {
  const rect = img.getBoundingClientRect();
  const col = Math.floor(((ev.clientX - rect.left) / rect.width) * VIEW_SIZE);
  const row = Math.floor(((ev.clientY - rect.top) / rect.height) * VIEW_SIZE);
  return [
    Math.min(VIEW_SIZE - 1, Math.max(0, col)),
    Math.min(VIEW_SIZE - 1, Math.max(0, row)),
  ];
}

function bindView(ctl: Controller, view: ViewName, img: HTMLImageElement): void {
  let dragging = false;
  let moved = false;
  let last: [number, number] = [0, 0];

  img.addEventListener("pointerdown", (ev) => {
    dragging = true;
    moved = false;
    last = [ev.clientX, ev.clientY];
    img.setPointerCapture(ev.pointerId);
  });
  img.addEventListener("pointermove", (ev) => {
    if (!dragging) return;
    const dx = ev.clientX - last[0];
    const dy = ev.clientY - last[1];
    if (Math.abs(dx) + Math.abs(dy) < 2) return;
    moved = true;
    last = [ev.clientX, ev.clientY];
    ctl.onOrbit(view, -dx * 0.5, dy * 0.5);
  });
  img.addEventListener("pointerup", (ev) => {
    dragging = false;
    // a drag is a camera move, a plain click is a pick
    if (!moved) void ctl.onClick(view, pixelFromEvent(img, ev));
  });
  img.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    ctl.onZoom(view, ev.deltaY > 0 ? 1.1 : 1 / 1.1);
  });
}

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const ctl = new Controller(api, makeSinks(), {
    viewWidth: VIEW_SIZE,
    viewHeight: VIEW_SIZE,
  });

  await ctl.start();
  const info = ctl.info;
  if (!info) return;

  const slider = el<HTMLInputElement>("time-slider");
  slider.min = String(info.time_range[0]);
  slider.max = String(info.time_range[1]);
  slider.value = String(info.time_range[0]);
  slider.addEventListener("input", () => ctl.onTimeCursor(Number(slider.value)));

  const propSel = el<HTMLSelectElement>("property");
  propSel.append(new Option("(ids only)", ""));
  for (const p of info.properties) {
    propSel.append(new Option(`${p.name} (${p.kind})`, p.name));
  }
  propSel.addEventListener("change", () =>
    ctl.onProperty(propSel.value === "" ? null : propSel.value),
  );

  const gradSel = el<HTMLSelectElement>("gradient");
  for (const g of info.gradients) gradSel.append(new Option(g, g));
  gradSel.value = ctl.session.activeGradient;
  gradSel.addEventListener("change", () => ctl.onGradient(gradSel.value));

  const filterLo = el<HTMLInputElement>("filter-lo");
  const filterHi = el<HTMLInputElement>("filter-hi");
  const filterOn = el<HTMLInputElement>("filter-on");
  const pushFilter = () => {
    if (!filterOn.checked) {
      ctl.onValueFilter(null);
      return;
    }
    ctl.onValueFilter(Number(filterLo.value), Number(filterHi.value));
    // dragging a handle past the other end clamps; reflect that in the UI
    const vf = ctl.session.valueFilter;
    if (vf) {
      filterLo.value = String(vf[0]);
      filterHi.value = String(vf[1]);
    }
  };
  filterLo.addEventListener("input", pushFilter);
  filterHi.addEventListener("input", pushFilter);
  filterOn.addEventListener("change", pushFilter);

  const winLo = el<HTMLInputElement>("window-lo");
  const winHi = el<HTMLInputElement>("window-hi");
  const winOn = el<HTMLInputElement>("window-on");
  const pushWindow = () => {
    if (!winOn.checked) ctl.onTimeWindow(null);
    else ctl.onTimeWindow(Number(winLo.value), Number(winHi.value));
    slider.value = String(ctl.session.timeCursor);
  };
  winLo.addEventListener("input", pushWindow);
  winHi.addEventListener("input", pushWindow);
  winOn.addEventListener("change", pushWindow);

  const num = (id: string) => Number(el<HTMLInputElement>(id).value);
  const planeFields: [string, () => void][] = [
    ["origin-x", () => (ctl.plane.origin[0] = num("origin-x"))],
    ["origin-y", () => (ctl.plane.origin[1] = num("origin-y"))],
    ["origin-z", () => (ctl.plane.origin[2] = num("origin-z"))],
    ["normal-x", () => (ctl.plane.normal[0] = num("normal-x"))],
    ["normal-y", () => (ctl.plane.normal[1] = num("normal-y"))],
    ["normal-z", () => (ctl.plane.normal[2] = num("normal-z"))],
    ["resolution", () => (ctl.plane.resolution = num("resolution"))],
  ];
  const syncPlane = () => {
    el<HTMLInputElement>("origin-x").value = String(ctl.plane.origin[0]);
    el<HTMLInputElement>("origin-y").value = String(ctl.plane.origin[1]);
    el<HTMLInputElement>("origin-z").value = String(ctl.plane.origin[2]);
    el<HTMLInputElement>("normal-x").value = String(ctl.plane.normal[0]);
    el<HTMLInputElement>("normal-y").value = String(ctl.plane.normal[1]);
    el<HTMLInputElement>("normal-z").value = String(ctl.plane.normal[2]);
    el<HTMLInputElement>("resolution").value = String(ctl.plane.resolution);
  };
  for (const [id, apply] of planeFields) {
    el<HTMLInputElement>(id).addEventListener("change", apply);
  }
  for (const axis of ["x", "y", "z"] as const) {
    el<HTMLButtonElement>(`preset-${axis}`).addEventListener("click", () => {
      ctl.setPlanePreset(axis);
      syncPlane();
    });
  }
  el<HTMLButtonElement>("build").addEventListener("click", () => {
    void ctl.buildPlane();
  });
  syncPlane();

  bindView(ctl, "stc", el<HTMLImageElement>("stc-image"));
  bindView(ctl, "mesh", el<HTMLImageElement>("mesh-image"));

  // first build so both panels show something without any clicks
  await ctl.buildPlane();
}

void boot();
