// Post-trial reveal charts: position over time inside the wall envelope,
// the prediction trace with its threshold line, and contact markers.
// The model is a pure function of the revealed log (no smoothing), so it
// can be asserted against the log directly; painting is a thin layer.

import type { RevealLog, TrialEventRecord } from "./protocol.js";

export interface Point {
  x: number;
  y: number;
}

export interface ContactMarker {
  x: number;
  y: number;
  tick: number;
}

export interface ChartModel {
  width: number;
  height: number;
  positionPath: Point[];
  predictionPath: Point[];
  contactMarkers: ContactMarker[];
  wallTopY: number;
  wallBottomY: number;
  thresholdY: number;
  splitY: number; // position panel above, prediction panel below
}

const CONTACT_DETECT = 512;

export function contactOnsets(events: TrialEventRecord[]): TrialEventRecord[] {
  const onsets: TrialEventRecord[] = [];
  let prev = false;
  for (const e of events) {
    const now = e.contact_raw > CONTACT_DETECT;
    if (now && !prev) onsets.push(e);
    prev = now;
  }
  return onsets;
}

export function chartModel(log: RevealLog, width: number, height: number): ChartModel {
  const events = log.events;
  const ticks = Math.max(1, log.summary.duration_ticks - 1);
  const config = log.summary.config as { left_wall?: number; right_wall?: number; threshold?: number };
  const leftWall = config.left_wall ?? 0.04;
  const rightWall = config.right_wall ?? 0.96;
  const threshold = config.threshold ?? 400;

  const splitY = Math.floor(height / 2);
  const xOf = (tick: number) => (tick / ticks) * width;
  // position panel: pos 0 at the panel bottom, 1 at the top
  const posY = (p: number) => splitY - p * splitY;
  // prediction panel: 0 at the chart bottom, scaled to the observed max
  const predMax = Math.max(threshold * 1.5, ...events.map((e) => e.prediction));
  const predY = (v: number) => height - (v / predMax) * (height - splitY);

  return {
    width,
    height,
    positionPath: events.map((e) => ({ x: xOf(e.tick), y: posY(e.shoulder_pos) })),
    predictionPath: events.map((e) => ({ x: xOf(e.tick), y: predY(e.prediction) })),
    contactMarkers: contactOnsets(events).map((e) => ({
      x: xOf(e.tick),
      y: posY(e.shoulder_pos),
      tick: e.tick,
    })),
    wallTopY: posY(rightWall),
    wallBottomY: posY(leftWall),
    thresholdY: predY(threshold),
    splitY,
  };
}

export function drawCharts(ctx: CanvasRenderingContext2D, model: ChartModel): void {
  ctx.clearRect(0, 0, model.width, model.height);

  const path = (points: Point[], style: string) => {
    if (!points.length) return;
    ctx.strokeStyle = style;
    ctx.beginPath();
    ctx.moveTo(points[0].x, points[0].y);
    for (const p of points) ctx.lineTo(p.x, p.y);
    ctx.stroke();
  };
  const hline = (y: number, style: string, dashed = true) => {
    ctx.strokeStyle = style;
    ctx.setLineDash(dashed ? [6, 4] : []);
    ctx.beginPath();
    ctx.moveTo(0, y);
    ctx.lineTo(model.width, y);
    ctx.stroke();
    ctx.setLineDash([]);
  };

  hline(model.wallTopY, "#b33");
  hline(model.wallBottomY, "#b33");
  hline(model.thresholdY, "#b33");
  hline(model.splitY, "#888", false);
  path(model.positionPath, "#226");
  path(model.predictionPath, "#262");
  ctx.fillStyle = "#000";
  for (const m of model.contactMarkers) {
    ctx.beginPath();
    ctx.moveTo(m.x, m.y - 5);
    ctx.lineTo(m.x + 4, m.y);
    ctx.lineTo(m.x, m.y + 5);
    ctx.lineTo(m.x - 4, m.y);
    ctx.closePath();
    ctx.fill();
  }
}
