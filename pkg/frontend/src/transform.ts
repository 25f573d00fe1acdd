/**
 * Zoom/pan view transform and the screen <-> image coordinate conversions.
 *
 * Convention: screen = image * zoom + pan, with pan in screen pixels and
 * image coordinates in source-image pixels, origin top-left. The inverse is
 * exact at any zoom up to floating-point rounding, so click positions
 * round-trip well below half a pixel.
 */

export interface Transform {
  zoom: number;
  panX: number;
  panY: number;
}

export interface Point {
  x: number;
  y: number;
}

export const IDENTITY: Transform = { zoom: 1, panX: 0, panY: 0 };

export function imageToScreen(p: Point, t: Transform): Point {
  return { x: p.x * t.zoom + t.panX, y: p.y * t.zoom + t.panY };
}

export function screenToImage(p: Point, t: Transform): Point {
  return { x: (p.x - t.panX) / t.zoom, y: (p.y - t.panY) / t.zoom };
}

/** Rescale around a fixed screen point so it maps to the same image point. */
export function zoomAt(t: Transform, screenPoint: Point, factor: number,
                       minZoom = 0.25, maxZoom = 32): Transform {
  const zoom = Math.min(maxZoom, Math.max(minZoom, t.zoom * factor));
  const anchor = screenToImage(screenPoint, t);
  return {
    zoom,
    panX: screenPoint.x - anchor.x * zoom,
    panY: screenPoint.y - anchor.y * zoom,
  };
}

export function panBy(t: Transform, dx: number, dy: number): Transform {
  return { zoom: t.zoom, panX: t.panX + dx, panY: t.panY + dy };
}
