/** RGBA raster with the handful of drawing primitives the plots need. */
import { FONT, GLYPH_H, GLYPH_W } from "./font.js";
import { encodePng } from "./png.js";

export type Color = readonly [number, number, number, number];

export const WHITE: Color = [255, 255, 255, 255];
export const BLACK: Color = [0, 0, 0, 255];
export const GREY: Color = [180, 180, 180, 255];
export const LIGHT_BLUE: Color = [205, 225, 247, 255];
export const SERIES_COLORS: Color[] = [
  [31, 119, 180, 255],
  [214, 39, 40, 255],
  [44, 160, 44, 255],
  [255, 127, 14, 255],
  [148, 103, 189, 255],
  [23, 190, 207, 255],
];

export class Raster {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array;

  constructor(width: number, height: number, background: Color = WHITE) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 4);
    this.fillRect(0, 0, width, height, background);
  }

  set(x: number, y: number, c: Color): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 4;
    this.data[i] = c[0];
    this.data[i + 1] = c[1];
    this.data[i + 2] = c[2];
    this.data[i + 3] = c[3];
  }

  get(x: number, y: number): Color {
    const i = (y * this.width + x) * 4;
    return [this.data[i], this.data[i + 1], this.data[i + 2], this.data[i + 3]];
  }

  fillRect(x0: number, y0: number, w: number, h: number, c: Color): void {
    for (let y = y0; y < y0 + h; y++) {
      for (let x = x0; x < x0 + w; x++) {
        this.set(x, y, c);
      }
    }
  }

  line(x0: number, y0: number, x1: number, y1: number, c: Color): void {
    // Bresenham
    let xa = Math.round(x0);
    let ya = Math.round(y0);
    const xb = Math.round(x1);
    const yb = Math.round(y1);
    const dx = Math.abs(xb - xa);
    const dy = -Math.abs(yb - ya);
    const sx = xa < xb ? 1 : -1;
    const sy = ya < yb ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.set(xa, ya, c);
      if (xa === xb && ya === yb) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        xa += sx;
      }
      if (e2 <= dx) {
        err += dx;
        ya += sy;
      }
    }
  }

  marker(cx: number, cy: number, r: number, c: Color): void {
    const x0 = Math.round(cx);
    const y0 = Math.round(cy);
    for (let y = -r; y <= r; y++) {
      for (let x = -r; x <= r; x++) {
        if (x * x + y * y <= r * r) this.set(x0 + x, y0 + y, c);
      }
    }
  }

  /** 5x7 bitmap text; anything without a glyph renders uppercase or blank. */
  text(x: number, y: number, s: string, c: Color): void {
    let cx = Math.round(x);
    const cy = Math.round(y);
    for (const raw of s) {
      const ch = FONT[raw] ? raw : raw.toUpperCase();
      const glyph = FONT[ch] ?? FONT[" "];
      for (let row = 0; row < GLYPH_H; row++) {
        for (let col = 0; col < GLYPH_W; col++) {
          if ((glyph[row] >> (GLYPH_W - 1 - col)) & 1) {
            this.set(cx + col, cy + row, c);
          }
        }
      }
      cx += GLYPH_W + 1;
    }
  }

  textWidth(s: string): number {
    return s.length * (GLYPH_W + 1) - 1;
  }

  png(): Buffer {
    return encodePng(this.width, this.height, this.data);
  }
}
