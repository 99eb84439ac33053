/**
 * Minimal RGB pixel canvas with deterministic PNG encoding.
 *
 * Everything is drawn into a flat Uint8Array and deflated with fixed
 * settings, so the same drawing commands always produce identical
 * bytes — reruns of a figure are byte-stable.
 */

import { deflateSync } from "node:zlib";

export type RGB = [number, number, number];

// 5x7 uppercase bitmap font; text is uppercased before lookup.
const GLYPHS: Record<string, string[]> = {
  " ": ["     ", "     ", "     ", "     ", "     ", "     ", "     "],
  "0": [" XXX ", "X   X", "X  XX", "X X X", "XX  X", "X   X", " XXX "],
  "1": ["  X  ", " XX  ", "  X  ", "  X  ", "  X  ", "  X  ", " XXX "],
  "2": [" XXX ", "X   X", "    X", "   X ", "  X  ", " X   ", "XXXXX"],
  "3": [" XXX ", "X   X", "    X", "  XX ", "    X", "X   X", " XXX "],
  "4": ["   X ", "  XX ", " X X ", "X  X ", "XXXXX", "   X ", "   X "],
  "5": ["XXXXX", "X    ", "XXXX ", "    X", "    X", "X   X", " XXX "],
  "6": [" XXX ", "X    ", "X    ", "XXXX ", "X   X", "X   X", " XXX "],
  "7": ["XXXXX", "    X", "   X ", "  X  ", " X   ", " X   ", " X   "],
  "8": [" XXX ", "X   X", "X   X", " XXX ", "X   X", "X   X", " XXX "],
  "9": [" XXX ", "X   X", "X   X", " XXXX", "    X", "    X", " XXX "],
  A: [" XXX ", "X   X", "X   X", "XXXXX", "X   X", "X   X", "X   X"],
  B: ["XXXX ", "X   X", "X   X", "XXXX ", "X   X", "X   X", "XXXX "],
  C: [" XXX ", "X   X", "X    ", "X    ", "X    ", "X   X", " XXX "],
  D: ["XXXX ", "X   X", "X   X", "X   X", "X   X", "X   X", "XXXX "],
  E: ["XXXXX", "X    ", "X    ", "XXXX ", "X    ", "X    ", "XXXXX"],
  F: ["XXXXX", "X    ", "X    ", "XXXX ", "X    ", "X    ", "X    "],
  G: [" XXX ", "X   X", "X    ", "X XXX", "X   X", "X   X", " XXXX"],
  H: ["X   X", "X   X", "X   X", "XXXXX", "X   X", "X   X", "X   X"],
  I: [" XXX ", "  X  ", "  X  ", "  X  ", "  X  ", "  X  ", " XXX "],
  J: ["  XXX", "   X ", "   X ", "   X ", "   X ", "X  X ", " XX  "],
  K: ["X   X", "X  X ", "X X  ", "XX   ", "X X  ", "X  X ", "X   X"],
  L: ["X    ", "X    ", "X    ", "X    ", "X    ", "X    ", "XXXXX"],
  M: ["X   X", "XX XX", "X X X", "X X X", "X   X", "X   X", "X   X"],
  N: ["X   X", "XX  X", "X X X", "X  XX", "X   X", "X   X", "X   X"],
  O: [" XXX ", "X   X", "X   X", "X   X", "X   X", "X   X", " XXX "],
  P: ["XXXX ", "X   X", "X   X", "XXXX ", "X    ", "X    ", "X    "],
  Q: [" XXX ", "X   X", "X   X", "X   X", "X X X", "X  X ", " XX X"],
  R: ["XXXX ", "X   X", "X   X", "XXXX ", "X X  ", "X  X ", "X   X"],
  S: [" XXXX", "X    ", "X    ", " XXX ", "    X", "    X", "XXXX "],
  T: ["XXXXX", "  X  ", "  X  ", "  X  ", "  X  ", "  X  ", "  X  "],
  U: ["X   X", "X   X", "X   X", "X   X", "X   X", "X   X", " XXX "],
  V: ["X   X", "X   X", "X   X", "X   X", "X   X", " X X ", "  X  "],
  W: ["X   X", "X   X", "X   X", "X X X", "X X X", "XX XX", "X   X"],
  X: ["X   X", "X   X", " X X ", "  X  ", " X X ", "X   X", "X   X"],
  Y: ["X   X", "X   X", " X X ", "  X  ", "  X  ", "  X  ", "  X  "],
  Z: ["XXXXX", "    X", "   X ", "  X  ", " X   ", "X    ", "XXXXX"],
  "-": ["     ", "     ", "     ", "XXXXX", "     ", "     ", "     "],
  "+": ["     ", "  X  ", "  X  ", "XXXXX", "  X  ", "  X  ", "     "],
  ".": ["     ", "     ", "     ", "     ", "     ", " XX  ", " XX  "],
  ",": ["     ", "     ", "     ", "     ", "  XX ", "  XX ", " X   "],
  ":": ["     ", " XX  ", " XX  ", "     ", " XX  ", " XX  ", "     "],
  "/": ["    X", "    X", "   X ", "  X  ", " X   ", "X    ", "X    "],
  "(": ["   X ", "  X  ", " X   ", " X   ", " X   ", "  X  ", "   X "],
  ")": [" X   ", "  X  ", "   X ", "   X ", "   X ", "  X  ", " X   "],
  "=": ["     ", "     ", "XXXXX", "     ", "XXXXX", "     ", "     "],
  "%": ["XX  X", "XX  X", "   X ", "  X  ", " X   ", "X  XX", "X  XX"],
  _: ["     ", "     ", "     ", "     ", "     ", "     ", "XXXXX"],
  "'": ["  X  ", "  X  ", "     ", "     ", "     ", "     ", "     "],
  "?": [" XXX ", "X   X", "    X", "   X ", "  X  ", "     ", "  X  "],
};

export const GLYPH_W = 6; // 5 px + 1 px spacing
export const GLYPH_H = 7;

export class Canvas {
  readonly width: number;
  readonly height: number;
  private data: Uint8Array;

  constructor(width: number, height: number, background: RGB = [255, 255, 255]) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 3);
    for (let i = 0; i < width * height; i++) {
      this.data[3 * i] = background[0];
      this.data[3 * i + 1] = background[1];
      this.data[3 * i + 2] = background[2];
    }
  }

  set(x: number, y: number, c: RGB): void {
    x = Math.round(x);
    y = Math.round(y);
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = 3 * (y * this.width + x);
    this.data[i] = c[0];
    this.data[i + 1] = c[1];
    this.data[i + 2] = c[2];
  }

  line(x0: number, y0: number, x1: number, y1: number, c: RGB): void {
    // Bresenham over rounded endpoints
    let ax = Math.round(x0);
    let ay = Math.round(y0);
    const bx = Math.round(x1);
    const by = Math.round(y1);
    const dx = Math.abs(bx - ax);
    const dy = -Math.abs(by - ay);
    const sx = ax < bx ? 1 : -1;
    const sy = ay < by ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.set(ax, ay, c);
      if (ax === bx && ay === by) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        ax += sx;
      }
      if (e2 <= dx) {
        err += dx;
        ay += sy;
      }
    }
  }

  thickLine(x0: number, y0: number, x1: number, y1: number, c: RGB): void {
    this.line(x0, y0, x1, y1, c);
    this.line(x0, y0 + 1, x1, y1 + 1, c);
  }

  dashedVLine(x: number, y0: number, y1: number, c: RGB, on = 4, off = 3): void {
    const top = Math.min(y0, y1);
    const bottom = Math.max(y0, y1);
    for (let y = top; y <= bottom; y += on + off) {
      for (let k = 0; k < on && y + k <= bottom; k++) this.set(x, y + k, c);
    }
  }

  fillRect(x: number, y: number, w: number, h: number, c: RGB): void {
    for (let yy = y; yy < y + h; yy++) {
      for (let xx = x; xx < x + w; xx++) this.set(xx, yy, c);
    }
  }

  rect(x: number, y: number, w: number, h: number, c: RGB): void {
    this.line(x, y, x + w - 1, y, c);
    this.line(x, y + h - 1, x + w - 1, y + h - 1, c);
    this.line(x, y, x, y + h - 1, c);
    this.line(x + w - 1, y, x + w - 1, y + h - 1, c);
  }

  text(x: number, y: number, s: string, c: RGB): void {
    let cx = Math.round(x);
    for (const raw of s.toUpperCase()) {
      const glyph = GLYPHS[raw] ?? GLYPHS["?"];
      for (let row = 0; row < GLYPH_H; row++) {
        for (let col = 0; col < 5; col++) {
          if (glyph[row][col] === "X") this.set(cx + col, y + row, c);
        }
      }
      cx += GLYPH_W;
    }
  }

  static textWidth(s: string): number {
    return s.length * GLYPH_W;
  }

  /** Encode as an 8-bit RGB PNG with fixed deflate settings. */
  toPng(): Buffer {
    const raw = Buffer.alloc((this.width * 3 + 1) * this.height);
    for (let y = 0; y < this.height; y++) {
      const rowStart = y * (this.width * 3 + 1);
      raw[rowStart] = 0; // filter: none
      for (let x = 0; x < this.width * 3; x++) {
        raw[rowStart + 1 + x] = this.data[y * this.width * 3 + x];
      }
    }
    const idat = deflateSync(raw, { level: 9 });

    const ihdr = Buffer.alloc(13);
    ihdr.writeUInt32BE(this.width, 0);
    ihdr.writeUInt32BE(this.height, 4);
    ihdr[8] = 8; // bit depth
    ihdr[9] = 2; // color type: RGB
    ihdr[10] = 0;
    ihdr[11] = 0;
    ihdr[12] = 0;

    return Buffer.concat([
      Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
      chunk("IHDR", ihdr),
      chunk("IDAT", idat),
      chunk("IEND", Buffer.alloc(0)),
    ]);
  }
}

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(buf: Buffer): number {
  let c = 0xffffffff;
  for (const byte of buf) c = CRC_TABLE[(c ^ byte) & 0xff] ^ (c >>> 8);
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, data: Buffer): Buffer {
  const len = Buffer.alloc(4);
  len.writeUInt32BE(data.length, 0);
  const body = Buffer.concat([Buffer.from(type, "ascii"), data]);
  const crc = Buffer.alloc(4);
  crc.writeUInt32BE(crc32(body), 0);
  return Buffer.concat([len, body, crc]);
}

export const PALETTE: RGB[] = [
  [31, 119, 180],
  [255, 127, 14],
  [44, 160, 44],
  [214, 39, 40],
  [148, 103, 189],
  [140, 86, 75],
  [227, 119, 194],
  [127, 127, 127],
  [188, 189, 34],
  [23, 190, 207],
  [174, 199, 232],
  [255, 187, 120],
  [152, 223, 138],
  [255, 152, 150],
  [197, 176, 213],
  [196, 156, 148],
];

export const BLACK: RGB = [0, 0, 0];
export const GRAY: RGB = [200, 200, 200];
export const DARK_GRAY: RGB = [90, 90, 90];
export const RED: RGB = [214, 39, 40];
