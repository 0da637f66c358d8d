/** Minimal deterministic PNG writer and rasterizer (no native deps).
 *
 * RGBA8, filter 0 scanlines, zlib via node:zlib; a built-in 5x7 bitmap font
 * covers the lowercase caption charset. Same inputs give byte-identical
 * files, which the determinism contract relies on.
 */

import * as zlib from "node:zlib";

export type Rgba = [number, number, number, number];

const SIGNATURE = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

function chunk(type: string, data: Buffer): Buffer {
  const len = Buffer.alloc(4);
  len.writeUInt32BE(data.length);
  const body = Buffer.concat([Buffer.from(type, "ascii"), data]);
  const crc = Buffer.alloc(4);
  crc.writeUInt32BE(zlib.crc32(body) >>> 0);
  return Buffer.concat([len, body, crc]);
}

export class Canvas {
  readonly width: number;
  readonly height: number;
  private pixels: Uint8Array;

  constructor(width: number, height: number, background: Rgba = [255, 255, 255, 255]) {
    this.width = width;
    this.height = height;
    this.pixels = new Uint8Array(width * height * 4);
    for (let i = 0; i < width * height; i++) this.pixels.set(background, i * 4);
  }

  set(x: number, y: number, color: Rgba): void {
    const xi = Math.round(x);
    const yi = Math.round(y);
    if (xi < 0 || yi < 0 || xi >= this.width || yi >= this.height) return;
    this.pixels.set(color, (yi * this.width + xi) * 4);
  }

  line(x0: number, y0: number, x1: number, y1: number, color: Rgba): void {
    const steps = Math.max(Math.abs(x1 - x0), Math.abs(y1 - y0), 1) * 2;
    for (let i = 0; i <= steps; i++) {
      const t = i / steps;
      this.set(x0 + t * (x1 - x0), y0 + t * (y1 - y0), color);
    }
  }

  disc(cx: number, cy: number, r: number, color: Rgba): void {
    for (let dy = -r; dy <= r; dy++) {
      for (let dx = -r; dx <= r; dx++) {
        if (dx * dx + dy * dy <= r * r) this.set(cx + dx, cy + dy, color);
      }
    }
  }

  rect(x0: number, y0: number, x1: number, y1: number, color: Rgba): void {
    for (let y = Math.min(y0, y1); y <= Math.max(y0, y1); y++) {
      for (let x = Math.min(x0, x1); x <= Math.max(x0, x1); x++) {
        this.set(x, y, color);
      }
    }
  }

  text(x: number, y: number, s: string, color: Rgba): void {
    let cx = Math.round(x);
    for (const ch of s.toLowerCase()) {
      const glyph = FONT[ch] ?? FONT["?"];
      const rows = glyph.split("|");
      for (let r = 0; r < rows.length; r++) {
        for (let c = 0; c < rows[r].length; c++) {
          if (rows[r][c] === "x") this.set(cx + c, y + r, color);
        }
      }
      cx += 6;
    }
  }

  encode(): Buffer {
    const stride = this.width * 4;
    const raw = Buffer.alloc((stride + 1) * this.height);
    for (let y = 0; y < this.height; y++) {
      raw[y * (stride + 1)] = 0; // filter none
      raw.set(this.pixels.subarray(y * stride, (y + 1) * stride), y * (stride + 1) + 1);
    }
    const ihdr = Buffer.alloc(13);
    ihdr.writeUInt32BE(this.width, 0);
    ihdr.writeUInt32BE(this.height, 4);
    ihdr[8] = 8; // bit depth
    ihdr[9] = 6; // RGBA
    return Buffer.concat([
      SIGNATURE,
      chunk("IHDR", ihdr),
      chunk("IDAT", zlib.deflateSync(raw, { level: 9 })),
      chunk("IEND", Buffer.alloc(0)),
    ]);
  }
}

/** 5x7 glyphs, 7 rows of 5 cells, 'x' = ink. Lowercase-only caption set. */
const FONT: Record<string, string> = {
  " ": ".....|.....|.....|.....|.....|.....|.....",
  "0": ".xxx.|x...x|x..xx|x.x.x|xx..x|x...x|.xxx.",
  "1": "..x..|.xx..|..x..|..x..|..x..|..x..|.xxx.",
  "2": ".xxx.|x...x|....x|...x.|..x..|.x...|xxxxx",
  "3": ".xxx.|x...x|....x|..xx.|....x|x...x|.xxx.",
  "4": "...x.|..xx.|.x.x.|x..x.|xxxxx|...x.|...x.",
  "5": "xxxxx|x....|xxxx.|....x|....x|x...x|.xxx.",
  "6": ".xxx.|x....|x....|xxxx.|x...x|x...x|.xxx.",
  "7": "xxxxx|....x|...x.|..x..|..x..|..x..|..x..",
  "8": ".xxx.|x...x|x...x|.xxx.|x...x|x...x|.xxx.",
  "9": ".xxx.|x...x|x...x|.xxxx|....x|....x|.xxx.",
  ".": ".....|.....|.....|.....|.....|..x..|..x..",
  ",": ".....|.....|.....|.....|..x..|..x..|.x...",
  ":": ".....|..x..|..x..|.....|..x..|..x..|.....",
  ";": ".....|..x..|.....|.....|..x..|.x...|.....",
  "=": ".....|.....|xxxxx|.....|xxxxx|.....|.....",
  "+": ".....|..x..|..x..|xxxxx|..x..|..x..|.....",
  "-": ".....|.....|.....|xxxxx|.....|.....|.....",
  "_": ".....|.....|.....|.....|.....|.....|xxxxx",
  "[": ".xxx.|.x...|.x...|.x...|.x...|.x...|.xxx.",
  "]": ".xxx.|...x.|...x.|...x.|...x.|...x.|.xxx.",
  "(": "...x.|..x..|.x...|.x...|.x...|..x..|...x.",
  ")": ".x...|..x..|...x.|...x.|...x.|..x..|.x...",
  "%": "xx..x|xx..x|...x.|..x..|.x...|x..xx|x..xx",
  "/": "....x|....x|...x.|..x..|.x...|x....|x....",
  "<": "...x.|..x..|.x...|x....|.x...|..x..|...x.",
  ">": ".x...|..x..|...x.|....x|...x.|..x..|.x...",
  "*": ".....|x.x.x|.xxx.|xxxxx|.xxx.|x.x.x|.....",
  "?": ".xxx.|x...x|....x|...x.|..x..|.....|..x..",
  "a": ".....|.....|.xxx.|....x|.xxxx|x...x|.xxxx",
  "b": "x....|x....|xxxx.|x...x|x...x|x...x|xxxx.",
  "c": ".....|.....|.xxxx|x....|x....|x....|.xxxx",
  "d": "....x|....x|.xxxx|x...x|x...x|x...x|.xxxx",
  "e": ".....|.....|.xxx.|x...x|xxxxx|x....|.xxxx",
  "f": "..xxx|.x...|xxxx.|.x...|.x...|.x...|.x...",
  "g": ".....|.xxxx|x...x|x...x|.xxxx|....x|.xxx.",
  "h": "x....|x....|xxxx.|x...x|x...x|x...x|x...x",
  "i": "..x..|.....|.xx..|..x..|..x..|..x..|.xxx.",
  "j": "...x.|.....|..xx.|...x.|...x.|x..x.|.xx..",
  "k": "x....|x....|x..x.|x.x..|xx...|x.x..|x..x.",
  "l": ".xx..|..x..|..x..|..x..|..x..|..x..|.xxx.",
  "m": ".....|.....|xx.x.|x.x.x|x.x.x|x.x.x|x.x.x",
  "n": ".....|.....|xxxx.|x...x|x...x|x...x|x...x",
  "o": ".....|.....|.xxx.|x...x|x...x|x...x|.xxx.",
  "p": ".....|xxxx.|x...x|x...x|xxxx.|x....|x....",
  "q": ".....|.xxxx|x...x|x...x|.xxxx|....x|....x",
  "r": ".....|.....|x.xx.|xx..x|x....|x....|x....",
  "s": ".....|.....|.xxxx|x....|.xxx.|....x|xxxx.",
  "t": ".x...|.x...|xxxx.|.x...|.x...|.x..x|..xx.",
  "u": ".....|.....|x...x|x...x|x...x|x...x|.xxxx",
  "v": ".....|.....|x...x|x...x|x...x|.x.x.|..x..",
  "w": ".....|.....|x...x|x.x.x|x.x.x|x.x.x|.x.x.",
  "x": ".....|.....|x...x|.x.x.|..x..|.x.x.|x...x",
  "y": ".....|x...x|x...x|.xxxx|....x|x...x|.xxx.",
  "z": ".....|.....|xxxxx|...x.|..x..|.x...|xxxxx",
};

export const COLORS: Record<string, Rgba> = {
  axis: [40, 40, 40, 255],
  grid: [220, 220, 220, 255],
  series0: [31, 119, 180, 255],
  series1: [255, 127, 14, 255],
  series2: [44, 160, 44, 255],
  series3: [214, 39, 40, 255],
  fit: [150, 60, 160, 255],
  text: [20, 20, 20, 255],
};
