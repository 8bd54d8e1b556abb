// Mapping between surface meters and canvas pixels. The surface keeps its
// aspect ratio and is letterboxed inside the canvas.

export class SurfaceTransform {
  readonly scale: number; // pixels per meter
  readonly offsetX: number;
  readonly offsetY: number;

  constructor(
    readonly surfaceW: number,
    readonly surfaceH: number,
    readonly canvasW: number,
    readonly canvasH: number,
  ) {
    this.scale = Math.min(canvasW / surfaceW, canvasH / surfaceH);
    this.offsetX = (canvasW - surfaceW * this.scale) / 2;
    this.offsetY = (canvasH - surfaceH * this.scale) / 2;
  }

  toCanvas(x: number, y: number): [number, number] {
    return [this.offsetX + x * this.scale, this.offsetY + y * this.scale];
  }

  toSurface(px: number, py: number): [number, number] {
    return [(px - this.offsetX) / this.scale, (py - this.offsetY) / this.scale];
  }

  /** One pixel expressed in meters; the round-trip error bound. */
  get metersPerPixel(): number {
    return 1 / this.scale;
  }

  insideSurface(x: number, y: number): boolean {
    return x >= 0 && x <= this.surfaceW && y >= 0 && y <= this.surfaceH;
  }
}
