/**
 * Helpers for aligning latent-cell heatmaps with the image canvas.
 * The mask PNG has one pixel per latent cell; cell (row, col) covers the
 * stride-by-stride pixel block centered on image position
 * (col * stride, row * stride).
 */

export interface Cell {
  row: number;
  col: number;
}

export interface PixelRect {
  x: number;
  y: number;
  width: number;
  height: number;
}

/** Index of the brightest cell; the lowest (row, col) wins exact ties. */
export function argmaxCell(
  values: ArrayLike<number>,
  width: number,
  height: number
): Cell {
  if (width < 1 || height < 1 || values.length !== width * height) {
    throw new Error("mask dimensions do not match the value count");
  }
  let best = 0;
  for (let i = 1; i < values.length; i++) {
    if (values[i] > values[best]) best = i;
  }
  return { row: Math.floor(best / width), col: best % width };
}

/**
 * Image-pixel rectangle covered by a latent cell.  Cell centers sit at
 * integer latent coordinates, i.e. at image coordinates divisible by the
 * stride, so the block extends half a stride to each side.
 */
export function cellToPixelRect(cell: Cell, stride: number): PixelRect {
  return {
    x: cell.col * stride - stride / 2,
    y: cell.row * stride - stride / 2,
    width: stride,
    height: stride,
  };
}

/** Compose a grayscale mask over RGBA canvas data, hot-alpha style. */
export function compositeMask(
  image: Uint8ClampedArray,
  mask: ArrayLike<number>,
  imageWidth: number,
  imageHeight: number,
  maskWidth: number,
  maskHeight: number,
  stride: number,
  alpha = 0.6
): void {
  for (let y = 0; y < imageHeight; y++) {
    // image pixel y maps to the latent cell whose center is nearest
    const row = Math.min(Math.round(y / stride), maskHeight - 1);
    for (let x = 0; x < imageWidth; x++) {
      const col = Math.min(Math.round(x / stride), maskWidth - 1);
      const w = (mask[row * maskWidth + col] / 255) * alpha;
      if (w === 0) continue;
      const i = (y * imageWidth + x) * 4;
      image[i] = image[i] * (1 - w) + 255 * w; // red-hot overlay
      image[i + 1] = image[i + 1] * (1 - w) + 64 * w;
      image[i + 2] = image[i + 2] * (1 - w);
    }
  }
}
