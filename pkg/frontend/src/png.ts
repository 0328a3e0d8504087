/**
 * Optional PNG rasterization via sharp.
 *
 * sharp ships native binaries; when it is not installed (or its binding fails
 * to load) the CLI falls back to SVG-only output instead of erroring.
 */

interface SharpLike {
  (input: Buffer, options?: { density?: number }): {
    png(): { toBuffer(): Promise<Buffer> };
  };
}

let cached: SharpLike | null | undefined;

export async function loadSharp(): Promise<SharpLike | null> {
  if (cached !== undefined) return cached;
  try {
    // non-literal specifier keeps the build free of a hard type dependency
    const name = "sharp";
    const mod = (await import(name)) as { default?: unknown };
    cached = (mod.default ?? mod) as SharpLike;
  } catch {
    cached = null;
  }
  return cached;
}

/** Rasterize an SVG string, or return null when sharp is unavailable. */
export async function svgToPng(svg: string): Promise<Buffer | null> {
  const sharp = await loadSharp();
  if (sharp === null) return null;
  return sharp(Buffer.from(svg), { density: 144 }).png().toBuffer();
}
