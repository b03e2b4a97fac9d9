/** Compiles slider movements into edit-grammar sentences.
 *
 * The service owns all instruction semantics; the studio never builds plans
 * client side.  A slider movement of +/-N degrees becomes the sentence
 * "turn {object} {direction} {N} degrees", which the service grammar parses
 * through the same path typed instructions take.
 */

export type SliderAxis = "azimuth" | "elevation";

/** Camera convention: +azimuth is right, +elevation is up. */
export function directionFor(axis: SliderAxis, movementDeg: number): string {
  if (axis === "azimuth") {
    return movementDeg > 0 ? "right" : "left";
  }
  return movementDeg > 0 ? "up" : "down";
}

/** Magnitude text the grammar accepts: plain decimal, no sign, no exponent. */
export function formatDegrees(magnitude: number): string {
  // sliders step in whole degrees; tolerate fractional values to one decimal
  const rounded = Math.round(magnitude * 10) / 10;
  return Number.isInteger(rounded) ? String(rounded) : rounded.toFixed(1);
}

/**
 * One slider movement -> one instruction sentence.
 *
 * Throws on blank labels and on movements that round to zero: the grammar
 * rejects zero-degree rotations, so the studio refuses to emit them.
 */
export function compileSliderInstruction(
  objectLabel: string,
  axis: SliderAxis,
  movementDeg: number,
): string {
  const label = objectLabel.trim();
  if (!label) {
    throw new Error("object label must not be blank");
  }
  if (!Number.isFinite(movementDeg)) {
    throw new Error("slider movement must be a finite number of degrees");
  }
  // round the magnitude, not the signed value: +0.25 and -0.25 must both
  // land on 0.3, just in opposite directions
  const magnitude = Math.round(Math.abs(movementDeg) * 10) / 10;
  if (magnitude === 0) {
    throw new Error("slider movement of zero degrees is not an edit");
  }
  const direction = directionFor(axis, movementDeg);
  const amount = formatDegrees(magnitude);
  const unit = magnitude === 1 ? "degree" : "degrees";
  return `turn ${label} ${direction} ${amount} ${unit}`;
}
