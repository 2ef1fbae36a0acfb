// Velocity input: held arrow keys map to full speed, a gamepad stick axis
// passes through continuously. Both keys held cancel to zero.

const LEFT_KEYS = new Set(["ArrowLeft", "KeyA"]);
const RIGHT_KEYS = new Set(["ArrowRight", "KeyD"]);

export class InputTracker {
  private held = new Set<string>();

  press(code: string): void {
    this.held.add(code);
  }

  release(code: string): void {
    this.held.delete(code);
  }

  clear(): void {
    this.held.clear();
  }

  keyboardVelocity(): number {
    const left = [...this.held].some((k) => LEFT_KEYS.has(k));
    const right = [...this.held].some((k) => RIGHT_KEYS.has(k));
    if (left && right) return 0;
    if (left) return -1;
    if (right) return 1;
    return 0;
  }

  attach(target: { addEventListener(type: string, cb: (e: KeyboardEvent) => void): void }): void {
    target.addEventListener("keydown", (e) => this.press(e.code));
    target.addEventListener("keyup", (e) => this.release(e.code));
  }
}

export function clampVelocity(v: number): number {
  return Math.max(-1, Math.min(1, v));
}

export function gamepadVelocity(axis: number): number {
  return clampVelocity(axis);
}

/** Gamepad stick wins while deflected; otherwise keyboard. */
export function mergedVelocity(keyboard: number, gamepadAxis: number | null): number {
  if (gamepadAxis !== null && gamepadAxis !== 0) return gamepadVelocity(gamepadAxis);
  return clampVelocity(keyboard);
}
