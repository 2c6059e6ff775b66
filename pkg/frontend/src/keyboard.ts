/**
 * Keyboard state to (forward, turn) commands. Arrow keys and WASD;
 * turn +1 is counterclockwise (left), matching the service.
 */

export interface Command {
  forward: number;
  turn: number;
}

const FORWARD_KEYS = new Set(["ArrowUp", "w", "W"]);
const BACK_KEYS = new Set(["ArrowDown", "s", "S"]);
const LEFT_KEYS = new Set(["ArrowLeft", "a", "A"]);
const RIGHT_KEYS = new Set(["ArrowRight", "d", "D"]);

export class KeyboardSteering {
  private pressed = new Set<string>();

  keyDown(key: string): void {
    this.pressed.add(key);
  }

  keyUp(key: string): void {
    this.pressed.delete(key);
  }

  private any(keys: Set<string>): boolean {
    for (const k of keys) if (this.pressed.has(k)) return true;
    return false;
  }

  command(): Command {
    const forward =
      (this.any(FORWARD_KEYS) ? 1 : 0) - (this.any(BACK_KEYS) ? 1 : 0);
    const turn =
      (this.any(LEFT_KEYS) ? 1 : 0) - (this.any(RIGHT_KEYS) ? 1 : 0);
    return { forward, turn };
  }
}
