// Console settings and the bounds the gateway enforces server-side. The
// controls validate locally with the same rules so a bad value never
// round-trips just to bounce.

export interface ConsoleSettings {
  delaySeconds: number;
  poseRateHz: number;
}

export const DEFAULT_SETTINGS: ConsoleSettings = {
  delaySeconds: 3.0,
  poseRateHz: 30.0,
};

export const POSE_RATE_MIN = 1.0;
export const POSE_RATE_MAX = 30.0;

export class SettingsError extends Error {}

// Returns human-readable violations; empty means valid.
export function settingsViolations(s: ConsoleSettings): string[] {
  const problems: string[] = [];
  if (!Number.isFinite(s.delaySeconds) || s.delaySeconds < 0.0) {
    problems.push(`delay_seconds: ${s.delaySeconds} must be >= 0`);
  }
  if (
    !Number.isFinite(s.poseRateHz) ||
    s.poseRateHz < POSE_RATE_MIN ||
    s.poseRateHz > POSE_RATE_MAX
  ) {
    problems.push(
      `pose_rate_hz: ${s.poseRateHz} outside [${POSE_RATE_MIN}, ${POSE_RATE_MAX}]`,
    );
  }
  return problems;
}

export function checkSettings(s: ConsoleSettings): ConsoleSettings {
  const problems = settingsViolations(s);
  if (problems.length > 0) {
    throw new SettingsError(problems.join("; "));
  }
  return s;
}

// Clamp a slider/input value into the legal range for live dragging; the
// commit path still goes through checkSettings.
export function clampSettings(s: ConsoleSettings): ConsoleSettings {
  return {
    delaySeconds: Math.max(0.0, s.delaySeconds),
    poseRateHz: Math.min(POSE_RATE_MAX, Math.max(POSE_RATE_MIN, s.poseRateHz)),
  };
}
