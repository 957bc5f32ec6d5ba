export const INITIAL_RETRY_DELAY = 250;
export const MAX_RETRY_DELAY = 4000;

export const sleep = (ms: number): Promise<void> =>
  new Promise((resolve) => setTimeout(resolve, ms));

export function backoffDelay(attempt: number, baseDelayMs = INITIAL_RETRY_DELAY): number {
  // attempt is 1-based; doubles each time up to the cap
  return Math.min(baseDelayMs * Math.pow(2, attempt - 1), MAX_RETRY_DELAY);
}

export interface Attempted<T> {
  value?: T;
  error?: string;
  /** attempts beyond the first; 0 means first try succeeded */
  retries: number;
}

/**
 * Run `fn` up to `maxAttempts` times with exponential backoff. Never throws:
 * callers get either the value or the last error message, plus how many
 * retries were spent, so per-record failures can be recorded instead of
 * aborting a whole run.
 */
export async function attemptWithRetries<T>(
  fn: () => Promise<T>,
  maxAttempts: number,
  baseDelayMs = INITIAL_RETRY_DELAY,
): Promise<Attempted<T>> {
  let lastError = "unknown error";
  for (let attempt = 1; attempt <= maxAttempts; attempt++) {
    try {
      const value = await fn();
      return { value, retries: attempt - 1 };
    } catch (err) {
      lastError = err instanceof Error ? err.message : String(err);
      if (attempt < maxAttempts) {
        await sleep(backoffDelay(attempt, baseDelayMs));
      }
    }
  }
  return { error: lastError, retries: maxAttempts - 1 };
}
