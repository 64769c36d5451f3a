/** Server-sent event subscription for one session.
 *
 * Returns a close function.  In environments without EventSource (tests,
 * very old browsers) this is a no-op; the app then relies on the state it
 * refetches after each of its own mutations.
 */
export function connectEvents(
  baseUrl: string,
  sid: string,
  onEvent: (event: Record<string, unknown>) => void,
): () => void {
  const EventSourceCtor = (
    globalThis as { EventSource?: new (url: string) => EventSource }
  ).EventSource;
  if (!EventSourceCtor) return () => {};
  const source = new EventSourceCtor(`${baseUrl}/events/${sid}`);
  source.onmessage = (msg: MessageEvent) => {
    try {
      onEvent(JSON.parse(String(msg.data)) as Record<string, unknown>);
    } catch {
      // ignore malformed frames; the stream itself stays open
    }
  };
  return () => source.close();
}
