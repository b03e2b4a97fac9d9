import { describe, expect, test } from "vitest";

import { PendingGate, RequestPending } from "../src/gate.js";

function deferred<T>() {
  let resolve!: (value: T) => void;
  let reject!: (reason: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

describe("per-session pending gate", () => {
  test("a second submission while one is in flight is refused", async () => {
    const gate = new PendingGate();
    const first = deferred<string>();
    const running = gate.run("s1", () => first.promise);

    expect(gate.isPending("s1")).toBe(true);
    await expect(gate.run("s1", async () => "nope")).rejects.toBeInstanceOf(
      RequestPending,
    );

    first.resolve("done");
    await expect(running).resolves.toBe("done");
    expect(gate.isPending("s1")).toBe(false);
  });

  test("the gate reopens after completion and after failure", async () => {
    const gate = new PendingGate();
    await expect(gate.run("s1", async () => 1)).resolves.toBe(1);

    const boom = deferred<number>();
    const failing = gate.run("s1", () => boom.promise);
    boom.reject(new Error("backend down"));
    await expect(failing).rejects.toThrow("backend down");

    // failure must release the slot
    await expect(gate.run("s1", async () => 2)).resolves.toBe(2);
  });

  test("sessions are independent", async () => {
    const gate = new PendingGate();
    const slow = deferred<void>();
    const running = gate.run("s1", () => slow.promise);

    await expect(gate.run("s2", async () => "other")).resolves.toBe("other");
    expect(gate.isPending("s1")).toBe(true);
    expect(gate.isPending("s2")).toBe(false);

    slow.resolve();
    await running;
  });
});
