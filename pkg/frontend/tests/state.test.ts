import { describe, expect, it, vi } from "vitest";

import { clampTimeRange, clampWindows, debounce, initialState, RequestGate, windowCount } from "../src/state.js";

describe("view state bounds", () => {
  it("window count follows T - L + 1", () => {
    const state = initialState();
    state.T = 10;
    state.L = 4;
    expect(windowCount(state)).toBe(7);
    state.L = 11;
    expect(windowCount(state)).toBe(0);
  });

  it("clamps window selections to the dataset", () => {
    const state = initialState();
    state.T = 6;
    state.L = 2;
    expect(clampWindows(state, [-1, 0, 3, 4, 5, 99])).toEqual([0, 3, 4]);
  });

  it("clamps time ranges and orders endpoints", () => {
    const state = initialState();
    state.T = 10;
    expect(clampTimeRange(state, [8, 3])).toEqual([3, 8]);
    expect(clampTimeRange(state, [-5, 99])).toEqual([0, 9]);
  });
});

describe("RequestGate", () => {
  it("keeps only the latest token current (last-write-wins)", () => {
    const gate = new RequestGate();
    const first = gate.issue();
    const second = gate.issue();
    expect(gate.isCurrent(first)).toBe(false);
    expect(gate.isCurrent(second)).toBe(true);
  });
});

describe("debounce", () => {
  it("collapses bursts into the trailing call", () => {
    vi.useFakeTimers();
    const calls: number[] = [];
    const push = debounce((v: number) => calls.push(v), 100);
    push(1);
    push(2);
    vi.advanceTimersByTime(60);
    push(3);
    vi.advanceTimersByTime(99);
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(1);
    expect(calls).toEqual([3]);
    vi.useRealTimers();
  });
});
