/* tslint:disable */
/* eslint-disable */

/**
 * Bundled instances with their nodes and arcs.
 */
export function fixture_info(name: string): string;

/**
 * P(sum of exponentials with the given distinct rates <= t) on a grid of
 * `points + 1` times in [0, horizon].
 */
export function hypoexp_curve(rates: Float64Array, horizon: number, points: number): string;

/**
 * Route from `origin` to `dest` with every arc free at departure.
 * `algo` is `edsger-star`, `ds` (static maximum speeds) or `dd` (current speeds).
 */
export function route(name: string, origin: string, dest: string, algo: string): string;

/**
 * Expected time to cover `points + 1` evenly spaced distances along `arc`,
 * starting from every arc free, in the arc's own neighbourhood space.
 */
export function transit_curve(name: string, arc: number, points: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly fixture_info: (a: number, b: number) => [number, number, number, number];
    readonly hypoexp_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly route: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly transit_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
