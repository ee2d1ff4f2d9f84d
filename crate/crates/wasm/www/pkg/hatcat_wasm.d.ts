/* tslint:disable */
/* eslint-disable */

/**
 * A detection run that advances on demand.
 */
export class CatExperiment {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Returns the total number of detections so far.
     */
    detect(count: number): number;
    constructor(atoms_per_site: number, seed: number);
    peaks(m: number): Float64Array;
    /**
     * `m²` row-major values over `(φ_ba, φ_cb)`, mean 1.
     */
    phaseGrid(m: number): Float64Array;
    /**
     * Detected phases `u` in order.
     */
    readonly detections: Float64Array;
    readonly remainingAtoms: number;
}

export class GroundProfile {
    free(): void;
    [Symbol.dispose](): void;
    constructor(atoms: number, u_over_j: number, periodic: boolean);
    /**
     * In units where `max(J, U) = 1`.
     */
    readonly energy: number;
    readonly residual: number;
    readonly total: number;
    /**
     * `(T+1)²` row-major values of `P(N_α, N_β)`.
     */
    readonly values: Float64Array;
}

export function hatDistribution(atoms_per_site: number, xi: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_catexperiment_free: (a: number, b: number) => void;
    readonly __wbg_groundprofile_free: (a: number, b: number) => void;
    readonly catexperiment_detect: (a: number, b: number) => [number, number, number];
    readonly catexperiment_detections: (a: number) => [number, number];
    readonly catexperiment_new: (a: number, b: number) => [number, number, number];
    readonly catexperiment_peaks: (a: number, b: number) => [number, number, number, number];
    readonly catexperiment_phaseGrid: (a: number, b: number) => [number, number, number, number];
    readonly catexperiment_remainingAtoms: (a: number) => number;
    readonly groundprofile_energy: (a: number) => number;
    readonly groundprofile_new: (a: number, b: number, c: number) => [number, number, number];
    readonly groundprofile_residual: (a: number) => number;
    readonly groundprofile_total: (a: number) => number;
    readonly groundprofile_values: (a: number) => [number, number];
    readonly hatDistribution: (a: number, b: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
