/* tslint:disable */
/* eslint-disable */

/**
 * A simulated single- or multi-coil phantom acquisition.
 */
export class Acquisition {
    free(): void;
    [Symbol.dispose](): void;
    groundTruthRgba(): Uint8Array;
    constructor(size: number, coils: number, acceleration: number, center_fraction: number, noise_sigma: number, seed: bigint);
    /**
     * `solver` is `pdac`, `hqs` or `zero-filled`.
     */
    reconstruct(solver: string, schedule: string, predictor: string, iterations: number, lambda: number, inner_iterations: number): Reconstruction;
    /**
     * Sampled columns as a `0`/`1` string.
     */
    readonly mask: string;
    readonly size: number;
}

export class Reconstruction {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Mask of every iteration, one `0`/`1` string per line.
     */
    maskTrace(): string;
    /**
     * PSNR after every iteration.
     */
    psnrTrace(): Float64Array;
    rgba(): Uint8Array;
    readonly nmse: number;
    /**
     * dB; infinite for an exact reconstruction.
     */
    readonly psnr: number;
    readonly ssim: number;
}

/**
 * Budgets `b_0..b_T` of a schedule shape.
 */
export function scheduleBudgets(width: number, m0_budget: number, steps: number, shape: string): Uint32Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_acquisition_free: (a: number, b: number) => void;
    readonly __wbg_reconstruction_free: (a: number, b: number) => void;
    readonly acquisition_groundTruthRgba: (a: number) => [number, number];
    readonly acquisition_mask: (a: number) => [number, number];
    readonly acquisition_new: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
    readonly acquisition_reconstruct: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number];
    readonly acquisition_size: (a: number) => number;
    readonly reconstruction_maskTrace: (a: number) => [number, number];
    readonly reconstruction_nmse: (a: number) => number;
    readonly reconstruction_psnr: (a: number) => number;
    readonly reconstruction_psnrTrace: (a: number) => [number, number];
    readonly reconstruction_rgba: (a: number) => [number, number];
    readonly reconstruction_ssim: (a: number) => number;
    readonly scheduleBudgets: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
