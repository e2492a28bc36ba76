/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_acquisition_free: (a: number, b: number) => void;
export const __wbg_reconstruction_free: (a: number, b: number) => void;
export const acquisition_groundTruthRgba: (a: number) => [number, number];
export const acquisition_mask: (a: number) => [number, number];
export const acquisition_new: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
export const acquisition_reconstruct: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number];
export const acquisition_size: (a: number) => number;
export const reconstruction_maskTrace: (a: number) => [number, number];
export const reconstruction_nmse: (a: number) => number;
export const reconstruction_psnr: (a: number) => number;
export const reconstruction_psnrTrace: (a: number) => [number, number];
export const reconstruction_rgba: (a: number) => [number, number];
export const reconstruction_ssim: (a: number) => number;
export const scheduleBudgets: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
