/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_democode_free: (a: number, b: number) => void;
export const bitplanes_msb_first: (a: number, b: number) => [number, number, number, number];
export const dct_syndromes: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const democode_chaos_ratio: (a: number, b: number, c: number) => [number, number, number];
export const democode_classify: (a: number, b: number, c: number) => [number, number, number, number];
export const democode_info: (a: number) => [number, number];
export const democode_load_model: (a: number, b: number, c: number) => [number, number];
export const democode_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
export const democode_syndrome_len: (a: number) => number;
export const democode_syndromes: (a: number, b: number, c: number) => [number, number, number, number];
export const quantized_coefficients: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const reconstruct_preview: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
