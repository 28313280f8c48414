/* tslint:disable */
/* eslint-disable */

/**
 * A live PEG-constructed code plus the trained classifier head.
 */
export class DemoCode {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * The chaos ratio D_f of this image under the code: summed ApEn of
     * the syndromes over summed ApEn of the raw planes. NaN when the
     * image is completely flat.
     */
    chaos_ratio(pixels: Uint8Array): number;
    /**
     * Class probabilities for the drawn image (requires a loaded model).
     */
    classify(pixels: Uint8Array): Float64Array;
    /**
     * JSON summary of the constructed code.
     */
    info(): string;
    /**
     * Attach a checkpoint (the bytes of a `model.ckpt` trained natively).
     */
    load_model(bytes: Uint8Array): void;
    /**
     * Construct the parity-check matrix in the page. `rate` is one of
     * "1/4", "1/2", "3/5", "3/4".
     */
    constructor(rate: string, irregular: boolean, seed: bigint);
    /**
     * Syndrome length M.
     */
    syndrome_len(): number;
    /**
     * Syndromes of the eight pixel bitplanes, MSB plane first
     * (8 * M bytes of 0/1).
     */
    syndromes(pixels: Uint8Array): Uint8Array;
}

/**
 * Eight bitplanes of a 32x32 image, MSB first, as 0/1 bytes
 * (8 * 1024 entries).
 */
export function bitplanes_msb_first(pixels: Uint8Array): Uint8Array;

/**
 * Syndromes of the coefficient sign/magnitude planes under `code`
 * (sign plane first). Only valid for tau = 8, where plane length is N.
 */
export function dct_syndromes(code: DemoCode, pixels: Uint8Array, qf: number): Uint8Array;

/**
 * Quantized DCT coefficients of the image at the given quality factor
 * and truncation (8 = off), on the full 32x32 grid (zeros where
 * truncated).
 */
export function quantized_coefficients(pixels: Uint8Array, qf: number, tau: number): Int32Array;

/**
 * The image the quantized (and possibly truncated) coefficients still
 * describe: dequantize, inverse DCT, undo the level shift.
 */
export function reconstruct_preview(pixels: Uint8Array, qf: number, tau: number): Uint8Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_democode_free: (a: number, b: number) => void;
    readonly bitplanes_msb_first: (a: number, b: number) => [number, number, number, number];
    readonly dct_syndromes: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly democode_chaos_ratio: (a: number, b: number, c: number) => [number, number, number];
    readonly democode_classify: (a: number, b: number, c: number) => [number, number, number, number];
    readonly democode_info: (a: number) => [number, number];
    readonly democode_load_model: (a: number, b: number, c: number) => [number, number];
    readonly democode_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
    readonly democode_syndrome_len: (a: number) => number;
    readonly democode_syndromes: (a: number, b: number, c: number) => [number, number, number, number];
    readonly quantized_coefficients: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly reconstruct_preview: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
