/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const oracleRiskCurve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const reluCurve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const softThresholdCurve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
