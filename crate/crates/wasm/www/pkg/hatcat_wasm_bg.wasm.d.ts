/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_catexperiment_free: (a: number, b: number) => void;
export const __wbg_groundprofile_free: (a: number, b: number) => void;
export const catexperiment_detect: (a: number, b: number) => [number, number, number];
export const catexperiment_detections: (a: number) => [number, number];
export const catexperiment_new: (a: number, b: number) => [number, number, number];
export const catexperiment_peaks: (a: number, b: number) => [number, number, number, number];
export const catexperiment_phaseGrid: (a: number, b: number) => [number, number, number, number];
export const catexperiment_remainingAtoms: (a: number) => number;
export const groundprofile_energy: (a: number) => number;
export const groundprofile_new: (a: number, b: number, c: number) => [number, number, number];
export const groundprofile_residual: (a: number) => number;
export const groundprofile_total: (a: number) => number;
export const groundprofile_values: (a: number) => [number, number];
export const hatDistribution: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
