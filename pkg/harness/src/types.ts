// Shared shapes for suite manifests, per-script reports and run reports.

export interface Directive {
  kind: "normal" | "uniform" | "nonzero";
  ranges?: [number, number][];
}

export interface ManifestInput {
  index: number;
  dtype: string;
  shape: number[];
  directive: Directive;
  seed: number;
  omitted: boolean;
}

export interface ManifestCase {
  name: string;
  attributes: Record<string, unknown>;
  inputs: ManifestInput[];
  boundary_category?: string;
}

export interface SuiteManifest {
  schema_version: number;
  operator: string;
  op_code: string;
  profile: string;
  seed: number;
  prng: string;
  cases: ManifestCase[];
}

// Written by an emitted standalone script via --json.
export interface CaseResult {
  name: string;
  status: "ok" | "fail" | "error";
  message: string;
  max_deviation: number;
}

export interface ScriptReport {
  operator: string;
  op_code: string;
  profile: string;
  seed: number;
  total: number;
  passed: number;
  failed: number;
  errors: number;
  cases: CaseResult[];
}

// Written by an emitted standalone script via --dump: flat row-major data.
export interface EncodedTensor {
  dtype: string;
  shape: number[];
  data: unknown[];
}

export interface DumpCase {
  name: string;
  attributes: Record<string, unknown>;
  inputs: (EncodedTensor | null)[];
  outputs: EncodedTensor[];
}

export interface SuiteDump {
  operator: string;
  op_code: string;
  cases: DumpCase[];
}

export interface SuiteResult {
  script: string;
  operator: string;
  opCode: string;
  total: number;
  passed: number;
  // failed counts every non-passing case, so total === passed + failed.
  failed: number;
  failedCases: string[];
  errorCases: string[];
  maxDeviation: number;
  nonzeroViolations: number;
}

export interface RunReport {
  schemaVersion: number;
  total: number;
  passed: number;
  failed: number;
  suites: SuiteResult[];
}
