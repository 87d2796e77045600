import * as fs from "fs";
import * as path from "path";

export interface AlgorithmFile {
  operator: string;
  path: string;
  entryFunction: string;
  parameters: string[];
}

const ENTRY_RE = /^def\s+([A-Za-z0-9_]+)\s*\(([^)]*)\)\s*:/m;

/** The bundled numpy reference algorithms, keyed by operator name. */
export function referenceCorpus(
  dir: string = path.resolve(__dirname, "..", "algorithms")
): Map<string, AlgorithmFile> {
  const corpus = new Map<string, AlgorithmFile>();
  for (const file of fs.readdirSync(dir).sort()) {
    if (!file.endsWith(".algorithm")) continue;
    const operator = file.replace(/\.algorithm$/, "");
    const text = fs.readFileSync(path.join(dir, file), "utf-8");
    const match = ENTRY_RE.exec(text);
    if (!match) continue;
    corpus.set(operator, {
      operator,
      path: path.join(dir, file),
      entryFunction: match[1],
      parameters: match[2]
        .split(",")
        .map((p) => p.trim())
        .filter((p) => p.length > 0),
    });
  }
  return corpus;
}
