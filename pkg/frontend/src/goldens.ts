// Parser for the shared golden-vector file. One entry per line:
//   <hex>  <FrameKind>  <field>=<value> ...     expected decode
//   <hex>  !  <ErrorKind>                       expected failure
// Values are decimal; list fields are comma-separated.

export interface GoldenVector {
  lineNo: number;
  hex: string;
  kind?: string;
  fields?: Record<string, number | number[]>;
  expectError?: string;
}

export function parseVectors(text: string): GoldenVector[] {
  const out: GoldenVector[] = [];
  text.split("\n").forEach((line, index) => {
    const clean = line.trim();
    if (!clean || clean.startsWith("#")) return;
    const parts = clean.split(/\s+/);
    if (parts.length < 2) {
      throw new Error(`vector line ${index + 1}: too few columns`);
    }
    const [hex, tag] = [parts[0]!, parts[1]!];
    if (tag === "!") {
      if (parts.length !== 3) {
        throw new Error(`vector line ${index + 1}: expected error name`);
      }
      out.push({ lineNo: index + 1, hex, expectError: parts[2]! });
      return;
    }
    const fields: Record<string, number | number[]> = {};
    for (const pair of parts.slice(2)) {
      const eq = pair.indexOf("=");
      if (eq < 1) throw new Error(`vector line ${index + 1}: bad pair ${pair}`);
      const key = pair.slice(0, eq);
      const value = pair.slice(eq + 1);
      fields[key] = value.includes(",")
        ? value.split(",").map((v) => parseInt(v, 10))
        : parseInt(value, 10);
    }
    out.push({ lineNo: index + 1, hex, kind: tag, fields });
  });
  return out;
}
