/**
 * The kernel's flat configuration surface: one `key = value` per line,
 * `#` comments, strict scalar types (an int is not a float on the kernel
 * side, so numeric keys carry a declared kind here).
 */

export type Scalar = string | number | boolean;
export type SimMapping = Record<string, Scalar>;

export type KeyKind = "int" | "float" | "string" | "bool";

/** Every key the bridge accepts, with the type the kernel expects. */
export const KNOWN_KEYS: Record<string, KeyKind> = {
  demo: "string",
  nx: "int",
  ny: "int",
  dx: "float",
  dt: "float",
  gravity_x: "float",
  gravity_y: "float",
  scheme: "string",
  flip_blend: "float",
  cfl_max: "float",
  solver_tol: "float",
  max_cg_iters: "int",
  seed: "int",
  particles_per_cell: "int",
  "render.width": "int",
  "render.height": "int",
  "rotation.omega": "float",
};

export class BridgeConfigError extends Error {}

export function validateMapping(mapping: SimMapping): void {
  for (const [key, value] of Object.entries(mapping)) {
    const kind = KNOWN_KEYS[key];
    if (kind === undefined) {
      throw new BridgeConfigError(`unknown config key "${key}"`);
    }
    checkKind(key, value, kind);
  }
}

function checkKind(key: string, value: Scalar, kind: KeyKind): void {
  switch (kind) {
    case "int":
      if (typeof value !== "number" || !Number.isInteger(value)) {
        throw new BridgeConfigError(`config key "${key}" expects an integer`);
      }
      break;
    case "float":
      if (typeof value !== "number" || !Number.isFinite(value)) {
        throw new BridgeConfigError(`config key "${key}" expects a finite number`);
      }
      break;
    case "string":
      if (typeof value !== "string") {
        throw new BridgeConfigError(`config key "${key}" expects a string`);
      }
      break;
    case "bool":
      if (typeof value !== "boolean") {
        throw new BridgeConfigError(`config key "${key}" expects a boolean`);
      }
      break;
  }
}

/**
 * Format one value in the kernel's text form.  Floats always carry a
 * decimal marker so the kernel's type inference keeps them floats; the
 * decimal string round-trips to the identical IEEE-754 double.
 */
export function formatScalar(key: string, value: Scalar): string {
  const kind = KNOWN_KEYS[key] ?? (typeof value === "number" ? "float" : "string");
  if (typeof value === "boolean") return value ? "true" : "false";
  if (typeof value === "number") {
    if (Object.is(value, -0)) return kind === "int" ? "0" : "-0.0";
    const text = String(value);
    if (kind === "int") return text;
    return /[.e]/.test(text) ? text : `${text}.0`;
  }
  return value;
}

export function toConfigText(mapping: SimMapping, skip: string[] = []): string {
  const lines: string[] = [];
  for (const [key, value] of Object.entries(mapping)) {
    if (skip.includes(key)) continue;
    lines.push(`${key} = ${formatScalar(key, value)}`);
  }
  return lines.length ? lines.join("\n") + "\n" : "";
}
