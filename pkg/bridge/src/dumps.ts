/**
 * Particle dump format (.tcpart): magic "TCPART01", count u64 LE, then one
 * f64 (x, y, vx, vy) record per particle.  Written straight from parsed
 * IEEE-754 bits, so a dump assembled here is byte-identical to the
 * kernel's for the same state.
 */

export const PARTICLE_MAGIC = "TCPART01";

export class DumpFormatError extends Error {}

export function buildParticleDump(positions: Float64Array,
                                  velocities: Float64Array): Uint8Array {
  if (positions.length !== velocities.length || positions.length % 2 !== 0) {
    throw new DumpFormatError("positions/velocities must be matching 2N arrays");
  }
  const n = positions.length / 2;
  const out = new Uint8Array(16 + n * 32);
  out.set(new TextEncoder().encode(PARTICLE_MAGIC), 0);
  const view = new DataView(out.buffer);
  view.setBigUint64(8, BigInt(n), true);
  const rows = new Float64Array(out.buffer, 16, n * 4);
  for (let i = 0; i < n; i++) {
    rows[i * 4] = positions[i * 2];
    rows[i * 4 + 1] = positions[i * 2 + 1];
    rows[i * 4 + 2] = velocities[i * 2];
    rows[i * 4 + 3] = velocities[i * 2 + 1];
  }
  return out;
}

export function parseParticleDump(data: Uint8Array): {
  positions: Float64Array;
  velocities: Float64Array;
} {
  const magic = new TextDecoder().decode(data.subarray(0, 8));
  if (magic !== PARTICLE_MAGIC) {
    throw new DumpFormatError("not a particle dump");
  }
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  const n = Number(view.getBigUint64(8, true));
  if (data.length !== 16 + n * 32) {
    throw new DumpFormatError(
      `expected ${16 + n * 32} bytes for ${n} particles, got ${data.length}`);
  }
  const rows = new Float64Array(n * 4);
  new Uint8Array(rows.buffer).set(data.subarray(16));
  const positions = new Float64Array(n * 2);
  const velocities = new Float64Array(n * 2);
  for (let i = 0; i < n; i++) {
    positions[i * 2] = rows[i * 4];
    positions[i * 2 + 1] = rows[i * 4 + 1];
    velocities[i * 2] = rows[i * 4 + 2];
    velocities[i * 2 + 1] = rows[i * 4 + 3];
  }
  return { positions, velocities };
}
