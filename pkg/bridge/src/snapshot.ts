/**
 * Reader for the kernel's snapshot stream format (.tcsnap):
 *
 *   magic "TCSNAP01" | version u32 | payload_length u64 | crc32 u32
 *   payload: fields of key_len u16, key UTF-8, type_code u8, value
 *   type codes: 1 u8, 2 i64, 3 f64, 4 f64-array (u64 count + raw doubles),
 *               5 bytes (u64 len), 6 nested (u64 byte len)
 *
 * Everything little-endian; floats are raw IEEE-754 bits, preserved here as
 * Float64Array so no value ever passes through text or arithmetic.
 */

export const SNAPSHOT_MAGIC = "TCSNAP01";
export const FORMAT_VERSION = 1;

export type FieldValue =
  | number
  | bigint
  | Float64Array
  | Uint8Array
  | SnapshotRecord;

export interface SnapshotRecord {
  [key: string]: FieldValue;
}

export class SnapshotFormatError extends Error {}

const CRC_TABLE = buildCrcTable();

function buildCrcTable(): Uint32Array {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
}

export function crc32(data: Uint8Array): number {
  let c = 0xffffffff;
  for (let i = 0; i < data.length; i++) {
    c = CRC_TABLE[(c ^ data[i]) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

class Cursor {
  readonly view: DataView;
  pos = 0;

  constructor(readonly data: Uint8Array) {
    this.view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  }

  take(n: number): Uint8Array {
    if (this.pos + n > this.data.length) {
      throw new SnapshotFormatError(
        `unexpected end of stream at offset ${this.data.length}`);
    }
    const out = this.data.subarray(this.pos, this.pos + n);
    this.pos += n;
    return out;
  }

  u8(): number {
    return this.take(1)[0];
  }

  u16(): number {
    const v = this.view.getUint16(this.checked(2), true);
    this.pos += 2;
    return v;
  }

  u32(): number {
    const v = this.view.getUint32(this.checked(4), true);
    this.pos += 4;
    return v;
  }

  u64(): bigint {
    const v = this.view.getBigUint64(this.checked(8), true);
    this.pos += 8;
    return v;
  }

  i64(): bigint {
    const v = this.view.getBigInt64(this.checked(8), true);
    this.pos += 8;
    return v;
  }

  f64(): number {
    const v = this.view.getFloat64(this.checked(8), true);
    this.pos += 8;
    return v;
  }

  private checked(n: number): number {
    if (this.pos + n > this.data.length) {
      throw new SnapshotFormatError(
        `unexpected end of stream at offset ${this.data.length}`);
    }
    return this.pos;
  }
}

function sizeToNumber(v: bigint, what: string): number {
  if (v > BigInt(Number.MAX_SAFE_INTEGER)) {
    throw new SnapshotFormatError(`${what} too large: ${v}`);
  }
  return Number(v);
}

function decodeFields(payload: Uint8Array): SnapshotRecord {
  const cur = new Cursor(payload);
  const record: SnapshotRecord = {};
  while (cur.pos < payload.length) {
    const keyLen = cur.u16();
    const key = new TextDecoder("utf-8", { fatal: false }).decode(cur.take(keyLen));
    if (key in record) {
      throw new SnapshotFormatError(`duplicate field key "${key}"`);
    }
    const typeCode = cur.u8();
    switch (typeCode) {
      case 1:
        record[key] = cur.u8();
        break;
      case 2:
        record[key] = cur.i64();
        break;
      case 3:
        record[key] = cur.f64();
        break;
      case 4: {
        const count = sizeToNumber(cur.u64(), "array count");
        if (count * 8 > payload.length - cur.pos) {
          throw new SnapshotFormatError(
            `unexpected end of stream at offset ${payload.length}`);
        }
        const raw = cur.take(count * 8);
        // copy so the Float64Array owns aligned memory independent of the file buffer
        const arr = new Float64Array(count);
        new Uint8Array(arr.buffer).set(raw);
        record[key] = arr;
        break;
      }
      case 5: {
        const len = sizeToNumber(cur.u64(), "byte length");
        record[key] = new Uint8Array(cur.take(len));
        break;
      }
      case 6: {
        const len = sizeToNumber(cur.u64(), "nested length");
        record[key] = decodeFields(cur.take(len));
        break;
      }
      default:
        throw new SnapshotFormatError(
          `invalid type code ${typeCode} at offset ${cur.pos - 1}`);
    }
  }
  return record;
}

export function parseSnapshot(data: Uint8Array): SnapshotRecord {
  const cur = new Cursor(data);
  const magic = new TextDecoder().decode(cur.take(8));
  if (magic !== SNAPSHOT_MAGIC) {
    throw new SnapshotFormatError("not a snapshot: bad magic");
  }
  const version = cur.u32();
  if (version !== FORMAT_VERSION) {
    throw new SnapshotFormatError(`unsupported version ${version}`);
  }
  const payloadLength = sizeToNumber(cur.u64(), "payload length");
  const checksum = cur.u32();
  const payload = cur.take(payloadLength);
  if (cur.pos !== data.length) {
    throw new SnapshotFormatError(
      `${data.length - cur.pos} trailing bytes after payload`);
  }
  if (crc32(payload) !== checksum) {
    throw new SnapshotFormatError("corrupt payload: checksum mismatch");
  }
  return decodeFields(payload);
}

export function asRecord(v: FieldValue, key: string): SnapshotRecord {
  if (typeof v !== "object" || v instanceof Float64Array || v instanceof Uint8Array) {
    throw new SnapshotFormatError(`field "${key}" is not a nested record`);
  }
  return v;
}

export function asF64Array(v: FieldValue, key: string): Float64Array {
  if (!(v instanceof Float64Array)) {
    throw new SnapshotFormatError(`field "${key}" is not an f64 array`);
  }
  return v;
}

export function asI64(v: FieldValue, key: string): bigint {
  if (typeof v !== "bigint") {
    throw new SnapshotFormatError(`field "${key}" is not an i64`);
  }
  return v;
}
