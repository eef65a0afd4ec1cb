export { BridgeConfigError, KNOWN_KEYS, formatScalar, toConfigText,
         validateMapping } from "./config.js";
export type { Scalar, SimMapping } from "./config.js";
export { SnapshotFormatError, crc32, parseSnapshot } from "./snapshot.js";
export type { FieldValue, SnapshotRecord } from "./snapshot.js";
export { DumpFormatError, buildParticleDump, parseParticleDump } from "./dumps.js";
export { BridgeError, SimHandle, SimStepError, createSim } from "./sim.js";
export type { SimHandleOptions } from "./sim.js";
