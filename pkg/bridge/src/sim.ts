/**
 * Scripting handle over the simulation kernel.
 *
 * The kernel stays a black box behind its external interfaces: the bridge
 * spawns the CLI for construction, stepping, and rendering, chains runs
 * through snapshot files, and reads particle state by parsing the
 * documented snapshot stream.  No kernel code or recompilation is ever
 * needed to change an experiment.
 */

import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { BridgeConfigError, SimMapping, toConfigText, validateMapping } from "./config.js";
import { buildParticleDump } from "./dumps.js";
import { asF64Array, asI64, asRecord, parseSnapshot, SnapshotRecord } from "./snapshot.js";

export class BridgeError extends Error {}

/** Kernel reported a runtime failure (e.g. a CFL violation). */
export class SimStepError extends BridgeError {
  constructor(message: string, readonly exitCode: number, readonly stderr: string) {
    super(message);
  }
}

export interface SimHandleOptions {
  /** Command used to invoke the kernel CLI; overridable for odd installs. */
  cli?: string[];
  /** Parent directory for the handle's working files. */
  baseDir?: string;
}

interface ParticleState {
  count: number;
  positions: Float64Array;
  velocities: Float64Array;
}

const DEFAULT_CLI = ["python3", "-m", "simkit"];

export class SimHandle {
  readonly workDir: string;
  readonly initialManifestPath: string;
  private readonly cli: string[];
  private snapshotPath: string;
  private stepIndexValue: number;
  private cache: ParticleState | null = null;
  private closed = false;
  private renderCount = 0;

  private constructor(workDir: string, cli: string[], snapshotPath: string,
                      stepIndex: number, initialManifestPath: string) {
    this.workDir = workDir;
    this.cli = cli;
    this.snapshotPath = snapshotPath;
    this.stepIndexValue = stepIndex;
    this.initialManifestPath = initialManifestPath;
  }

  /** Build a fresh simulation from a flat config mapping (must name a demo). */
  static create(mapping: SimMapping, options: SimHandleOptions = {}): SimHandle {
    validateMapping(mapping);
    const demo = mapping["demo"];
    if (typeof demo !== "string") {
      throw new BridgeConfigError('mapping must include a "demo" string key');
    }
    const base = options.baseDir ?? os.tmpdir();
    const workDir = fs.mkdtempSync(path.join(base, "simkit-bridge-"));
    const configPath = path.join(workDir, "input.cfg");
    fs.writeFileSync(configPath, toConfigText(mapping, ["demo"]));

    const cli = options.cli ?? defaultCli();
    runKernel(cli, [
      "run", "--demo", demo, "--config", configPath,
      "--frames", "0", "--frame-every", "0", "--snapshot-every", "1",
      "--out", workDir, "--no-profile",
    ]);
    const snap = path.join(workDir, snapName(0));
    if (!fs.existsSync(snap)) {
      throw new BridgeError(`kernel did not produce ${snap}`);
    }
    const initialManifest = path.join(workDir, "manifest_initial.cfg");
    fs.copyFileSync(path.join(workDir, "manifest.cfg"), initialManifest);
    return new SimHandle(workDir, cli, snap, 0, initialManifest);
  }

  get stepIndex(): number {
    this.ensureOpen();
    return this.stepIndexValue;
  }

  get particleCount(): number {
    return this.state().count;
  }

  /** Advance n steps (kernel-identical; snapshots chain between runs). */
  step(n: number): void {
    this.ensureOpen();
    if (!Number.isInteger(n) || n < 0) {
      throw new BridgeError(`step count must be a non-negative integer, got ${n}`);
    }
    if (n === 0) {
      return;
    }
    runKernel(this.cli, [
      "run", "--restore", this.snapshotPath,
      "--frames", String(n), "--frame-every", "0", "--snapshot-every", String(n),
      "--out", this.workDir, "--no-profile",
    ]);
    const next = path.join(this.workDir, snapName(this.stepIndexValue + n));
    if (!fs.existsSync(next)) {
      throw new BridgeError(`kernel did not produce ${next}`);
    }
    this.snapshotPath = next;
    this.stepIndexValue += n;
    this.cache = null;
  }

  /** Particle positions as an N x 2 array (a copy; mutating it is safe). */
  positions(): number[][] {
    const s = this.state();
    return toPairs(s.positions, s.count);
  }

  /** Particle velocities as an N x 2 array (a copy). */
  velocities(): number[][] {
    const s = this.state();
    return toPairs(s.velocities, s.count);
  }

  /** Write the current state as a particle dump, byte-identical to the
   * kernel's own dump of the same state. */
  saveParticleDump(outPath: string): void {
    const s = this.state();
    fs.writeFileSync(outPath, buildParticleDump(s.positions, s.velocities));
  }

  /** Render the current state through the kernel and save the PPM frame. */
  saveFrame(outPath: string, width: number, height: number): void {
    this.ensureOpen();
    if (!Number.isInteger(width) || !Number.isInteger(height)
        || width < 1 || height < 1) {
      throw new BridgeError(`frame size must be positive integers, got ${width}x${height}`);
    }
    const renderDir = path.join(this.workDir, `render_${this.renderCount++}`);
    fs.mkdirSync(renderDir);
    runKernel(this.cli, [
      "run", "--restore", this.snapshotPath,
      "--frames", "0", "--frame-every", "1", "--snapshot-every", "0",
      "--set", `render.width=${width}`, "--set", `render.height=${height}`,
      "--out", renderDir, "--no-profile",
    ]);
    const frame = path.join(renderDir, frameName(this.stepIndexValue));
    if (!fs.existsSync(frame)) {
      throw new BridgeError(`kernel did not produce ${frame}`);
    }
    try {
      fs.copyFileSync(frame, outPath);
    } catch (e) {
      throw new BridgeError(`cannot write frame to ${outPath}: ${e}`);
    }
  }

  /** Path of the snapshot holding the current state. */
  snapshotFile(): string {
    this.ensureOpen();
    return this.snapshotPath;
  }

  /** Release working files; any later use of the handle is an error. */
  close(): void {
    if (this.closed) {
      return;
    }
    this.closed = true;
    this.cache = null;
    fs.rmSync(this.workDir, { recursive: true, force: true });
  }

  private ensureOpen(): void {
    if (this.closed) {
      throw new BridgeError("handle is closed");
    }
  }

  private state(): ParticleState {
    this.ensureOpen();
    if (this.cache === null) {
      this.cache = readParticleState(this.snapshotPath);
    }
    return this.cache;
  }
}

export function createSim(mapping: SimMapping,
                          options: SimHandleOptions = {}): SimHandle {
  return SimHandle.create(mapping, options);
}

function defaultCli(): string[] {
  const env = process.env["SIMKIT_CLI"];
  return env ? env.split(" ") : DEFAULT_CLI;
}

function snapName(step: number): string {
  return `snap_${String(step).padStart(6, "0")}.tcsnap`;
}

function frameName(step: number): string {
  return `frame_${String(step).padStart(6, "0")}.ppm`;
}

function runKernel(cli: string[], args: string[]): void {
  const result = spawnSync(cli[0], [...cli.slice(1), ...args],
                           { encoding: "utf-8" });
  if (result.error) {
    throw new BridgeError(`cannot invoke kernel CLI: ${result.error.message}`);
  }
  if (result.status !== 0) {
    const stderr = (result.stderr ?? "").trim();
    throw new SimStepError(
      `kernel run failed (exit ${result.status}): ${lastLine(stderr)}`,
      result.status ?? -1, stderr);
  }
}

function lastLine(text: string): string {
  const lines = text.split("\n").filter((l) => l.trim().length > 0);
  return lines.length ? lines[lines.length - 1] : "(no output)";
}

function readParticleState(snapshotPath: string): ParticleState {
  const record: SnapshotRecord = parseSnapshot(fs.readFileSync(snapshotPath));
  const particles = asRecord(record["particles"], "particles");
  const count = Number(asI64(particles["count"], "count"));
  const positions = asF64Array(particles["position"], "position");
  const velocities = asF64Array(particles["velocity"], "velocity");
  if (positions.length !== 2 * count || velocities.length !== 2 * count) {
    throw new BridgeError(
      `snapshot particle arrays have wrong length for count ${count}`);
  }
  return { count, positions, velocities };
}

function toPairs(flat: Float64Array, count: number): number[][] {
  const out: number[][] = new Array(count);
  for (let i = 0; i < count; i++) {
    out[i] = [flat[i * 2], flat[i * 2 + 1]];
  }
  return out;
}
