/**
 * Reader/writer for the IDSL binary tensor format.
 *
 * Layout: "IDSL" magic, version byte (1), dtype byte (0 = float32),
 * rank byte, rank * uint64 little-endian shape, raw little-endian
 * float32 payload in row-major order.
 */

import { readFileSync, writeFileSync } from 'node:fs';

export interface Tensor {
    shape: number[];
    data: Float32Array;
}

const MAGIC = 'IDSL';
const VERSION = 1;
const DTYPE_F32 = 0;

export function writeTensor(t: Tensor, path: string): void {
    const count = t.shape.reduce((a, b) => a * b, 1);
    if (count !== t.data.length) {
        throw new Error(`shape [${t.shape}] does not match ${t.data.length} elements`);
    }
    const buf = Buffer.alloc(7 + 8 * t.shape.length + 4 * count);
    buf.write(MAGIC, 0, 'ascii');
    buf.writeUInt8(VERSION, 4);
    buf.writeUInt8(DTYPE_F32, 5);
    buf.writeUInt8(t.shape.length, 6);
    let off = 7;
    for (const s of t.shape) {
        buf.writeBigUInt64LE(BigInt(s), off);
        off += 8;
    }
    for (let i = 0; i < count; i++) {
        buf.writeFloatLE(t.data[i], off + 4 * i);
    }
    writeFileSync(path, buf);
}

export function readTensor(path: string): Tensor {
    const buf = readFileSync(path);
    if (buf.length < 7) throw new Error(`${path}: file shorter than header`);
    if (buf.toString('ascii', 0, 4) !== MAGIC) {
        throw new Error(`${path}: bad magic`);
    }
    if (buf.readUInt8(4) !== VERSION) throw new Error(`${path}: unsupported version`);
    if (buf.readUInt8(5) !== DTYPE_F32) throw new Error(`${path}: unsupported dtype`);
    const rank = buf.readUInt8(6);
    const headerEnd = 7 + 8 * rank;
    if (buf.length < headerEnd) throw new Error(`${path}: truncated shape block`);
    const shape: number[] = [];
    let count = 1;
    for (let i = 0; i < rank; i++) {
        const s = Number(buf.readBigUInt64LE(7 + 8 * i));
        shape.push(s);
        count *= s;
    }
    if (buf.length - headerEnd !== 4 * count) {
        throw new Error(`${path}: payload length mismatch for shape [${shape}]`);
    }
    const data = new Float32Array(count);
    for (let i = 0; i < count; i++) {
        data[i] = buf.readFloatLE(headerEnd + 4 * i);
        if (!Number.isFinite(data[i])) {
            throw new Error(`${path}: non-finite element at flat index ${i}`);
        }
    }
    return { shape, data };
}
