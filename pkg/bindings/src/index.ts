/**
 * In-process importance-diversity token selection on in-memory arrays.
 *
 * Mirrors the reference CLI's selection semantics: iterative argmax with
 * exp(-gamma * d^2) score suppression over cosine distance, lowest-index
 * tie breaking, -Infinity sentinels for picked tokens.
 *
 * Contiguous Float32Array input is consumed without copying; number[][]
 * input is flattened through float32 (one explicit copy) so results match
 * what the CLI computes after IDSL serialization.
 */

export { readTensor, writeTensor, Tensor } from './idsl.js';

export interface SelectionResult {
    /** indices in pick order */
    picked: number[];
    /** the same indices in ascending positional order */
    retained: number[];
}

export interface Matrix {
    data: Float32Array;
    rows: number;
    cols: number;
}

function asMatrix(tokens: Float32Array | number[][], rows?: number, cols?: number): Matrix {
    if (tokens instanceof Float32Array) {
        if (rows === undefined || cols === undefined) {
            throw new Error('Float32Array tokens require explicit rows/cols');
        }
        if (rows * cols !== tokens.length) {
            throw new Error(
                `shape [${rows}, ${cols}] does not match ${tokens.length} elements`);
        }
        return { data: tokens, rows, cols };
    }
    const r = tokens.length;
    const c = r > 0 ? tokens[0].length : 0;
    const data = new Float32Array(r * c);
    for (let i = 0; i < r; i++) {
        if (tokens[i].length !== c) {
            throw new Error(`ragged rows: row 0 has ${c} entries, row ${i} has ${tokens[i].length}`);
        }
        data.set(tokens[i], i * c);
    }
    return { data, rows: r, cols: c };
}

function asVector(scores: Float64Array | Float32Array | number[]): Float64Array {
    const out = Float64Array.from(scores as ArrayLike<number>);
    for (let i = 0; i < out.length; i++) {
        if (!Number.isFinite(out[i])) {
            throw new Error(`non-finite score at index ${i}`);
        }
    }
    return out;
}

function rowNorms(m: Matrix): Float64Array {
    const norms = new Float64Array(m.rows);
    for (let i = 0; i < m.rows; i++) {
        let acc = 0;
        const base = i * m.cols;
        for (let k = 0; k < m.cols; k++) {
            const v = m.data[base + k];
            acc += v * v;
        }
        norms[i] = Math.sqrt(acc);
        if (norms[i] <= 1e-12) throw new Error(`token row ${i} has zero norm`);
    }
    return norms;
}

/**
 * Select `budget` token indices by iterative argmax with distance-aware
 * score suppression. Identical pick sequence to the reference CLI on the
 * same float32 values.
 */
export function idSelect(
    tokens: Float32Array | number[][],
    scores: Float64Array | Float32Array | number[],
    budget: number,
    gamma = 20.0,
    shape?: { rows: number; cols: number },
): SelectionResult {
    const m = asMatrix(tokens, shape?.rows, shape?.cols);
    if (m.rows < 1) throw new Error('need at least one token');
    if (!Number.isInteger(budget) || budget < 1) throw new Error('budget must be >= 1');
    if (!(gamma > 0)) throw new Error('gamma must be > 0');
    const s = asVector(scores);
    if (s.length !== m.rows) {
        throw new Error(`scores shape [${s.length}] does not match tokens shape [${m.rows}, ${m.cols}]`);
    }
    const norms = rowNorms(m);
    const t = Math.min(budget, m.rows);
    const picked: number[] = [];
    for (let step = 0; step < t; step++) {
        let i = 0;
        for (let j = 1; j < m.rows; j++) {
            if (s[j] > s[i]) i = j;  // strict: lowest index wins ties
        }
        picked.push(i);
        const src = s[i];
        const baseI = i * m.cols;
        for (let j = 0; j < m.rows; j++) {
            if (j === i || s[j] === -Infinity) continue;
            let dot = 0;
            const baseJ = j * m.cols;
            for (let k = 0; k < m.cols; k++) {
                dot += m.data[baseI + k] * m.data[baseJ + k];
            }
            const dist = 1.0 - dot / (norms[i] * norms[j]);
            s[j] -= Math.exp(-gamma * dist * dist) * src;
        }
        s[i] = -Infinity;
    }
    return { picked, retained: [...picked].sort((a, b) => a - b) };
}

export interface CaseFields {
    clsAttention?: Float32Array | number[];
    crossQuery?: Float32Array | number[];
    crossKeys?: Float32Array | number[][];
    crossShape?: { heads?: number; n: number; dim: number };
    textFeature?: Float32Array | number[];
    visionEmbeddings?: Float32Array | number[][];
    visionShape?: { rows: number; cols: number };
}

function softmax(logits: Float64Array): Float64Array {
    let max = -Infinity;
    for (const v of logits) if (v > max) max = v;
    const out = new Float64Array(logits.length);
    let z = 0;
    for (let i = 0; i < logits.length; i++) {
        out[i] = Math.exp(logits[i] - max);
        z += out[i];
    }
    for (let i = 0; i < out.length; i++) out[i] /= z;
    return out;
}

function scaledSoftmaxAttention(query: Float64Array, keys: Matrix): Float64Array {
    if (keys.cols !== query.length) {
        throw new Error(`query dim ${query.length} does not match key dim ${keys.cols}`);
    }
    const scale = Math.sqrt(query.length);
    const logits = new Float64Array(keys.rows);
    for (let j = 0; j < keys.rows; j++) {
        let dot = 0;
        for (let k = 0; k < keys.cols; k++) dot += keys.data[j * keys.cols + k] * query[k];
        logits[j] = dot / scale;
    }
    return softmax(logits);
}

/**
 * Resolve an initial score vector from case fields, mirroring the CLI's
 * importance sources: "cls", "cross", "unified", "external".
 */
export function resolveImportance(
    fields: CaseFields,
    source: string,
    external?: Float64Array | Float32Array | number[],
): Float64Array {
    switch (source) {
        case 'cls': {
            if (!fields.clsAttention) throw new Error("source 'cls' requires clsAttention");
            return Float64Array.from(fields.clsAttention as ArrayLike<number>);
        }
        case 'cross': {
            if (!fields.crossQuery || !fields.crossKeys || !fields.crossShape) {
                throw new Error("source 'cross' requires crossQuery, crossKeys, crossShape");
            }
            const { n, dim } = fields.crossShape;
            const heads = fields.crossShape.heads ?? 1;
            const q = Float64Array.from(fields.crossQuery as ArrayLike<number>);
            if (q.length !== heads * dim) {
                throw new Error(`crossQuery length ${q.length} does not match ${heads} heads of dim ${dim}`);
            }
            const keys = asMatrix(fields.crossKeys as Float32Array | number[][], heads * n, dim);
            const out = new Float64Array(n);
            for (let h = 0; h < heads; h++) {
                const headKeys: Matrix = {
                    data: keys.data.subarray(h * n * dim, (h + 1) * n * dim),
                    rows: n,
                    cols: dim,
                };
                const att = scaledSoftmaxAttention(q.subarray(h * dim, (h + 1) * dim), headKeys);
                for (let j = 0; j < n; j++) out[j] += att[j] / heads;
            }
            return out;
        }
        case 'unified': {
            if (!fields.textFeature || !fields.visionEmbeddings || !fields.clsAttention) {
                throw new Error("source 'unified' requires textFeature, visionEmbeddings, clsAttention");
            }
            const vis = asMatrix(fields.visionEmbeddings as Float32Array | number[][],
                fields.visionShape?.rows, fields.visionShape?.cols);
            const txt = Float64Array.from(fields.textFeature as ArrayLike<number>);
            if (vis.cols !== txt.length) {
                throw new Error(`visionEmbeddings dim ${vis.cols} does not match textFeature dim ${txt.length}`);
            }
            let tn = 0;
            for (const v of txt) tn += v * v;
            tn = Math.sqrt(tn);
            if (tn <= 1e-12) throw new Error('text feature has zero norm');
            const norms = rowNorms(vis);
            const rel = new Float64Array(vis.rows);
            for (let j = 0; j < vis.rows; j++) {
                let dot = 0;
                for (let k = 0; k < vis.cols; k++) dot += vis.data[j * vis.cols + k] * txt[k];
                rel[j] = dot / (norms[j] * tn);
            }
            let lo = Infinity, hi = -Infinity;
            for (const v of rel) { if (v < lo) lo = v; if (v > hi) hi = v; }
            const cls = Float64Array.from(fields.clsAttention as ArrayLike<number>);
            if (cls.length !== vis.rows) {
                throw new Error(`clsAttention length ${cls.length} does not match ${vis.rows} rows`);
            }
            const out = new Float64Array(vis.rows);
            for (let j = 0; j < vis.rows; j++) {
                const nrm = hi === lo ? 1.0 : (rel[j] - lo) / (hi - lo);
                out[j] = nrm * cls[j];
            }
            return out;
        }
        case 'external': {
            if (!external) throw new Error("source 'external' requires a score vector");
            return asVector(external);
        }
        default:
            throw new Error(`unknown importance source '${source}'`);
    }
}
