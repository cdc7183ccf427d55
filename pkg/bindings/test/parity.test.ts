/**
 * Parity against the reference CLI: 100 seeded cases are serialized
 * through IDSL files, selected via `python3 -m idselect.cli`, and the
 * resulting pick sequences compared index-for-index with idSelect on the
 * same in-memory arrays.
 */

import { describe, expect, it } from 'vitest';
import { spawnSync } from 'node:child_process';
import { mkdtempSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import { idSelect, writeTensor } from '../src/index.js';

// small deterministic PRNG for test-case generation
function mulberry32(seed: number): () => number {
    let a = seed >>> 0;
    return () => {
        a = (a + 0x6d2b79f5) | 0;
        let t = Math.imul(a ^ (a >>> 15), 1 | a);
        t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
        return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
    };
}

function gaussians(rand: () => number, count: number): Float32Array {
    const out = new Float32Array(count);
    for (let i = 0; i < count; i += 2) {
        const r = Math.sqrt(-2 * Math.log(1 - rand()));
        const theta = 2 * Math.PI * rand();
        out[i] = r * Math.cos(theta);
        if (i + 1 < count) out[i + 1] = r * Math.sin(theta);
    }
    return out;
}

function cliSelect(dir: string, budget: number, gamma: number): { picked: number[]; retained: number[] } {
    const proc = spawnSync('python3', [
        '-m', 'idselect.cli', 'select',
        '--case', join(dir, 'case.json'),
        '--budget', String(budget),
        '--method', 'id',
        '--importance', 'external',
        '--scores', join(dir, 'scores.idsl'),
        '--gamma', String(gamma),
    ], { encoding: 'utf-8' });
    expect(proc.status, proc.stderr).toBe(0);
    return JSON.parse(proc.stdout);
}

describe('binding parity with the CLI', () => {
    it('agrees index-for-index on 100 seeded cases', { timeout: 300_000 }, () => {
        const dir = mkdtempSync(join(tmpdir(), 'idselect-parity-'));
        const gammas = [1.0, 20.0, 100.0];
        for (let k = 0; k < 100; k++) {
            const rand = mulberry32(1000 + k);
            const n = 4 + Math.floor(rand() * 60);
            const d = 2 + Math.floor(rand() * 22);
            const budget = 1 + Math.floor(rand() * Math.min(n, 24));
            const gamma = gammas[k % 3];

            const tokens = gaussians(rand, n * d);
            const scores = gaussians(rand, n);
            writeTensor({ shape: [n, d], data: tokens }, join(dir, 'tokens.idsl'));
            writeTensor({ shape: [n], data: scores }, join(dir, 'scores.idsl'));
            writeFileSync(join(dir, 'case.json'), JSON.stringify({ tokens: 'tokens.idsl' }));

            const want = cliSelect(dir, budget, gamma);
            const got = idSelect(tokens, scores, budget, gamma, { rows: n, cols: d });
            expect(got.picked, `case ${k} (n=${n}, d=${d}, t=${budget}, gamma=${gamma})`)
                .toEqual(want.picked);
            expect(got.retained).toEqual(want.retained);
        }
    });
});
