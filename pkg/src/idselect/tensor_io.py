"""IDSL tensor files, case manifests, and synthetic case generation.

On-disk layout (little-endian regardless of host):

    bytes 0..3   magic "IDSL"
    byte  4      format version (1)
    byte  5      dtype code (0 = float32)
    byte  6      rank
    next rank*8  shape, unsigned 64-bit per axis
    rest         raw float32 payload, row-major

Only float32 storage is supported. Empty tensors (any zero axis) are valid
at this layer; selection-level code enforces N >= 1.

Synthetic cases use numpy's PCG64 bit generator (O'Neill's PCG XSL RR
128/64) seeded directly, with Gaussians drawn via Box-Muller on top of its
uniform stream, so payloads are bitwise reproducible across platforms.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, ManifestError, ValidationError

MAGIC = b"IDSL"
VERSION = 1
DTYPE_F32 = 0

_HEADER = struct.Struct("<4sBBB")

OPTIONAL_TENSOR_FIELDS = (
    "cls_attention",
    "cross_query",
    "cross_keys",
    "text_feature",
    "vision_embeddings",
)


@dataclass
class Case:
    """One selection problem: tokens plus optional importance sources."""

    tokens: np.ndarray
    cls_attention: np.ndarray | None = None
    cross_query: np.ndarray | None = None
    cross_keys: np.ndarray | None = None
    text_feature: np.ndarray | None = None
    vision_embeddings: np.ndarray | None = None
    label: str = ""

    @property
    def n_tokens(self) -> int:
        return int(self.tokens.shape[0])

    @property
    def dim(self) -> int:
        return int(self.tokens.shape[1])


@dataclass(frozen=True)
class SynthSpec:
    n_tokens: int
    dim: int
    n_clusters: int
    cluster_spread: float = 0.1
    seed: int = 0
    score_noise: float = 0.0

    def validate(self) -> None:
        if self.n_tokens < 1:
            raise ValidationError("n_tokens must be >= 1")
        if self.dim < 1:
            raise ValidationError("dim must be >= 1")
        if not (1 <= self.n_clusters <= self.n_tokens):
            raise ValidationError(
                f"n_clusters must be in [1, n_tokens]; got {self.n_clusters} "
                f"with n_tokens={self.n_tokens}"
            )
        if self.cluster_spread < 0:
            raise ValidationError("cluster_spread must be >= 0")
        if self.score_noise < 0:
            raise ValidationError("score_noise must be >= 0")


def write_tensor(t: np.ndarray, path) -> None:
    """Write a float32 tensor to `path` in the IDSL layout."""
    if np.asarray(t).ndim == 0:
        raise ValidationError("rank-0 tensors are not supported; reshape to (1,)")
    arr = np.ascontiguousarray(t, dtype="<f4")
    if arr.ndim > 255:
        raise ValidationError("rank exceeds 255")
    header = _HEADER.pack(MAGIC, VERSION, DTYPE_F32, arr.ndim)
    shape = b"".join(struct.pack("<Q", s) for s in arr.shape)
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(shape)
            fh.write(arr.tobytes())
    except OSError as exc:
        raise OSError(f"cannot write tensor to {path}: {exc}") from exc


def read_tensor(path) -> np.ndarray:
    """Read an IDSL file back into a float32 array, validating finiteness."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: file shorter than header")
    magic, version, dtype, rank = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if dtype != DTYPE_F32:
        raise FormatError(f"{path}: unsupported dtype code {dtype}")
    offset = _HEADER.size + 8 * rank
    if len(raw) < offset:
        raise FormatError(f"{path}: truncated shape block")
    shape = struct.unpack_from(f"<{rank}Q", raw, _HEADER.size)
    count = 1
    for s in shape:
        count *= s
    payload = raw[offset:]
    if len(payload) != 4 * count:
        raise FormatError(
            f"{path}: payload is {len(payload)} bytes, "
            f"shape {tuple(shape)} needs {4 * count}"
        )
    arr = np.frombuffer(payload, dtype="<f4").reshape(shape)
    bad = np.flatnonzero(~np.isfinite(arr.reshape(-1)))
    if bad.size:
        raise ValidationError(f"{path}: non-finite element at flat index {bad[0]}")
    return arr.astype(np.float32, copy=False)


def _check_case(case: Case) -> None:
    tokens = case.tokens
    if tokens.ndim != 2:
        raise ValidationError(f"tokens must be 2-D, got shape {tokens.shape}")
    n = tokens.shape[0]
    if case.cls_attention is not None:
        att = case.cls_attention
        if att.ndim != 1 or att.shape[0] != n:
            raise ValidationError(
                f"cls_attention shape {att.shape} inconsistent with tokens "
                f"shape {tokens.shape}"
            )
        if att.size and float(att.min()) < 0:
            raise ValidationError("cls_attention has negative entries")
    if case.cross_keys is not None:
        ck = case.cross_keys
        if ck.ndim == 2:
            kn = ck.shape[0]
        elif ck.ndim == 3:
            kn = ck.shape[1]
        else:
            raise ValidationError(f"cross_keys must be 2-D or 3-D, got {ck.shape}")
        if kn != n:
            raise ValidationError(
                f"cross_keys shape {ck.shape} inconsistent with tokens "
                f"shape {tokens.shape}"
            )
    if case.cross_query is not None and case.cross_query.ndim not in (1, 2):
        raise ValidationError(
            f"cross_query must be 1-D or 2-D, got {case.cross_query.shape}"
        )
    if case.text_feature is not None:
        if case.vision_embeddings is None:
            raise ValidationError("text_feature present without vision_embeddings")
        tf, ve = case.text_feature, case.vision_embeddings
        if tf.ndim != 1:
            raise ValidationError(f"text_feature must be 1-D, got {tf.shape}")
        if ve.ndim != 2 or ve.shape[1] != tf.shape[0]:
            raise ValidationError(
                f"vision_embeddings shape {ve.shape} inconsistent with "
                f"text_feature shape {tf.shape}"
            )
    if case.vision_embeddings is not None and case.vision_embeddings.ndim == 2:
        if case.vision_embeddings.shape[0] != n:
            raise ValidationError(
                f"vision_embeddings shape {case.vision_embeddings.shape} "
                f"inconsistent with tokens shape {tokens.shape}"
            )


def load_case(manifest) -> Case:
    """Load a Case from a JSON manifest; tensor paths resolve next to it."""
    manifest = Path(manifest)
    try:
        doc = json.loads(manifest.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{manifest}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ManifestError(f"{manifest}: manifest must be a JSON object")
    if "tokens" not in doc:
        raise ManifestError(f"{manifest}: missing required field 'tokens'")
    base = manifest.parent

    def _load(field):
        value = doc[field]
        if not isinstance(value, str):
            raise ManifestError(f"{manifest}: field '{field}' must be a path string")
        return read_tensor(base / value)

    kwargs = {"tokens": _load("tokens")}
    for field in OPTIONAL_TENSOR_FIELDS:
        if field in doc:
            kwargs[field] = _load(field)
    label = doc.get("label", "")
    if not isinstance(label, str):
        raise ManifestError(f"{manifest}: field 'label' must be a string")
    case = Case(label=label, **kwargs)
    _check_case(case)
    return case


def save_case(case: Case, out_dir) -> Path:
    """Write a case's tensors plus `case.json` into `out_dir`; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc: dict = {"tokens": "tokens.idsl"}
    write_tensor(case.tokens, out_dir / "tokens.idsl")
    for field in OPTIONAL_TENSOR_FIELDS:
        t = getattr(case, field)
        if t is not None:
            fname = f"{field}.idsl"
            write_tensor(t, out_dir / fname)
            doc[field] = fname
    if case.label:
        doc["label"] = case.label
    manifest = out_dir / "case.json"
    manifest.write_text(json.dumps(doc, indent=2) + "\n")
    return manifest


def make_rng(seed: int) -> np.random.Generator:
    """The pinned generator: PCG64 seeded directly (no SeedSequence entropy)."""
    return np.random.Generator(np.random.PCG64(seed))


def box_muller(rng: np.random.Generator, n: int) -> np.ndarray:
    """n standard normals via Box-Muller on the generator's uniform stream."""
    pairs = (n + 1) // 2
    u1 = 1.0 - rng.random(pairs)  # (0, 1], keeps log finite
    u2 = rng.random(pairs)
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    out = np.empty(2 * pairs)
    out[0::2] = r * np.cos(theta)
    out[1::2] = r * np.sin(theta)
    return out[:n]


def cluster_labels(n_tokens: int, n_clusters: int) -> np.ndarray:
    """Contiguous near-even cluster assignment used by synth_case."""
    return (np.arange(n_tokens) * n_clusters) // n_tokens


def synth_case(spec: SynthSpec) -> Case:
    """Clustered unit-norm tokens with a softmax saliency vector.

    Tokens are unit-norm cluster centers plus isotropic noise of std
    cluster_spread, re-normalized. Per-token logits are a descending
    per-cluster base score (gap 1.0, cluster 0 highest) plus Gaussian noise
    of std score_noise; cls_attention is their softmax. Deterministic per
    seed.
    """
    spec.validate()
    rng = make_rng(spec.seed)
    k, n, d = spec.n_clusters, spec.n_tokens, spec.dim

    centers = box_muller(rng, k * d).reshape(k, d)
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    labels = cluster_labels(n, k)

    noise = box_muller(rng, n * d).reshape(n, d)
    tokens = centers[labels] + spec.cluster_spread * noise
    tokens /= np.linalg.norm(tokens, axis=1, keepdims=True)

    # Modest per-cluster gap: large enough that cluster rank survives small
    # score noise, small enough that no cluster's softmax mass vanishes.
    base = 0.25 * (k - labels).astype(np.float64)
    logits = base + spec.score_noise * box_muller(rng, n)
    logits -= logits.max()
    exp = np.exp(logits)
    att = exp / exp.sum()

    return Case(
        tokens=tokens.astype(np.float32),
        cls_attention=att.astype(np.float32),
        label=f"synth(n={n},d={d},k={k},seed={spec.seed})",
    )
