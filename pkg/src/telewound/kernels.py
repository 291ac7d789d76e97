"""Dense-tensor kernels for the segmentation network forward pass.

Conventions used throughout:

* An activation tensor is a C-contiguous ``numpy.ndarray`` of dtype float32
  with rank 4 and axis order ``(batch, channel, height, width)``.
* Every kernel is a pure function: identical inputs give bitwise-identical
  outputs within one build, and finite inputs never produce NaN/Inf.
* Shape checking is strict. There is no silent broadcasting; any mismatch
  raises :class:`~telewound.errors.InvalidArgumentError` naming the offending
  dimension.

The kernels are deliberately minimal: exactly the set needed to execute the
token-pyramid / semantics-extractor / injection / head pipeline, each one
checkable against a naive reference implementation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidArgumentError

DTYPE = np.float32


def as_tensor(x) -> np.ndarray:
    """Coerce to a rank-4 float32 C-contiguous activation tensor."""
    a = np.ascontiguousarray(x, dtype=DTYPE)
    if a.ndim != 4:
        raise InvalidArgumentError(f"activation tensor must have rank 4, got rank {a.ndim}")
    return a


def _require_rank4(x: np.ndarray, name: str) -> None:
    if not isinstance(x, np.ndarray) or x.ndim != 4:
        raise InvalidArgumentError(f"{name} must be a rank-4 array")


@dataclass(frozen=True)
class ConvParams:
    """Convolution weights plus geometry.

    ``weight`` has shape ``(out_c, in_c // groups, kh, kw)``; ``bias`` is a
    length ``out_c`` vector or None. Zero padding is applied symmetrically.
    """

    weight: np.ndarray
    bias: np.ndarray | None = None
    stride: tuple[int, int] = (1, 1)
    padding: tuple[int, int] = (0, 0)
    groups: int = 1

    def __post_init__(self):
        w = np.ascontiguousarray(self.weight, dtype=DTYPE)
        object.__setattr__(self, "weight", w)
        if w.ndim != 4:
            raise InvalidArgumentError("conv weight must have rank 4 (out_c, in_c/groups, kh, kw)")
        if self.groups < 1:
            raise InvalidArgumentError(f"groups must be positive, got {self.groups}")
        if w.shape[0] % self.groups != 0:
            raise InvalidArgumentError(
                f"out_c={w.shape[0]} not divisible by groups={self.groups}"
            )
        if self.bias is not None:
            b = np.ascontiguousarray(self.bias, dtype=DTYPE)
            if b.ndim != 1 or b.shape[0] != w.shape[0]:
                raise InvalidArgumentError(
                    f"bias length {b.shape} must equal out_c={w.shape[0]}"
                )
            object.__setattr__(self, "bias", b)
        if any(s < 1 for s in self.stride):
            raise InvalidArgumentError(f"stride must be positive, got {self.stride}")
        if any(p < 0 for p in self.padding):
            raise InvalidArgumentError(f"padding must be non-negative, got {self.padding}")

    @property
    def out_channels(self) -> int:
        return self.weight.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weight.shape[1] * self.groups


@dataclass(frozen=True)
class BatchNormParams:
    """Inference-time batch-norm statistics and affine parameters."""

    gamma: np.ndarray
    beta: np.ndarray
    running_mean: np.ndarray
    running_var: np.ndarray
    eps: float = 1e-5

    def __post_init__(self):
        vecs = {}
        for name in ("gamma", "beta", "running_mean", "running_var"):
            v = np.ascontiguousarray(getattr(self, name), dtype=DTYPE)
            if v.ndim != 1:
                raise InvalidArgumentError(f"{name} must be a vector")
            vecs[name] = v
        lengths = {v.shape[0] for v in vecs.values()}
        if len(lengths) != 1:
            raise InvalidArgumentError(f"batch-norm vectors differ in length: {sorted(lengths)}")
        if self.eps <= 0:
            raise InvalidArgumentError(f"eps must be positive, got {self.eps}")
        if np.any(vecs["running_var"] < 0):
            raise InvalidArgumentError("running_var must be non-negative")
        for name, v in vecs.items():
            object.__setattr__(self, name, v)

    def __len__(self) -> int:
        return self.gamma.shape[0]


@dataclass(frozen=True)
class AttentionParams:
    """Multi-head attention projections.

    Projection matrices are stored stacked head-major:
    ``q_weight``/``k_weight`` are ``(head_count * key_dim, features)``,
    ``v_weight`` is ``(head_count * value_dim, features)`` and ``out_weight``
    is ``(out_features, head_count * value_dim)``. Biases are optional
    vectors matching each projection's output length.
    """

    head_count: int
    key_dim: int
    value_dim: int
    q_weight: np.ndarray
    k_weight: np.ndarray
    v_weight: np.ndarray
    out_weight: np.ndarray
    q_bias: np.ndarray | None = None
    k_bias: np.ndarray | None = None
    v_bias: np.ndarray | None = None
    out_bias: np.ndarray | None = None

    def __post_init__(self):
        if self.head_count < 1:
            raise InvalidArgumentError(f"head_count must be >= 1, got {self.head_count}")
        if self.key_dim < 1 or self.value_dim < 1:
            raise InvalidArgumentError("key_dim and value_dim must be positive")
        mats = {}
        for name in ("q_weight", "k_weight", "v_weight", "out_weight"):
            m = np.ascontiguousarray(getattr(self, name), dtype=DTYPE)
            if m.ndim != 2:
                raise InvalidArgumentError(f"{name} must be a matrix")
            mats[name] = m
        nh_kd = self.head_count * self.key_dim
        nh_vd = self.head_count * self.value_dim
        if mats["q_weight"].shape[0] != nh_kd:
            raise InvalidArgumentError(
                f"q_weight rows {mats['q_weight'].shape[0]} != head_count*key_dim={nh_kd}"
            )
        if mats["k_weight"].shape[0] != nh_kd:
            raise InvalidArgumentError(
                f"k_weight rows {mats['k_weight'].shape[0]} != head_count*key_dim={nh_kd}"
            )
        if mats["v_weight"].shape[0] != nh_vd:
            raise InvalidArgumentError(
                f"v_weight rows {mats['v_weight'].shape[0]} != head_count*value_dim={nh_vd}"
            )
        if mats["q_weight"].shape[1] != mats["k_weight"].shape[1] or (
            mats["q_weight"].shape[1] != mats["v_weight"].shape[1]
        ):
            raise InvalidArgumentError("q/k/v projections disagree on input feature dim")
        if mats["out_weight"].shape[1] != nh_vd:
            raise InvalidArgumentError(
                f"out_weight cols {mats['out_weight'].shape[1]} != head_count*value_dim={nh_vd}"
            )
        for name, m in mats.items():
            object.__setattr__(self, name, m)
        for name in ("q_bias", "k_bias", "v_bias", "out_bias"):
            b = getattr(self, name)
            if b is None:
                continue
            b = np.ascontiguousarray(b, dtype=DTYPE)
            rows = {"q_bias": nh_kd, "k_bias": nh_kd, "v_bias": nh_vd,
                    "out_bias": mats["out_weight"].shape[0]}[name]
            if b.ndim != 1 or b.shape[0] != rows:
                raise InvalidArgumentError(f"{name} must be a vector of length {rows}")
            object.__setattr__(self, name, b)


# ---------------------------------------------------------------------------
# convolution


def conv2d(x: np.ndarray, p: ConvParams) -> np.ndarray:
    """Grouped 2-D convolution with zero padding.

    Output spatial extents follow the standard floor formula
    ``(h + 2*pad - kh) // stride + 1``.
    """
    _require_rank4(x, "input")
    n, c, h, w = x.shape
    out_c, cg, kh, kw = p.weight.shape
    if c != cg * p.groups:
        raise InvalidArgumentError(
            f"input channels {c} != weight in_c/groups*groups = {cg}*{p.groups}"
        )
    sh, sw = p.stride
    ph, pw = p.padding
    if h + 2 * ph < kh:
        raise InvalidArgumentError(f"padded height {h + 2 * ph} smaller than kernel height {kh}")
    if w + 2 * pw < kw:
        raise InvalidArgumentError(f"padded width {w + 2 * pw} smaller than kernel width {kw}")

    if ph or pw:
        x = np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)))
    # (n, c, oh, ow, kh, kw) view over all kernel windows
    win = sliding_window_view(x, (kh, kw), axis=(2, 3))[:, :, ::sh, ::sw]
    oh, ow = win.shape[2], win.shape[3]

    if p.groups == c and cg == 1:
        # depthwise fast path: broadcast multiply, reduce over the window
        ocg = out_c // p.groups
        if ocg == 1:
            out = np.einsum("nchwij,cij->nchw", win, p.weight[:, 0], dtype=DTYPE)
        else:
            out = np.einsum(
                "nchwij,cmij->ncmhw", win, p.weight.reshape(c, ocg, kh, kw), dtype=DTYPE
            ).reshape(n, out_c, oh, ow)
    elif p.groups == 1:
        cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(n, oh * ow, c * kh * kw)
        wmat = p.weight.reshape(out_c, c * kh * kw)
        out = (cols @ wmat.T).transpose(0, 2, 1).reshape(n, out_c, oh, ow)
    else:
        ocg = out_c // p.groups
        out = np.empty((n, out_c, oh, ow), dtype=DTYPE)
        for g in range(p.groups):
            sub = win[:, g * cg:(g + 1) * cg]
            cols = sub.transpose(0, 2, 3, 1, 4, 5).reshape(n, oh * ow, cg * kh * kw)
            wmat = p.weight[g * ocg:(g + 1) * ocg].reshape(ocg, cg * kh * kw)
            out[:, g * ocg:(g + 1) * ocg] = (cols @ wmat.T).transpose(0, 2, 1).reshape(
                n, ocg, oh, ow
            )
    out = np.ascontiguousarray(out, dtype=DTYPE)
    if p.bias is not None:
        out += p.bias[None, :, None, None]
    return out


def fold_batchnorm(conv: ConvParams, bn: BatchNormParams) -> ConvParams:
    """Fold inference-time batch norm into the preceding convolution.

    Returns params satisfying ``conv2d(x, folded) == bn(conv2d(x, conv))``.
    """
    if len(bn) != conv.out_channels:
        raise InvalidArgumentError(
            f"batch-norm length {len(bn)} != conv out_c {conv.out_channels}"
        )
    scale = bn.gamma / np.sqrt(bn.running_var + DTYPE(bn.eps))
    shift = bn.beta - bn.running_mean * scale
    return apply_channel_affine(conv, scale.astype(DTYPE), shift.astype(DTYPE))


def apply_channel_affine(conv: ConvParams, scale: np.ndarray, shift: np.ndarray) -> ConvParams:
    """Fold a per-output-channel ``y = scale*x + shift`` into conv weights."""
    scale = np.ascontiguousarray(scale, dtype=DTYPE)
    shift = np.ascontiguousarray(shift, dtype=DTYPE)
    if scale.shape != (conv.out_channels,) or shift.shape != (conv.out_channels,):
        raise InvalidArgumentError(
            f"affine vectors must have length {conv.out_channels}, "
            f"got {scale.shape} and {shift.shape}"
        )
    weight = conv.weight * scale[:, None, None, None]
    bias = shift if conv.bias is None else conv.bias * scale + shift
    return ConvParams(weight=weight, bias=bias, stride=conv.stride,
                      padding=conv.padding, groups=conv.groups)


# ---------------------------------------------------------------------------
# pointwise nonlinearities


def relu6(x: np.ndarray) -> np.ndarray:
    return np.clip(x, DTYPE(0), DTYPE(6))


def sigmoid(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=DTYPE)
    with np.errstate(over="ignore"):
        return (DTYPE(1) / (DTYPE(1) + np.exp(-x))).astype(DTYPE)


def hard_swish(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=DTYPE)
    return x * np.clip(x + DTYPE(3), DTYPE(0), DTYPE(6)) / DTYPE(6)


_ACTIVATIONS = {"relu6": relu6, "sigmoid": sigmoid, "hard_swish": hard_swish}


def activation(x: np.ndarray, kind: str) -> np.ndarray:
    """Elementwise activation; ``kind`` is one of relu6 | sigmoid | hard_swish."""
    try:
        fn = _ACTIVATIONS[kind]
    except KeyError:
        raise InvalidArgumentError(f"unknown activation kind {kind!r}") from None
    return fn(np.asarray(x, dtype=DTYPE))


# ---------------------------------------------------------------------------
# resampling


def adaptive_avg_pool(x: np.ndarray, out_hw: tuple[int, int]) -> np.ndarray:
    """Adaptive average pooling with floor/ceil window bounds.

    Output cell (i, j) averages the input window
    ``rows [floor(i*h/oh), ceil((i+1)*h/oh))`` x ``cols [floor(j*w/ow), ceil((j+1)*w/ow))``.
    The windows tile the input, so a constant input yields a constant output.
    """
    _require_rank4(x, "input")
    oh, ow = out_hw
    n, c, h, w = x.shape
    if oh < 1 or ow < 1:
        raise InvalidArgumentError(f"pool target must be positive, got {out_hw}")
    if oh > h or ow > w:
        raise InvalidArgumentError(f"pool target {out_hw} exceeds input extents {(h, w)}")
    x = np.asarray(x, dtype=DTYPE)
    out = np.empty((n, c, oh, ow), dtype=DTYPE)
    row_bounds = [(i * h // oh, -(-(i + 1) * h // oh)) for i in range(oh)]
    col_bounds = [(j * w // ow, -(-(j + 1) * w // ow)) for j in range(ow)]
    for i, (r0, r1) in enumerate(row_bounds):
        for j, (c0, c1) in enumerate(col_bounds):
            out[:, :, i, j] = x[:, :, r0:r1, c0:c1].mean(axis=(2, 3), dtype=DTYPE)
    return out


def bilinear_resize(x: np.ndarray, out_hw: tuple[int, int]) -> np.ndarray:
    """Bilinear resampling with half-pixel centers and edge clamping.

    Source coordinate for destination index d is ``(d + 0.5) * in/out - 0.5``,
    clamped to the valid range before interpolation.
    """
    _require_rank4(x, "input")
    oh, ow = out_hw
    if oh < 1 or ow < 1:
        raise InvalidArgumentError(f"resize target must be positive, got {out_hw}")
    n, c, h, w = x.shape
    x = np.asarray(x, dtype=DTYPE)
    if (oh, ow) == (h, w):
        return x.copy()

    def axis_coords(out_len: int, in_len: int):
        src = (np.arange(out_len, dtype=np.float64) + 0.5) * (in_len / out_len) - 0.5
        src = np.clip(src, 0.0, in_len - 1)
        lo = np.floor(src).astype(np.int64)
        hi = np.minimum(lo + 1, in_len - 1)
        frac = (src - lo).astype(DTYPE)
        return lo, hi, frac

    y0, y1, fy = axis_coords(oh, h)
    x0, x1, fx = axis_coords(ow, w)
    top = x[:, :, y0[:, None], x0[None, :]] * (1 - fx)[None, None, None, :] + \
        x[:, :, y0[:, None], x1[None, :]] * fx[None, None, None, :]
    bot = x[:, :, y1[:, None], x0[None, :]] * (1 - fx)[None, None, None, :] + \
        x[:, :, y1[:, None], x1[None, :]] * fx[None, None, None, :]
    out = top * (1 - fy)[None, None, :, None] + bot * fy[None, None, :, None]
    return np.ascontiguousarray(out, dtype=DTYPE)


# ---------------------------------------------------------------------------
# attention


def multi_head_attention(x: np.ndarray, p: AttentionParams) -> np.ndarray:
    """Scaled dot-product multi-head attention over the spatial positions.

    ``x`` is interpreted as a token sequence: each of the ``h*w`` positions is
    a token with the channel vector as its features. Per head,
    ``softmax(Q K^T / sqrt(key_dim)) V``; head outputs are concatenated and
    passed through the output projection. Output has the same shape as ``x``.
    """
    _require_rank4(x, "input")
    n, c, h, w = x.shape
    if p.q_weight.shape[1] != c:
        raise InvalidArgumentError(
            f"token feature dim {c} != projection input dim {p.q_weight.shape[1]}"
        )
    if p.out_weight.shape[0] != c:
        raise InvalidArgumentError(
            f"out_weight rows {p.out_weight.shape[0]} != token feature dim {c}"
        )
    t = h * w
    tokens = x.reshape(n, c, t).transpose(0, 2, 1)  # (n, t, c)

    def project(weight, bias):
        y = tokens @ weight.T
        if bias is not None:
            y = y + bias
        return y

    q = project(p.q_weight, p.q_bias).reshape(n, t, p.head_count, p.key_dim)
    k = project(p.k_weight, p.k_bias).reshape(n, t, p.head_count, p.key_dim)
    v = project(p.v_weight, p.v_bias).reshape(n, t, p.head_count, p.value_dim)
    q = q.transpose(0, 2, 1, 3)  # (n, heads, t, key_dim)
    k = k.transpose(0, 2, 1, 3)
    v = v.transpose(0, 2, 1, 3)

    scores = (q @ k.transpose(0, 1, 3, 2)) / DTYPE(np.sqrt(p.key_dim))
    scores -= scores.max(axis=-1, keepdims=True)  # stabilise softmax
    weights = np.exp(scores)
    weights /= weights.sum(axis=-1, keepdims=True)
    heads = weights @ v  # (n, heads, t, value_dim)
    merged = heads.transpose(0, 2, 1, 3).reshape(n, t, p.head_count * p.value_dim)
    out = merged @ p.out_weight.T
    if p.out_bias is not None:
        out = out + p.out_bias
    return np.ascontiguousarray(out.transpose(0, 2, 1).reshape(n, c, h, w), dtype=DTYPE)


# ---------------------------------------------------------------------------
# combination


def elementwise(a: np.ndarray, b: np.ndarray, op: str) -> np.ndarray:
    """Elementwise add or mul of identically shaped tensors."""
    _require_rank4(a, "a")
    _require_rank4(b, "b")
    if a.shape != b.shape:
        raise InvalidArgumentError(f"shape mismatch {a.shape} vs {b.shape}")
    if op == "add":
        return (a + b).astype(DTYPE)
    if op == "mul":
        return (a * b).astype(DTYPE)
    raise InvalidArgumentError(f"unknown elementwise op {op!r}")


def concat_channels(tensors: list[np.ndarray]) -> np.ndarray:
    """Concatenate along the channel axis; batch and spatial extents must agree."""
    if not tensors:
        raise InvalidArgumentError("concat_channels needs at least one tensor")
    for i, t in enumerate(tensors):
        _require_rank4(t, f"tensors[{i}]")
    ref = tensors[0]
    for i, t in enumerate(tensors[1:], start=1):
        if t.shape[0] != ref.shape[0] or t.shape[2:] != ref.shape[2:]:
            raise InvalidArgumentError(
                f"tensors[{i}] extents {t.shape} incompatible with {ref.shape} "
                "(batch/height/width must match)"
            )
    return np.ascontiguousarray(np.concatenate(tensors, axis=1), dtype=DTYPE)
