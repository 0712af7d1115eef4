"""Five-stage multi-modal backbone with dual shifts, forward and backward.

Activations travel as one stacked array shaped ``(N, B, T, C, H, W)``:
modality, batch, frame, then the canonical per-frame ``(C, H, W)`` slab.
A shared stage convolves all ``N*B*T`` frames with one weight set; a
separate stage loops over modalities with per-modality weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .. import kernels
from ..errors import InvalidLabel, ShapeMismatch, StateError
from .config import NetworkConfig, StageSpec


class ParamStore:
    """Ordered named float64 arrays.

    Shared stages hold ``stage{j}.weight`` / ``stage{j}.bias`` once;
    separate stages hold one pair per modality, suffixed ``.m{p}``.  The
    classifier is ``fc.weight`` (features x classes) and ``fc.bias``.
    The same type carries gradients.
    """

    def __init__(self, arrays: dict[str, np.ndarray]):
        self.arrays = dict(arrays)

    @staticmethod
    def layout(cfg: NetworkConfig) -> list[tuple[str, tuple[int, ...]]]:
        out = []
        for j, st in enumerate(cfg.stages, start=1):
            wshape = (st.out_channels, st.in_channels, 3, 3)
            if st.shared:
                out += [(f"stage{j}.weight", wshape), (f"stage{j}.bias", (st.out_channels,))]
            else:
                for p in range(cfg.modalities):
                    out += [(f"stage{j}.weight.m{p}", wshape), (f"stage{j}.bias.m{p}", (st.out_channels,))]
        out += [("fc.weight", (cfg.num_features, cfg.num_classes)), ("fc.bias", (cfg.num_classes,))]
        return out

    @classmethod
    def zeros(cls, cfg: NetworkConfig) -> "ParamStore":
        return cls({name: np.zeros(shape) for name, shape in cls.layout(cfg)})

    def conv(self, j: int, p: int | None) -> tuple[np.ndarray, np.ndarray]:
        sfx = "" if p is None else f".m{p}"
        return self.arrays[f"stage{j}.weight{sfx}"], self.arrays[f"stage{j}.bias{sfx}"]

    def signature(self) -> tuple:
        return tuple((k, v.shape) for k, v in self.arrays.items())

    def matches(self, cfg: NetworkConfig) -> bool:
        return self.signature() == tuple(self.layout(cfg))

    def copy(self) -> "ParamStore":
        return ParamStore({k: v.copy() for k, v in self.arrays.items()})

    def items(self) -> Iterator[tuple[str, np.ndarray]]:
        return iter(self.arrays.items())

    def __getitem__(self, name: str) -> np.ndarray:
        return self.arrays[name]

    def __len__(self) -> int:
        return len(self.arrays)

    def total_size(self) -> int:
        return sum(v.size for v in self.arrays.values())

    def all_finite(self) -> bool:
        return all(np.isfinite(v).all() for v in self.arrays.values())


def init_params(cfg: NetworkConfig, seed: int, scheme: str = "he") -> ParamStore:
    """Uniform weights, zero biases, drawn in layout order.

    ``glorot``: limit ``sqrt(6 / (fan_in + fan_out))``; ``he``: limit
    ``sqrt(6 / fan_in)``, which keeps ReLU activation variance constant.
    """
    rng = np.random.default_rng(seed)
    arrays = {}
    for name, shape in ParamStore.layout(cfg):
        if ".bias" in name:
            arrays[name] = np.zeros(shape)
            continue
        if name == "fc.weight":
            fan_in, fan_out = shape
        else:
            fan_in, fan_out = shape[1] * 9, shape[0] * 9
        if scheme == "he":
            lim = np.sqrt(6.0 / fan_in)
        elif scheme == "glorot":
            lim = np.sqrt(6.0 / (fan_in + fan_out))
        else:
            raise ValueError(f"unknown init scheme {scheme!r}")
        arrays[name] = rng.uniform(-lim, lim, size=shape)
    return ParamStore(arrays)


def conv2d_forward(x: np.ndarray, weights: np.ndarray, bias: np.ndarray, stride: int) -> np.ndarray:
    """3x3 zero-padded cross-correlation of a frame stack ``(n, Cin, H, W)``."""
    return _conv(x, weights, bias, stride)[0]


def _conv(x, weights, bias, stride):
    n, cin, h, w = x.shape
    cout = weights.shape[0]
    if weights.shape[1] != cin:
        raise ShapeMismatch(f"conv expects {weights.shape[1]} input channels, got {cin}")
    rows = kernels.im2col(x, stride)  # (n*Ho*Wo, cin*9)
    y = kernels.matmul(rows, weights.reshape(cout, cin * 9).T, "conv")
    ho, wo = (h - 1) // stride + 1, (w - 1) // stride + 1
    y = y.reshape(n, ho * wo, cout).transpose(0, 2, 1) + bias[:, None]
    return y.reshape(n, cout, ho, wo), rows


def conv2d_backward(dy, rows, weights, in_shape, stride, need_input=True):
    """Gradients of :func:`conv2d_forward` given its saved im2col rows."""
    n, cout = dy.shape[:2]
    cin, h, w = in_shape
    dy2 = dy.reshape(n, cout, -1).transpose(0, 2, 1).reshape(-1, cout)  # (n*P, cout)
    gw = kernels.matmul(dy2.T, rows, "conv_dw").reshape(weights.shape)
    gb = dy2.sum(axis=0)
    dx = None
    if need_input:
        drows = kernels.matmul(dy2, weights.reshape(cout, cin * 9), "conv_dx")
        dx = kernels.col2im(drows, cin, h, w, stride)
    return gw, gb, dx


def stage_forward(h: np.ndarray, j: int, st: StageSpec, params: ParamStore):
    """conv -> bias -> ReLU on stacked ``(N, B, T, C, H, W)``.

    Returns the activation and the per-weight-set im2col columns.
    """
    n_mod, b, t, c, hh, ww = h.shape
    if c != st.in_channels:
        raise ShapeMismatch(f"stage {j} expects {st.in_channels} channels, got {c}")
    if st.shared:
        wt, bias = params.conv(j, None)
        y, cols = _conv(h.reshape(-1, c, hh, ww), wt, bias, st.stride)
        cols_list = [cols]
        y = y.reshape(n_mod, b, t, *y.shape[1:])
    else:
        ys, cols_list = [], []
        for p in range(n_mod):
            wt, bias = params.conv(j, p)
            yp, cols = _conv(h[p].reshape(-1, c, hh, ww), wt, bias, st.stride)
            ys.append(yp.reshape(b, t, *yp.shape[1:]))
            cols_list.append(cols)
        y = np.stack(ys)
    return np.maximum(y, 0.0), cols_list


def symmetric_mean(a: np.ndarray, axis: int) -> np.ndarray:
    """Mean along ``axis`` whose result depends only on the multiset of values.

    Sorting first makes the floating-point sum independent of the order of
    the entries, so permuting frames (or modalities) is bit-exact.
    """
    n = a.shape[axis]
    return np.sort(a, axis=axis).sum(axis=axis) / n


@dataclass
class ForwardTape:
    signature: tuple
    input_shape: tuple[int, ...]
    stage_in: list[tuple[int, int, int]]
    cols: list[list[np.ndarray]]
    masks: list[np.ndarray]
    fused: np.ndarray
    logits: np.ndarray
    final_hw: tuple[int, int]

    def replay_logits(self, params: ParamStore) -> np.ndarray:
        return self.fused @ params["fc.weight"] + params["fc.bias"]


def _as_batch(x: np.ndarray, cfg: NetworkConfig) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 6:
        raise ShapeMismatch(f"batch input must be (N, B, T, C, H, W), got {x.shape}")
    if x.shape[0] != cfg.modalities:
        raise ShapeMismatch(f"config has {cfg.modalities} modalities, input has {x.shape[0]}")
    if x.shape[3] != cfg.in_channels:
        raise ShapeMismatch(f"config expects {cfg.in_channels} input channels, input has {x.shape[3]}")
    return x


def forward_batch(x: np.ndarray, cfg: NetworkConfig, params: ParamStore, keep_tape: bool = True):
    """Logits ``(B, num_classes)`` for a stacked batch, plus the tape."""
    h = _as_batch(x, cfg)
    if not params.matches(cfg):
        raise StateError("parameter store does not match the network config")
    n_mod, b, t = h.shape[:3]
    cols_all, masks, stage_in = [], [], []
    last = len(cfg.stages)
    for j, st in enumerate(cfg.stages, start=1):
        stage_in.append(h.shape[3:])
        h, cols = stage_forward(h, j, st, params)
        if keep_tape:
            cols_all.append(cols)
            masks.append(h > 0)
        if j < last and j in cfg.shift.sites:
            k, i = cfg.site_bands(j)
            c, hh, ww = h.shape[3:]
            h = kernels.dual_shift(h.reshape(n_mod, b, t, c, hh * ww), k, i).reshape(h.shape)
    pooled = h.mean(axis=(-2, -1))  # (N, B, T, F)
    clip = symmetric_mean(pooled, axis=2)  # temporal consensus
    fused = symmetric_mean(clip, axis=0)  # modality average fusion
    logits = kernels.matmul(fused, params["fc.weight"], "fc") + params["fc.bias"]
    tape = None
    if keep_tape:
        tape = ForwardTape(
            params.signature(), tuple(x.shape), stage_in, cols_all, masks, fused, logits, h.shape[-2:]
        )
    return logits, tape


def stack_samples(samples) -> np.ndarray:
    """List of samples -> ``(N, B, T, C, H, W)``."""
    return np.stack([np.stack([c.array for c in s.clips]) for s in samples], axis=1)


def forward_full(sample, cfg: NetworkConfig, params: ParamStore):
    """Logits vector and tape for one multi-modal sample."""
    if len(sample.clips) != cfg.modalities:
        raise ShapeMismatch(f"sample has {len(sample.clips)} modalities, config {cfg.modalities}")
    logits, tape = forward_batch(stack_samples([sample]), cfg, params)
    return logits[0], tape


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def cross_entropy_loss(logits, label) -> float:
    """Softmax negative log-likelihood; batch inputs give the batch mean."""
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.atleast_1d(np.asarray(label))
    lg = np.atleast_2d(logits)
    k = lg.shape[-1]
    if labels.shape[0] != lg.shape[0] or np.any(labels < 0) or np.any(labels >= k):
        raise InvalidLabel(f"labels {labels.tolist()} invalid for {k} classes")
    lp = _log_softmax(lg)
    return float(-lp[np.arange(lg.shape[0]), labels].mean())


def backward_batch(tape: ForwardTape, labels, cfg: NetworkConfig, params: ParamStore, *, skip_shift_adjoint=False) -> ParamStore:
    """Gradients of the batch-mean cross-entropy for every parameter.

    Shared-stage gradients accumulate over all modality branches because
    the stacked frames of every branch hit the same weights.
    ``skip_shift_adjoint`` exists only for mutation tests of the gradcheck.
    """
    if tape is None or tape.signature != params.signature() or not params.matches(cfg):
        raise StateError("tape, parameters and config do not belong together")
    n_mod, b, t = tape.input_shape[:3]
    labels = np.atleast_1d(np.asarray(labels))
    k = cfg.num_classes
    if labels.shape[0] != b or np.any(labels < 0) or np.any(labels >= k):
        raise InvalidLabel(f"labels {labels.tolist()} invalid for batch {b} / {k} classes")

    grads: dict[str, np.ndarray] = {}
    d = np.exp(_log_softmax(tape.logits))
    d[np.arange(b), labels] -= 1.0
    d /= b
    grads["fc.weight"] = kernels.matmul(tape.fused.T, d, "fc_dw")
    grads["fc.bias"] = d.sum(axis=0)
    dfused = kernels.matmul(d, params["fc.weight"].T, "fc_dx")

    hh, ww = tape.final_hw
    f = dfused.shape[1]
    dh = np.broadcast_to(
        (dfused / n_mod / t / (hh * ww))[None, :, None, :, None, None], (n_mod, b, t, f, hh, ww)
    ).copy()

    last = len(cfg.stages)
    for j in range(last, 0, -1):
        st = cfg.stages[j - 1]
        if j < last and j in cfg.shift.sites and not skip_shift_adjoint:
            kk, i = cfg.site_bands(j)
            c, h2, w2 = dh.shape[3:]
            dh = kernels.dual_shift(dh.reshape(n_mod, b, t, c, h2 * w2), kk, i, reverse=True).reshape(dh.shape)
        dy = dh * tape.masks[j - 1]
        cin, hin, win = tape.stage_in[j - 1]
        need_dx = j > 1
        if st.shared:
            wt, _ = params.conv(j, None)
            gw, gb, dx = conv2d_backward(
                dy.reshape(n_mod * b * t, *dy.shape[3:]), tape.cols[j - 1][0], wt, (cin, hin, win), st.stride, need_dx
            )
            grads[f"stage{j}.weight"], grads[f"stage{j}.bias"] = gw, gb
            if need_dx:
                dh = dx.reshape(n_mod, b, t, cin, hin, win)
        else:
            dxs = []
            for p in range(n_mod):
                wt, _ = params.conv(j, p)
                gw, gb, dx = conv2d_backward(
                    dy[p].reshape(b * t, *dy.shape[3:]), tape.cols[j - 1][p], wt, (cin, hin, win), st.stride, need_dx
                )
                grads[f"stage{j}.weight.m{p}"], grads[f"stage{j}.bias.m{p}"] = gw, gb
                dxs.append(dx)
            if need_dx:
                dh = np.stack(dxs).reshape(n_mod, b, t, cin, hin, win)
    return ParamStore({name: grads[name] for name, _ in ParamStore.layout(cfg)})


def backward_full(tape: ForwardTape, label: int, cfg: NetworkConfig, params: ParamStore) -> ParamStore:
    return backward_batch(tape, [label], cfg, params)


def param_count(cfg: NetworkConfig) -> int:
    """Trainable parameters; shared stages count once regardless of N."""
    total = 0
    for st in cfg.stages:
        total += st.param_count * (1 if st.shared else cfg.modalities)
    return total + cfg.num_features * cfg.num_classes + cfg.num_classes


def mac_count(cfg: NetworkConfig) -> int:
    """Multiply-accumulates of one forward pass.

    Padded-tap rule: every output position costs ``9 * Cin`` MACs per output
    channel, zero-padding taps included.  Shifts contribute nothing.
    """
    total = 0
    for st, (ho, wo) in zip(cfg.stages, cfg.spatial_dims()):
        total += cfg.modalities * cfg.frames * ho * wo * st.out_channels * st.in_channels * 9
    return total + cfg.num_features * cfg.num_classes
