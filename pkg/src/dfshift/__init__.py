"""Dual feature shift: zero-multiplication modality and temporal channel
shifts inside a shared-weight multi-modal video classifier."""

from .kernels import BACKEND, trace_ops
from .tensor import ChannelRange, ClipTensor, concat_channels, make_clip, slice_channels
from .shift import (
    ShiftConfig,
    count_mult_ops,
    dual_shift,
    modality_shift_backward,
    modality_shift_group,
    modality_shift_pair,
    temporal_shift,
    temporal_shift_backward,
)

__version__ = "0.1.0"
