"""
Préparation des données : séries brutes → échantillons normalisés → corpus sur disque.
"""

from .corpus import CorpusConfig, SampleCorpus, build_corpus
from .packing import MAX_CHANNELS, PackedWindow, channel_groups, pack_channels, packing_capacity
from .samples import (
    EXTREME_LIMIT,
    NORM_EPS,
    Discard,
    TrainingSample,
    apply_context_mask,
    draw_mask_start,
    normalize_sample,
)
from .series import ChannelRole, RawSeries, load_roles_sidecar, read_series_csv, split_train_val
from .time_features import N_TIME_FEATURES, encode_time_features, extrapolate_timestamps
from .windows import CONTEXT_LEN, TARGET_LEN, WINDOW_LEN, extract_windows, window_starts

__all__ = [
    "CONTEXT_LEN",
    "EXTREME_LIMIT",
    "MAX_CHANNELS",
    "N_TIME_FEATURES",
    "NORM_EPS",
    "TARGET_LEN",
    "WINDOW_LEN",
    "ChannelRole",
    "CorpusConfig",
    "Discard",
    "PackedWindow",
    "RawSeries",
    "SampleCorpus",
    "TrainingSample",
    "apply_context_mask",
    "build_corpus",
    "channel_groups",
    "draw_mask_start",
    "encode_time_features",
    "extract_windows",
    "extrapolate_timestamps",
    "load_roles_sidecar",
    "normalize_sample",
    "pack_channels",
    "packing_capacity",
    "read_series_csv",
    "split_train_val",
    "window_starts",
]
