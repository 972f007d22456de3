"""Iterative time-refinement tooling for LLM-based video temporal grounding.

Builds coarse-to-fine refinement training sequences, encodes and parses their
control-token text, decodes final segments, scores them, and provides the
auxiliary-head losses with their gradients.
"""
from .core import (
    Diagnostic,
    GroundingSample,
    InvalidSampleError,
    NoiseSchedule,
    RefinementSequence,
    RefinementStep,
    TimeSegment,
    VideoMeta,
    make_sample,
    quantize,
    validate_sample,
)
from .decode import DecodeError, DecodeStrategy, decode
from .grammar import ParseOutcome, embed_in_answer, parse, serialize
from .losses import AuxHeadParams, LossConfig, aux_forward, aux_gradients, combined_loss, cross_entropy, segment_loss
from .metrics import EvalPair, EvalReport, build_report, iou, mean_iou, recall_at
from .seqgen import SeqGenConfig, TrainingSample, generate_dataset, generate_training_sample, sample_offsets
from .simulate import PredictorModel, run_study, simulate_prediction, synthetic_samples

__version__ = "0.1.0"
