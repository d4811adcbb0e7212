"""Fountain-code query design and GF(2) recovery of binary inputs from parity answers."""
from __future__ import annotations

from . import bounds, lemmas
from ._kernels import active as _active_kernels
from .codec import (
    MeasurementBatch,
    Query,
    encode,
    generate_batch,
    input_vector,
    random_input,
    sample_query,
)
from .degree import (
    DegreeDistribution,
    SolitonParams,
    from_probs,
    harmonic,
    ideal_soliton,
    point_mass,
    query_difficulty,
    sample_degree,
    sample_degrees,
    soliton_for_difficulty,
)
from .errors import ContractError, ParameterError, TransitionOutOfRange
from .experiment import (
    ExperimentConfig,
    ExperimentRecord,
    estimate_transition,
    run_sweep,
    run_trial,
    simulate_erasure_channel,
)
from .gf2 import BitMatrix, DecodeKind, DecodeResult, ml_decode, peel_decode, rank

BACKEND = _active_kernels.name

__all__ = [
    "BACKEND", "BitMatrix", "ContractError", "DecodeKind", "DecodeResult",
    "DegreeDistribution", "ExperimentConfig", "ExperimentRecord", "MeasurementBatch",
    "ParameterError", "Query", "SolitonParams", "TransitionOutOfRange", "bounds",
    "encode", "estimate_transition", "from_probs", "generate_batch", "harmonic",
    "ideal_soliton", "input_vector", "lemmas", "ml_decode", "peel_decode", "point_mass",
    "query_difficulty", "random_input", "rank", "run_sweep", "run_trial",
    "sample_degree", "sample_degrees", "sample_query", "simulate_erasure_channel",
    "soliton_for_difficulty",
]
