"""Streaming Slepian-Wolf coding toolkit: source models, exponents,
moderate deviations constants, truncated-memory codec and Monte Carlo."""

from streamsw.source_model import (
    JointPmf,
    SourceStream,
    make_asymmetric,
    make_dsbs,
    make_zchannel,
    parse_source,
    sample_blocks,
)
from streamsw.info_measures import SourceProfile, profile

__all__ = [
    "JointPmf",
    "SourceStream",
    "SourceProfile",
    "make_asymmetric",
    "make_dsbs",
    "make_zchannel",
    "parse_source",
    "profile",
    "sample_blocks",
]
