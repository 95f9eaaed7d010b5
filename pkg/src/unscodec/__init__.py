"""unscodec: low-bit-rate DFT-domain transform audio codec.

Unified noise shaping (spectral envelope division plus conditional complex
temporal prediction along frequency), hybrid polar quantization with
contrast-controlled phase resolution, and an adaptive range-coded bitstream.
"""

from .analysis_metrics import seg_snr, tns_domain_experiment
from .codec import decode_stream, encode_stream, shaping_roundtrip
from .config import CodecConfig, load_config, save_config
from .polar_quant import DEFAULT_ECUPQ_TABLE, design_ecupq_table

__version__ = "0.1.0"

__all__ = [
    "CodecConfig",
    "DEFAULT_ECUPQ_TABLE",
    "decode_stream",
    "design_ecupq_table",
    "encode_stream",
    "load_config",
    "save_config",
    "seg_snr",
    "shaping_roundtrip",
    "tns_domain_experiment",
    "__version__",
]
