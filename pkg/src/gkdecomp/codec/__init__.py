from .arith import CodedStream, CodingError, ConditionalModel, decode_entropy, encode_entropy
from .bundle import BundleError, EncodedBundle, read_bundle, write_bundle
from .schemes import (
    DecodeError,
    SampleBlock,
    SchemeRun,
    StreamRate,
    decode_bundle,
    error_sequence,
    limited_helper_errors,
    run_binary_helper_scheme,
    run_general_helper_scheme,
    run_gk_scheme,
    run_limited_helper_scheme,
    run_scheme,
    sample,
)
