"""Cancelable biometric templates bound to keys with a fuzzy commitment.

Pipeline: a seed-derived block-rotation projection makes a revocable
template, sign quantization turns it into bits, and a binary ECC binds a
random key to those bits. ``rofc.evaluation`` measures FAR/FRR/EER.
"""

from .commitment import HelperData, commit, key_digest, recover, verify
from .ecc import Codec
from .errors import (
    DatasetError,
    DecodeFailure,
    DimensionError,
    FormatError,
    LengthError,
    NoCrossingError,
    RecoverFailure,
    VersionError,
)
from .evaluation import (
    Dataset,
    EerResult,
    RateCurve,
    baseline_rates,
    calibrate_sigma,
    compute_eer,
    gen_synthetic,
    load_dataset,
    protected_rates,
    save_dataset,
    threshold_schedule,
)
from .protocol import (
    AuthDecision,
    DeviceRecord,
    FailureReason,
    ServerRecord,
    authenticate,
    enroll,
    generate_key,
    new_seed,
    revoke_and_reissue,
)
from .quantizer import QuantizerConfig, binarize, default_reference
from .rop import ProjectionParams, derive_params, project
from .store import RecordStore, load_records, save_records

__version__ = "0.1.0"
