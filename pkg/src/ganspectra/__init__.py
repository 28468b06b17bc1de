"""ganspectra: spectral detection and simulation of up-sampling artifacts.

Zero-insertion up-sampling replicates an image's spectrum into the high
frequencies; the convolution that follows rarely removes the copies
completely. This package verifies that identity, synthesizes images that
carry the artifact through a reconstruction pipeline, and trains
spectrum-based classifiers that separate originals from artifact-bearing
images.
"""

from .detector import (
    FeatureConfig,
    Metrics,
    Model,
    TrainConfig,
    evaluate,
    extract_features,
    load_model,
    predict,
    predict_batch,
    save_model,
    train,
)
from .harness import (
    AttackSpec,
    DatasetManifest,
    ExperimentConfig,
    ManifestEntry,
    apply_attack,
    make_fakes,
    read_manifest,
    run_experiment,
    synth_corpus,
    write_manifest,
)
from .ops import conv2d, crop, downsample, embed_kernel, resize_bilinear, to_gray
from .rng import SplitMix64
from .simulator import (
    SimulatorConfig,
    SimulatorState,
    artifact_spectrum,
    fit,
    initial_state,
    load_state,
    reconstruct,
    save_state,
)
from .spectral import (
    apply_band,
    band_partition,
    dft1d,
    dft2d,
    fftshift,
    ifftshift,
    log_spectrum,
    verify_replication,
    verify_replication_2d,
)
from .tensor import read_rt01, write_rt01
from .upsampler import (
    UpsamplerSpec,
    is_low_pass,
    kernel_frequency_response,
    make_nn_kernel,
    upsample,
    zero_insert,
)

__version__ = "0.1.0"
