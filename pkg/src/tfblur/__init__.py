"""tfblur: discrete Gabor analysis, time-frequency blurring operators, and a
seeded audio augmentation pipeline.

The compiled hot-kernel core is used when available; set
``TFBLUR_BACKEND=python`` to force the pure-NumPy fallback (see
``tfblur.backend.BACKEND`` for the active choice).
"""

from .backend import BACKEND
from .errors import (ConfigError, FormatError, NotAFrameError, TfblurError,
                     UnsupportedError)
from .gabor import (Lattice, TfMatrix, Window, dual_window, gabor_project,
                    load_tf, make_window, moyal_check, save_tf, stft,
                    synthesize, tight_window)
from .kernels import (Kernel, KernelField, apply_field, compose,
                      constant_field, convolve_tf, custom_kernel,
                      delta_kernel, gaussian_kernel, kernel_dft,
                      kernel_dft_min, mask_field)
from .operators import (BlurSpec, OperatorWindowSpec, blur,
                        blur_multi_window, blur_position_dependent,
                        blur_two_window, localize, operator_norm_estimate,
                        weak_action, zero_operator_demo)
from .features import (MelFilterbank, Spectrogram, log_mel, mel_filterbank,
                       normalize_01, save_feature, load_feature, spec_blur,
                       spectrogram)
from .augment import (AugmentConfig, FeatureConfig, RngStream,
                      add_white_noise, config_from_dict, derive_rng,
                      load_config, run_pipeline, spec_augment)
from .signal_io import Signal, gen_signal, pad_to_length, read_wav, write_wav

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
