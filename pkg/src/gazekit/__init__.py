"""gazekit: caption-template supervision, paired-corpus scaffolding, and
balanced evaluation for gaze-consistency image forensics."""

__version__ = "0.1.0"

from .pool import (  # noqa: F401
    Caption,
    MacroPool,
    TemplateId,
    assign_captions,
    canonical_template_of,
    caption_space_size,
    compose,
    default_pool,
    load_pool,
)
from .verdict import Verdict, parse_first_keyword, parse_strict, sida_binarize  # noqa: F401
from .metrics import (  # noqa: F401
    BenchmarkScore,
    ConfusionMatrix,
    balanced_accuracy,
    macro_f1,
    mcc,
    score_records,
)
