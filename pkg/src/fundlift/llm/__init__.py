from .augment import AugmentationResult, PrefixViolationError, augment_three, extend_neutral
from .client import (
    DEFAULT_MODEL_ID,
    LlmClient,
    LlmClientConfig,
    MockProvider,
    RemoteProvider,
    load_prompt,
    render_prompt,
)
from .features import (
    GptFeatureSet,
    audit_agreement,
    extract_gpt_features,
    extract_gpt_features_many,
)
from .schema import FEATURE_FIELDS, FLAG_ORDER, NO_TAG

__all__ = [
    "AugmentationResult",
    "PrefixViolationError",
    "augment_three",
    "extend_neutral",
    "DEFAULT_MODEL_ID",
    "LlmClient",
    "LlmClientConfig",
    "MockProvider",
    "RemoteProvider",
    "load_prompt",
    "render_prompt",
    "GptFeatureSet",
    "audit_agreement",
    "extract_gpt_features",
    "extract_gpt_features_many",
    "FEATURE_FIELDS",
    "FLAG_ORDER",
    "NO_TAG",
]
