"""Reply-field names for the 11-flag feature extraction prompt.

Order follows the prompt's Task 1 - Task 11. Each entry is
(reply flag field, reply explanation field, attribute name).
"""

FEATURE_FIELDS = (
    ("Employee mentioned", "employee explanation", "employees_mentioned"),
    ("Rent mentioned", "rent explanation", "rent_mentioned"),
    ("Business longer than 2 years", "long history explanation", "business_longer_2y"),
    ("New business", "new business explanation", "new_business"),
    ("Match grant mentioned", "grant explanation", "match_grant_mentioned"),
    ("Gratitude expressed", "gratitude explanation", "gratitude_expressed"),
    ("Urgency explained", "urgency explanation", "urgency_explained"),
    ("Social comparison (better than peers)", "social comparison better explanation",
     "social_comparison_better"),
    ("Self comparison (worse than before)", "self comparison worse explanation",
     "self_comparison_worse"),
    ("Small Business Specified", "tag explanation", "small_business_specified"),
    ("Extrinsic incentive", "extrinsic incentive explanation", "extrinsic_incentive"),
)

FLAG_ORDER = tuple(attr for _, _, attr in FEATURE_FIELDS)

TAG_FIELD = "Tag"
NO_TAG = "NO TAG"
