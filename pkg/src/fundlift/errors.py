"""Shared exception types.

``SchemaError`` maps to CLI exit code 2 (validation problems in inputs or
configs); ``ProviderError`` maps to exit code 3 (LLM provider failures).
"""


class FundliftError(Exception):
    pass


class SchemaError(FundliftError):
    pass


class ProviderError(FundliftError):
    pass
