"""Python surface of the phishing-website detection workbench.

The heavy lifting lives in the compiled `_core` extension; this package
just re-exports it. When the extension is built out-of-tree (plain CMake
builds put it on PYTHONPATH as a top-level module), fall back to that.
"""

try:
    from ._core import *  # noqa: F401,F403
    from ._core import Model, schema, schema_fingerprint  # noqa: F401
except ImportError:  # extension not packaged next to us
    from _core import *  # noqa: F401,F403
    from _core import Model, schema, schema_fingerprint  # noqa: F401

__all__ = [
    "schema",
    "schema_fingerprint",
    "extract_features",
    "metrics",
    "synthesize_csv",
    "train",
    "train_on_csv",
    "load_model",
    "Model",
]
