"""oslgen: conformance test generation for ONNX operators from OSL specs."""

from pathlib import Path

__version__ = "0.1.0"


def corpus_dir() -> Path:
    """Directory of the bundled .osl specification corpus."""
    return Path(__file__).parent / "corpus"
