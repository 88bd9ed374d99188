"""vidcurate: coarse-to-fine curation engine for video-text datasets."""

__version__ = "0.1.0"
