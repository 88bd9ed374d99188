"""Model-backed scorer sidecar for the vidcurate engine.

Speaks the scorer wire protocol on stdin/stdout and converts source media
to the FSER frame container. Interacts with the engine only through its
documented external interfaces; nothing here imports vidcurate.
"""

__version__ = "0.1.0"
