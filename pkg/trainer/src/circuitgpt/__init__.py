"""Toy autoregressive circuit writer trained on exported token
datasets; talks to the simulator package only through its CLI and
JSONL formats."""

__version__ = "0.1.0"
