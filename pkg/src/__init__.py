"""
Hybrid mmWave receiver ADC bit allocation simulator.

Allocates ADC quantization bits across the RF chains of a hybrid massive-MIMO
receiver under a total receiver power budget and evaluates spectral and energy
efficiency against baseline receivers.
"""

from pathlib import Path

from .logging_config import setup_logging

_dir = Path(__file__).parent.name

setup_logging(log_level="INFO", name=_dir)

__version__ = "0.1.0"
