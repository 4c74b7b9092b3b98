"""Multimodal pre-diagnostic toolkit: thermal clot detection, cardiopulmonary
audio classification, and skin-image preprocessing with classical ML."""

from .core import AudioSignal, GrayImage, LabeledDataset, Rng

__all__ = ["AudioSignal", "GrayImage", "LabeledDataset", "Rng"]
__version__ = "0.1.0"
