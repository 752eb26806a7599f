"""Calibration and inference toolkit for ion-selective voltammetric sensors."""

__version__ = "0.1.0"

from .quantity import MeasuredQuantity, propagate_ratio, propagate_sum  # noqa: E402

__all__ = ["MeasuredQuantity", "propagate_ratio", "propagate_sum", "__version__"]
