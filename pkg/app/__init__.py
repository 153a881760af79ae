"""
PPF-QSNN - parallel proportional fusion of a spiking head and a
variational quantum circuit head for image classification
"""

__version__ = "1.0.0"
__author__ = "PPF-QSNN Team"
