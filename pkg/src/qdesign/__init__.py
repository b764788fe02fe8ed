"""Quantum designs: unistochastic matrices, entangling power of gates,
multiunitary matrix searches and quantum Sudoku designs."""

from . import ame, averages, birkhoff, core, gates, sudoq

__all__ = ["ame", "averages", "birkhoff", "core", "gates", "sudoq"]
__version__ = "0.1.0"
