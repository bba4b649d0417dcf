"""Fragment-level language-model fuzzing toolkit for ECMAScript engines."""

__version__ = "0.1.0"
