"""Decision tools for factor maps between substitution subshifts."""
from .core import (Alphabet, Morphism, Substitution, SubstitutionError, CapExceeded,
                   AmbiguityError, WindowOracle, compose, classify, fixed_point_window,
                   language, complexity, spectral_data, bound_calculators,
                   empirical_lr_constant, parse_sub, load_sub, fibonacci, thue_morse, chacon)

__version__ = "0.1.0"

__all__ = ["Alphabet", "Morphism", "Substitution", "SubstitutionError", "CapExceeded",
           "AmbiguityError", "WindowOracle", "compose", "classify", "fixed_point_window",
           "language", "complexity", "spectral_data", "bound_calculators",
           "empirical_lr_constant", "parse_sub", "load_sub", "fibonacci", "thue_morse", "chacon"]
