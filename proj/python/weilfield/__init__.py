"""Weil-algebra lattice field theory.

Thin Python layer over the C++ library: Weil algebras, the leapfrog solver
in Weil arithmetic, tangent lifts, the presymplectic form, slice brackets,
the mode-sum commutator oracle and the experiment harness.
"""

from ._core import (
    ConeEscape,
    Interaction,
    Lattice,
    Topology,
    ValidationError,
    WeilAlgebra,
    WeilValue,
    __version__,
    default_config,
    eom_residual,
    extend_dual,
    make_dual,
    make_jet,
    make_real,
    pauli_jordan_bracket,
    pauli_jordan_function,
    presymplectic_form,
    restrict_data,
    run_experiment,
    slice_bracket,
    solve,
    tangent_lift,
    tensor,
)

__all__ = [
    "ConeEscape",
    "Interaction",
    "Lattice",
    "Topology",
    "ValidationError",
    "WeilAlgebra",
    "WeilValue",
    "__version__",
    "default_config",
    "eom_residual",
    "extend_dual",
    "make_dual",
    "make_jet",
    "make_real",
    "pauli_jordan_bracket",
    "pauli_jordan_function",
    "presymplectic_form",
    "restrict_data",
    "run_experiment",
    "slice_bracket",
    "solve",
    "tangent_lift",
    "tensor",
]
