"""Exact-arithmetic twisted complexes over the integers.

The package implements bounded cochain complexes of finitely generated
free abelian groups, twisted complexes over them, left/right C-complexes
with their total complexes, the homotopy category built from degree-zero
cohomology of the twisted Hom complexes, and the tensor/dual/Tate
structure, all with machine-checked sign conventions.
"""

from .zmodule import (
    IntMatrix,
    SnfResult,
    FGAbGroup,
    snf,
    solve,
    solve_matrix,
    kernel_basis,
    cokernel_invariants,
)
from .complexes import (
    ZComplex,
    GradedMap,
    HomComplex,
    validate,
    homology,
    hom_complex,
    compose_graded,
    cone_of_map,
    is_quasi_iso,
    shift_complex,
    tensor_complex,
    dual_complex,
)

__all__ = [
    "IntMatrix", "SnfResult", "FGAbGroup", "snf", "solve", "solve_matrix",
    "kernel_basis", "cokernel_invariants",
    "ZComplex", "GradedMap", "HomComplex", "validate", "homology",
    "hom_complex", "compose_graded", "cone_of_map", "is_quasi_iso",
    "shift_complex", "tensor_complex", "dual_complex",
]
