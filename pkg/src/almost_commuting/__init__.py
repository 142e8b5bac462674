"""Almost commuting matrices: representations, indices, commuting approximants.

Submodules
----------
linalg           checked dense linear algebra, Pfaffians
representations  approximate representations of surfaces and their defects
indices          Bott, winding, kappa and Z2 indices with gap certificates
solvers          square solvers (joint diagonalization strategies)
transforms       the sphere/cylinder/annulus/disk/square pipeline
lattice          quantum Hall model on a sphere
cmat, cli        file formats and the command line
"""

__version__ = "0.1.0"

from .indices import (  # noqa: E402
    IndexResult,
    bott_spectral,
    bott_trace,
    kappa,
    kappa1,
    winding_det,
    winding_tracelog,
    z2_index,
)
from .representations import (  # noqa: E402
    SurfaceKind,
    SurfaceRep,
    clock_shift,
    direct_sum,
    make_rep,
    measure_defect,
    negate_component,
    self_dual_doubled_triple,
    spin_triple,
)
from .transforms import solve_sphere  # noqa: E402
