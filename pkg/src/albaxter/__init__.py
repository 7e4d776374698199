"""Verification laboratory for the Ablowitz-Ladik integrable chain.

Classical layer: Lax/monodromy construction, conserved quantities, exact
Poisson brackets, the r-matrix relation, and one-parameter Backlund maps
with spectrality and generating-function checks.  Quantum layer: the
truncated q-boson representation with RLL/Yang-Baxter and quantum
determinant identities, Bethe roots by homotopy continuation, and the
q-difference Baxter equation verified at the eigenvalue level and
pointwise on product kernels.
"""

from .algebra import LaurentPoly, Mat2, MultiDual, laurent_eval, laurent_mul, mat2_mul
from .classical_chain import (
    ChainState,
    ConservedSet,
    DegenerateStateError,
    classical_rmatrix,
    conserved_quantities,
    eom_rhs,
    local_lax,
    monodromy,
    monodromy_matrix,
    poisson_bracket,
    rk4_step,
    rmatrix_relation_residual,
)
from .backlund import (
    BTError,
    BTResult,
    SolverOptions,
    bt_apply,
    canonicity_check,
    classical_baxter_check,
    dressing_matrix,
    generating_function,
    generating_function_check,
    intertwining_residual,
    spectrality,
)
from .qcalc import (
    KernelSite,
    QParam,
    feq_residuals,
    jackson_derivative,
    jackson_integral,
    jackson_op,
    kernel_F,
    qhat_kernel,
    qpochhammer_inf,
    rho_site,
)
from .fock import (
    FockRep,
    OperatorMonodromy,
    bethe_state,
    eigen_residual,
    operator_monodromy,
    quantum_determinant,
    quantum_rmatrix,
    rll_residual,
    trace_commutator_residual,
    ybe_residual,
)
from .bethe import (
    BetheConfig,
    BetheConvergenceError,
    baxter_qdiff_residual,
    bethe_residuals,
    psi_poly,
    solve_bethe,
    transfer_eigenvalue,
)
from .funspace import (
    FuncExpr,
    OpExpr,
    apply_opexpr,
    baxter_action_residual,
    rho_product,
    triangular_check,
)

__version__ = "0.1.0"
