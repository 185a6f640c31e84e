"""Band structures of high-contrast subwavelength resonator crystals.

Real and complex (evanescent) bands in 1D via capacitance and transfer
matrices, interface-mode decay prediction for defected chains, and 2D
band-gap Green's function / multipole machinery with root-finding sweeps.
"""

from .core import (
    DEFAULT_CONFIG,
    BrillouinPath,
    ComplexQuasimomentum,
    NumericsConfig,
    SubwavelengthBand,
    eigs_complex,
    eigvals_complex,
    reduce_alpha_1d,
    subwavelength_frequency,
)
from .chain1d import (
    ChainGeometry1D,
    GapBranch1D,
    band_sweep_1d,
    beta_admissible_interval,
    capacitance_matrix_1d,
    dimer_gap_branches,
    generalized_capacitance_1d,
)
from .transfer1d import (
    TransferMatrix,
    complex_quasimomentum_from_T,
    floquet_mode_residual,
    general_band_sweep,
    modified_transfer,
    transfer_matrix_single,
)
from .ssh1d import (
    DefectedChain,
    InterfaceMode,
    decay_envelope_check,
    finite_capacitance,
    interface_eigenpair,
    interface_frequency_limit,
    open_chain_capacitance,
    predicted_decay_rate,
)
from .lattice2d import (
    DualTruncation,
    Lattice2D,
    greens_gap,
    greens_remainder,
    rayleigh_singularities,
    truncation_convergence,
)
from .multipole2d import (
    CircularResonator,
    SlpAssembler,
    SlpMatrix,
    capacitance_2d,
    exp_beta_fourier,
    slp_matrix,
    subwavelength_bands_2d,
)
from .bands2d import (
    BandSample,
    GapBranch2D,
    ScanResult,
    Sweep2DResult,
    SweepConfig,
    gap_sweep_2d,
    muller_root,
    singularity_scan,
)
from . import errors

__version__ = "0.1.0"
