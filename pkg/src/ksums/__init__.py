"""ksums: exact workbench for Kloosterman-type exponential sums over primes
to composite moduli, with solution counters, the four-sum decomposition of
the Mangoldt-weighted sum, and explicit-bound verification sweeps.

The hot kernels live in a compiled extension (ksums._core) with a pure-Python
twin selected automatically when the extension is unavailable; see
ksums._backend for the switch and README for the benchmark.
"""

from ._backend import active_name, has_compiled, set_backend
from .arith import Modulus, Residue, batch_modinv, egcd, factorize, modinv
from .counting import CountResult, count_I, count_J, e_roots, kappa, mu_count, nu
from .errors import DomainError, InconsistencyError, NotInvertible
from .expsum import (
    ComplexSum,
    RationalSumResult,
    SumSpec,
    WEIGHT_INTEGERS,
    WEIGHT_MANGOLDT,
    WEIGHT_PRIMES,
    bilinear_sum,
    complete_sum,
    incomplete_sum,
    integer_sum,
    lambda_sum,
    prime_sum,
    rational_sum,
)
from .tables import PrimeTable, pi, pi1, sieve
from .vaughan import (
    Decomposition,
    VaughanParams,
    choose_params,
    coeff_a,
    coeff_b,
    coefficient_of,
    decompose,
    remainder_reference,
)
from .verify import (
    BoundReport,
    BoundRow,
    CongruenceWitness,
    GsumCount,
    NOT_FOUND,
    TripleCount,
    count_gsum,
    count_triple,
    decay_factor,
    find_gsum_witness,
    find_triple_witness,
    find_witness,
    gsum_histogram,
    sweep_lambda_sums,
    threshold_exponent,
    threshold_exponent_composite,
    triple_histogram,
)

__version__ = "0.1.0"
